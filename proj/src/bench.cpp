#include "beamdec/bench.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "beamdec/oracle.hpp"

namespace beamdec {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

int parse_int(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("expected an integer for " + what + ", got '" + s + "'");
  }
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("expected a number for " + what + ", got '" + s + "'");
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string format_fixed(double v, int places = 4) {
  std::ostringstream ss;
  ss.setf(std::ios::fixed);
  ss.precision(places);
  ss << v;
  return ss.str();
}

}  // namespace

std::string StrategySpec::label() const {
  std::string out = to_string(name);
  if (stop) out += ":" + to_string(*stop);
  return out;
}

StrategySpec parse_strategy_spec(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() < 2) throw ConfigError("strategy spec needs name:k, got '" + text + "'");
  StrategySpec spec;
  const auto name = strategy_from_string(parts[0]);
  if (!name) throw ConfigError("unknown strategy name: " + parts[0]);
  spec.name = *name;
  spec.k = parts[1] == "inf" ? SearchStrategy::kUnboundedWidth
                             : parse_int(parts[1], "strategy k");
  for (std::size_t i = 2; i < parts.size(); ++i) {
    const std::string& tok = parts[i];
    if (tok.empty()) throw ConfigError("empty strategy field in '" + text + "'");
    if (std::isdigit(static_cast<unsigned char>(tok[0]))) {
      if (spec.gamma) throw ConfigError("duplicate gamma in '" + text + "'");
      spec.gamma = parse_int(tok, "strategy gamma");
    } else {
      if (spec.stop) throw ConfigError("duplicate stop rule in '" + text + "'");
      const auto rule = stop_rule_from_string(tok);
      if (!rule) throw ConfigError("unknown stop rule: " + tok);
      spec.stop = rule;
    }
  }
  return spec;
}

AdapterSpec parse_adapter_spec(const std::string& text) {
  AdapterSpec spec;
  if (text == "logprob") return spec;
  const auto head = text.substr(0, text.find(':'));
  const auto rest = text.find(':') == std::string::npos ? std::string() : text.substr(text.find(':') + 1);
  const auto args = split(rest, ',');
  if (head == "ln") {
    if (args.size() < 2) throw ConfigError("ln adapter needs beta,mode[,r]");
    spec.kind = AdapterSpec::Kind::Ln;
    spec.ln.beta = parse_double(args[0], "ln beta");
    if (args[1] == "ratio")
      spec.ln.bound_mode = LengthNormParams::BoundMode::Ratio;
    else if (args[1] == "nmax")
      spec.ln.bound_mode = LengthNormParams::BoundMode::NMax;
    else
      throw ConfigError("ln bound mode must be ratio or nmax, got '" + args[1] + "'");
    if (args.size() > 2) spec.ln.r = parse_double(args[2], "ln r");
    if (args.size() > 3) throw ConfigError("too many ln adapter fields");
    return spec;
  }
  if (head == "pmi") {
    if (args.size() != 2) throw ConfigError("pmi adapter needs lambda,eps");
    spec.kind = AdapterSpec::Kind::Pmi;
    spec.pmi.lambda = parse_double(args[0], "pmi lambda");
    spec.pmi.epsilon = parse_double(args[1], "pmi eps");
    return spec;
  }
  throw ConfigError("unknown adapter spec: " + text);
}

int NmaxRule::resolve(int input_len) const {
  switch (kind) {
    case Kind::Default: return default_n_max(input_len);
    case Kind::Fixed: return fixed;
    case Kind::Ratio: return std::max(1, static_cast<int>(std::ceil(ratio * input_len)));
  }
  return default_n_max(input_len);
}

NmaxRule parse_nmax_rule(const std::string& text) {
  NmaxRule rule;
  if (text.rfind("ratio:", 0) == 0) {
    rule.kind = NmaxRule::Kind::Ratio;
    rule.ratio = parse_double(text.substr(6), "n-max ratio");
    if (rule.ratio <= 0.0) throw ConfigError("n-max ratio must be > 0");
    return rule;
  }
  rule.kind = NmaxRule::Kind::Fixed;
  rule.fixed = parse_int(text, "n-max");
  if (rule.fixed < 1) throw ConfigError("n-max must be >= 1");
  return rule;
}

RandomSpec parse_random_spec(const std::string& text) {
  const auto parts = split(text, ',');
  if (parts.size() != 4) throw ConfigError("--random needs seed,count,vocab,order");
  RandomSpec spec;
  spec.seed = static_cast<std::uint64_t>(parse_int(parts[0], "random seed"));
  spec.count = parse_int(parts[1], "random count");
  spec.vocab_size = parse_int(parts[2], "random vocab");
  spec.order = parse_int(parts[3], "random order");
  if (spec.count < 1) throw ConfigError("--random count must be >= 1");
  return spec;
}

// ---------------------------------------------------------------------------
// run_bench

namespace {

struct Instance {
  std::shared_ptr<const Model> model;
  std::shared_ptr<const Model> lm;  // pmi only
  DecoderInput input;
  std::shared_ptr<const ScoreAdapter> adapter;
};

std::shared_ptr<const ScoreAdapter> build_adapter(const AdapterSpec& spec, const Model& model,
                                                  const Model* lm) {
  switch (spec.kind) {
    case AdapterSpec::Kind::LogProb:
      return std::make_shared<LogProbAdapter>(model);
    case AdapterSpec::Kind::Ln:
      return std::make_shared<LengthNormAdapter>(model, spec.ln);
    case AdapterSpec::Kind::Pmi:
      if (!lm) throw ConfigError("pmi adapter requires a corpus to train the language model");
      return std::make_shared<PmiAdapter>(model, *lm, spec.pmi);
  }
  throw ConfigError("bad adapter spec");
}

std::vector<Instance> build_instances(const BenchConfig& config) {
  std::vector<Instance> out;

  if (config.random && (config.model_path || config.model_text))
    throw ConfigError("choose either --model or --random, not both");

  if (config.random) {
    if (config.adapter.kind == AdapterSpec::Kind::Pmi)
      throw ConfigError("pmi adapter needs a corpus-trained language model; use --model");
    const RandomSpec& spec = *config.random;
    for (int i = 0; i < spec.count; ++i) {
      const std::uint64_t seed = spec.seed + static_cast<std::uint64_t>(i);
      auto model = std::make_shared<TableModel>(
          random_model(seed, spec.vocab_size, spec.order));
      std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
      std::uniform_int_distribution<int> len_dist(2, 6);
      std::uniform_int_distribution<TokenId> tok_dist(
          0, static_cast<TokenId>(model->vocab().regular_count() - 1));
      TokenSeq x(static_cast<std::size_t>(len_dist(rng)));
      for (auto& t : x) t = tok_dist(rng);
      const int n_max = config.n_max.resolve(static_cast<int>(x.size()));
      Instance inst{model, nullptr, DecoderInput(std::move(x), n_max),
                    build_adapter(config.adapter, *model, nullptr)};
      out.push_back(std::move(inst));
    }
    return out;
  }

  if (!config.model_path && !config.model_text)
    throw ConfigError("a model source is required: --model or --random");

  const std::string model_text =
      config.model_text ? *config.model_text : read_file(*config.model_path);
  auto model = std::make_shared<TableModel>(load_table_model(model_text));
  const Vocabulary& vocab = model->vocab();

  std::shared_ptr<const Model> lm;
  std::vector<TokenSeq> inputs;
  if (config.corpus_path || config.corpus_text) {
    const std::string corpus_text =
        config.corpus_text ? *config.corpus_text : read_file(*config.corpus_path);
    const auto corpus = parse_corpus(corpus_text);
    if (corpus.empty()) throw ConfigError("corpus is empty");
    for (const auto& line : corpus) inputs.push_back(tokenize(line, vocab));
    if (config.adapter.kind == AdapterSpec::Kind::Pmi)
      lm = std::make_shared<NgramLm>(
          train_ngram(corpus, config.adapter.lm_order, config.adapter.lm_alpha, &vocab));
  } else {
    if (config.adapter.kind == AdapterSpec::Kind::Pmi)
      throw ConfigError("pmi adapter requires --corpus");
    // Single default instance: the regular tokens in vocabulary order.
    TokenSeq x;
    for (TokenId t = 0; t < vocab.size(); ++t)
      if (vocab.is_regular(t)) x.push_back(t);
    inputs.push_back(std::move(x));
  }

  auto adapter = build_adapter(config.adapter, *model, lm.get());
  for (auto& x : inputs) {
    const int n_max = config.n_max.resolve(static_cast<int>(x.size()));
    out.push_back(Instance{model, lm, DecoderInput(x, n_max), adapter});
  }
  return out;
}

std::string render_output(const std::optional<Hypothesis>& best, const Vocabulary& vocab) {
  if (!best) return "-";
  std::string out;
  for (std::size_t i = 0; i < best->tokens.size(); ++i) {
    if (i) out += ' ';
    out += vocab.surface(best->tokens[i]);
  }
  return out;
}

SearchResult run_strategy(const StrategySpec& spec, const Instance& inst) {
  if (spec.stop == StopRule::EsEarly || spec.stop == StopRule::Shrinking) {
    if (spec.name != StrategyName::Beam && spec.name != StrategyName::Greedy)
      throw ConfigError("stop rule " + to_string(*spec.stop) + " applies to beam/greedy only");
    if (spec.gamma)
      throw ConfigError("stop rule " + to_string(*spec.stop) + " cannot take gamma");
    if (spec.stop == StopRule::EsEarly) return decode_es(inst.input, *inst.adapter, spec.k);
    return decode_shrinking(inst.input, *inst.adapter, spec.k);
  }
  SearchStrategy strategy = make_strategy(spec.name, spec.k);
  if (spec.stop) strategy.stop_rule = *spec.stop;
  if (spec.gamma) {
    strategy.memory_gamma = *spec.gamma;
    return decode_memory_reduced(inst.input, *inst.adapter, strategy);
  }
  validate_strategy(strategy);
  return decode(inst.input, *inst.adapter, strategy);
}

}  // namespace

BenchReport run_bench(const BenchConfig& config) {
  if (config.strategies.empty()) throw ConfigError("at least one --strategy is required");
  const std::vector<Instance> instances = build_instances(config);

  // Reference runs, one per distinct width, reused across strategies.
  std::vector<int> widths;
  for (const auto& s : config.strategies)
    if (std::find(widths.begin(), widths.end(), s.k) == widths.end()) widths.push_back(s.k);
  std::vector<std::vector<SearchResult>> reference(widths.size());
  for (std::size_t w = 0; w < widths.size(); ++w) {
    reference[w].reserve(instances.size());
    for (const auto& inst : instances)
      reference[w].push_back(beam_search_reference(inst.input, *inst.adapter, widths[w]));
  }
  auto reference_for = [&](int k) -> const std::vector<SearchResult>& {
    const auto it = std::find(widths.begin(), widths.end(), k);
    return reference[static_cast<std::size_t>(it - widths.begin())];
  };

  std::vector<std::optional<Hypothesis>> oracle_best;
  if (config.with_oracle) {
    oracle_best.reserve(instances.size());
    for (const auto& inst : instances)
      oracle_best.push_back(
          exhaustive_best(inst.input, *inst.adapter, EnumerationBudget{config.oracle_budget}));
  }

  BenchReport report;
  for (const auto& spec : config.strategies) {
    const auto& refs = reference_for(spec.k);
    double calls = 0.0, ref_calls = 0.0, pops = 0.0;
    int mismatches = 0, matches = 0, oracle_hits = 0;

    AggregateRow agg;
    agg.strategy = spec.label();
    agg.k = spec.k == SearchStrategy::kUnboundedWidth ? "inf" : std::to_string(spec.k);
    agg.gamma = spec.gamma ? std::to_string(*spec.gamma) : "-";

    for (std::size_t i = 0; i < instances.size(); ++i) {
      const Instance& inst = instances[i];
      const SearchResult result = run_strategy(spec, inst);
      const SearchResult& ref = refs[i];

      InstanceRow row;
      row.strategy = agg.strategy;
      row.k = agg.k;
      row.gamma = agg.gamma;
      row.instance = static_cast<int>(i);
      row.output = render_output(result.best, inst.adapter->vocab());
      row.score = result.best ? result.best->score : 0.0;
      row.score_calls = result.stats.score_calls;
      row.pops = result.stats.pops;
      row.peak_active = result.stats.peak_active;
      row.terminated_early = result.stats.terminated_early;
      report.instances.push_back(std::move(row));

      calls += static_cast<double>(result.stats.score_calls);
      ref_calls += static_cast<double>(ref.stats.score_calls);
      pops += static_cast<double>(result.stats.pops);

      const bool same = (!result.best && !ref.best) ||
                        (result.best && ref.best && result.best->tokens == ref.best->tokens);
      if (same)
        ++matches;
      else
        ++mismatches;

      if (config.with_oracle) {
        const auto& ob = oracle_best[i];
        if (result.best && ob && result.best->tokens == ob->tokens) ++oracle_hits;
      }
    }

    const double n = static_cast<double>(instances.size());
    agg.mean_calls = calls / n;
    agg.call_ratio = ref_calls > 0.0 ? calls / ref_calls : 0.0;
    agg.search_err = static_cast<double>(mismatches) / n;
    agg.exact_match = static_cast<double>(matches) / n;
    agg.mean_pops = pops / n;
    report.aggregates.push_back(std::move(agg));

    if (config.with_oracle)
      report.oracle_match.emplace_back(spec.label(), static_cast<double>(oracle_hits) / n);
  }
  return report;
}

std::string emit_report(const BenchReport& report, ReportFormat format) {
  if (format == ReportFormat::Tsv) {
    std::string out =
        "strategy\tk\tgamma\tmean_calls\tcall_ratio\tsearch_err\texact_match\tmean_pops\n";
    for (const auto& a : report.aggregates) {
      out += a.strategy + '\t' + a.k + '\t' + a.gamma + '\t' + format_fixed(a.mean_calls) + '\t' +
             format_fixed(a.call_ratio) + '\t' + format_fixed(a.search_err) + '\t' +
             format_fixed(a.exact_match) + '\t' + format_fixed(a.mean_pops) + '\n';
    }
    return out;
  }

  nlohmann::ordered_json doc;
  doc["aggregates"] = nlohmann::ordered_json::array();
  for (const auto& a : report.aggregates) {
    nlohmann::ordered_json row;
    row["strategy"] = a.strategy;
    row["k"] = a.k;
    row["gamma"] = a.gamma;
    row["mean_calls"] = a.mean_calls;
    row["call_ratio"] = a.call_ratio;
    row["search_err"] = a.search_err;
    row["exact_match"] = a.exact_match;
    row["mean_pops"] = a.mean_pops;
    doc["aggregates"].push_back(std::move(row));
  }
  doc["instances"] = nlohmann::ordered_json::array();
  for (const auto& r : report.instances) {
    nlohmann::ordered_json row;
    row["strategy"] = r.strategy;
    row["k"] = r.k;
    row["gamma"] = r.gamma;
    row["instance"] = r.instance;
    row["output"] = r.output;
    row["score"] = r.score;
    row["score_calls"] = r.score_calls;
    row["pops"] = r.pops;
    row["peak_active"] = r.peak_active;
    row["terminated_early"] = r.terminated_early;
    doc["instances"].push_back(std::move(row));
  }
  return doc.dump(2) + "\n";
}

}  // namespace beamdec
