#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "beamdec/bench.hpp"

namespace {

int run_bench_command(const beamdec::BenchConfig& config, const std::string& out_path) {
  const beamdec::BenchReport report = beamdec::run_bench(config);
  const std::string text = beamdec::emit_report(report, config.format);
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw beamdec::ConfigError("cannot write to " + out_path);
    out << text;
  }
  for (const auto& [label, rate] : report.oracle_match)
    std::cerr << "oracle_match " << label << " " << rate << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Agenda-based sequence decoding benchmark harness"};
  app.require_subcommand(1);
  app.set_config("--config")->configurable(false);

  auto* bench = app.add_subcommand("bench", "Decode instances under several strategies and report "
                                            "score-call counts and search-error rates");

  std::string model_path, random_spec, corpus_path, adapter_spec = "logprob";
  std::vector<std::string> strategy_specs;
  std::string n_max_spec, format = "tsv", out_path;
  bool with_oracle = false;
  std::int64_t oracle_budget = 200000;
  int lm_order = 2;
  double lm_alpha = 0.1;

  bench->add_option("--model", model_path, "Table model file");
  bench->add_option("--random", random_spec, "Random models: seed,count,vocab,order");
  bench->add_option("--corpus", corpus_path,
                    "Corpus file: inputs (one per line) and PMI language-model training data");
  bench->add_option("--adapter", adapter_spec, "logprob | ln:beta,mode[,r] | pmi:lambda,eps");
  bench->add_option("--strategy", strategy_specs, "name:k[:stop][:gamma]; repeatable")
      ->take_all();
  bench->add_option("--n-max", n_max_spec, "N | ratio:R (default: max(2|x|, 10))");
  bench->add_option("--format", format, "tsv | json")
      ->check(CLI::IsMember({"tsv", "json"}));
  bench->add_option("--out", out_path, "Write the report here instead of stdout");
  bench->add_flag("--oracle", with_oracle,
                  "Also compare each strategy against the exhaustive optimum (rates on stderr)");
  bench->add_option("--oracle-budget", oracle_budget, "Enumeration budget for --oracle");
  bench->add_option("--lm-order", lm_order, "PMI language-model order");
  bench->add_option("--lm-alpha", lm_alpha, "PMI language-model smoothing");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    app.exit(e);
    return 2;
  }

  try {
    beamdec::BenchConfig config;
    if (!model_path.empty()) config.model_path = model_path;
    if (!random_spec.empty()) config.random = beamdec::parse_random_spec(random_spec);
    if (!corpus_path.empty()) config.corpus_path = corpus_path;
    config.adapter = beamdec::parse_adapter_spec(adapter_spec);
    config.adapter.lm_order = lm_order;
    config.adapter.lm_alpha = lm_alpha;
    for (const auto& s : strategy_specs)
      config.strategies.push_back(beamdec::parse_strategy_spec(s));
    if (!n_max_spec.empty()) config.n_max = beamdec::parse_nmax_rule(n_max_spec);
    config.format = format == "json" ? beamdec::ReportFormat::Json : beamdec::ReportFormat::Tsv;
    config.with_oracle = with_oracle;
    config.oracle_budget = oracle_budget;
    return run_bench_command(config, out_path);
  } catch (const beamdec::BudgetExceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const beamdec::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
