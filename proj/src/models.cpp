#include "beamdec/models.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

namespace beamdec {

namespace {

constexpr const char* kEosSurface = "<eos>";
constexpr const char* kBosSurface = "<bos>";
constexpr double kProbFloor = 1e-12;

void validate_row(const Eigen::VectorXd& row, int expected_size) {
  if (row.size() != expected_size)
    throw ConfigError("model row has wrong arity");
  if ((row.array() <= 0.0).any())
    throw ConfigError("model row has a non-positive probability");
  if (std::abs(row.sum() - 1.0) > 1e-9)
    throw ConfigError("model row does not sum to one");
}

Eigen::VectorXd normalized(Eigen::VectorXd row) {
  row = row.array().max(kProbFloor);
  row /= row.sum();
  return row;
}

}  // namespace

double log_sum_exp(const Eigen::VectorXd& v) {
  const double m = v.maxCoeff();
  return m + std::log((v.array() - m).exp().sum());
}

// ---------------------------------------------------------------------------
// TableModel

TableModel::TableModel(Vocabulary vocab, int order, std::map<std::string, ContextTable> tables,
                       bool input_keyed, bool backoff_to_uniform)
    : vocab_(std::move(vocab)),
      order_(order),
      tables_(std::move(tables)),
      input_keyed_(input_keyed),
      backoff_to_uniform_(backoff_to_uniform) {
  if (order_ < 0) throw ConfigError("TableModel: order must be >= 0");
  if (tables_.empty()) throw ConfigError("TableModel: no context tables");
  const int c = vocab_.candidate_count();
  for (auto& [key, table] : tables_) {
    if (table.empty()) throw ConfigError("TableModel: empty context table");
    ContextTable logs;
    for (auto& [ctx, row] : table) {
      if (static_cast<int>(ctx.size()) != order_)
        throw ConfigError("TableModel: context length does not match order");
      validate_row(row, c);
      logs.emplace(ctx, row.array().log().matrix());
    }
    log_tables_.emplace(key, std::move(logs));
  }
  uniform_log_ = Eigen::VectorXd::Constant(c, -std::log(static_cast<double>(c)));
}

TokenSeq TableModel::context_of(const TokenSeq& prefix) const {
  TokenSeq ctx;
  ctx.reserve(static_cast<std::size_t>(order_));
  const int have = static_cast<int>(prefix.size());
  for (int i = order_; i > 0; --i) {
    const int pos = have - i;
    ctx.push_back(pos >= 0 ? prefix[static_cast<std::size_t>(pos)] : vocab_.bos());
  }
  return ctx;
}

std::string TableModel::input_key(const DecoderInput& input) {
  std::string key;
  for (std::size_t i = 0; i < input.x.size(); ++i) {
    if (i) key += ' ';
    key += std::to_string(input.x[i]);
  }
  return key;
}

Eigen::VectorXd TableModel::step_logprob(const DecoderInput& input, const TokenSeq& prefix) const {
  if (prefix.empty() || prefix.front() != vocab_.bos())
    throw std::logic_error("step_logprob: prefix must begin with BOS");
  const std::string key = input_keyed_ ? input_key(input) : std::string();
  const auto table = log_tables_.find(key);
  if (table == log_tables_.end())
    throw ModelCoverageError("TableModel: no table for input key '" + key + "'");
  const TokenSeq ctx = context_of(prefix);
  const auto row = table->second.find(ctx);
  if (row == table->second.end()) {
    if (backoff_to_uniform_) return uniform_log_;
    throw ModelCoverageError("TableModel: no entry for context");
  }
  return row->second;
}

// ---------------------------------------------------------------------------
// Model file format

TableModel load_table_model(const std::string& text, std::vector<std::string>* warnings) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> vocab_surfaces;
  int order = -1;
  std::vector<std::pair<std::vector<std::string>, std::vector<double>>> raw_rows;

  auto strip = [](std::string s) {
    const auto hash = s.find('#');
    if (hash != std::string::npos) s.erase(hash);
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
  };

  while (std::getline(in, line)) {
    line = strip(line);
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string head;
    ls >> head;
    if (head == "vocab:") {
      std::string tok;
      while (ls >> tok) vocab_surfaces.push_back(tok);
    } else if (head == "order:") {
      if (!(ls >> order) || order < 0) throw ConfigError("model file: bad order line");
    } else if (head == "ctx") {
      std::vector<std::string> ctx;
      std::string tok;
      bool saw_bar = false;
      while (ls >> tok) {
        if (tok == "|") {
          saw_bar = true;
          break;
        }
        ctx.push_back(tok);
      }
      if (!saw_bar) throw ConfigError("model file: ctx row missing '|'");
      std::vector<double> probs;
      double p;
      while (ls >> p) probs.push_back(p);
      if (!ls.eof()) throw ConfigError("model file: non-numeric probability");
      raw_rows.emplace_back(std::move(ctx), std::move(probs));
    } else {
      throw ConfigError("model file: unrecognized line: " + line);
    }
  }

  if (vocab_surfaces.empty()) throw ConfigError("model file: empty vocabulary section");
  if (order < 0) throw ConfigError("model file: missing order line");
  if (raw_rows.empty()) throw ConfigError("model file: no ctx rows");
  for (const auto& s : vocab_surfaces)
    if (s == kBosSurface) throw ConfigError("model file: vocab must not list <bos>");
  if (std::find(vocab_surfaces.begin(), vocab_surfaces.end(), kEosSurface) ==
      vocab_surfaces.end())
    throw ConfigError("model file: vocab must list <eos>");

  std::vector<std::string> tokens = vocab_surfaces;
  tokens.push_back(kBosSurface);
  const auto eos_it = std::find(tokens.begin(), tokens.end(), kEosSurface);
  Vocabulary vocab(tokens, static_cast<TokenId>(tokens.size() - 1),
                   static_cast<TokenId>(eos_it - tokens.begin()));

  TableModel::ContextTable table;
  const int c = vocab.candidate_count();
  for (auto& [ctx_surfaces, probs] : raw_rows) {
    if (static_cast<int>(ctx_surfaces.size()) != order)
      throw ConfigError("model file: ctx arity does not match order");
    TokenSeq ctx;
    for (const auto& s : ctx_surfaces) {
      const auto id = vocab.id(s);
      if (!id) throw ConfigError("model file: unknown context token: " + s);
      ctx.push_back(*id);
    }
    if (static_cast<int>(probs.size()) != c)
      throw ConfigError("model file: row has " + std::to_string(probs.size()) +
                        " probabilities, expected " + std::to_string(c));
    Eigen::VectorXd row(c);
    for (int i = 0; i < c; ++i) {
      if (probs[static_cast<std::size_t>(i)] <= 0.0)
        throw ConfigError("model file: zero or negative probability");
      row[i] = probs[static_cast<std::size_t>(i)];
    }
    const double sum = row.sum();
    if (std::abs(sum - 1.0) > 1e-6)
      throw ConfigError("model file: row sums to " + std::to_string(sum));
    if (warnings && std::abs(sum - 1.0) > 1e-9)
      warnings->push_back("renormalized a row with sum drift " + std::to_string(sum - 1.0));
    if (!table.emplace(std::move(ctx), normalized(std::move(row))).second)
      throw ConfigError("model file: duplicate context row");
  }

  std::map<std::string, TableModel::ContextTable> tables;
  tables.emplace(std::string(), std::move(table));
  return TableModel(std::move(vocab), order, std::move(tables), /*input_keyed=*/false);
}

// ---------------------------------------------------------------------------
// Random models

TableModel random_model(std::uint64_t seed, int vocab_size, int order) {
  if (vocab_size < 2) throw ConfigError("random_model: vocab_size must be >= 2");
  if (order < 0) throw ConfigError("random_model: order must be >= 0");

  std::vector<std::string> tokens;
  const int regulars = vocab_size - 1;
  for (int i = 0; i < regulars; ++i) {
    std::string name = "t";
    name += std::to_string(i);
    tokens.push_back(std::move(name));
  }
  tokens.push_back(kEosSurface);
  tokens.push_back(kBosSurface);
  Vocabulary vocab(tokens, static_cast<TokenId>(tokens.size() - 1),
                   static_cast<TokenId>(regulars));

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(std::nextafter(0.0, 1.0), 1.0);
  const int c = vocab.candidate_count();
  auto draw_row = [&] {
    // Symmetric Dirichlet via normalized exponentials.
    Eigen::VectorXd row(c);
    for (int i = 0; i < c; ++i) row[i] = -std::log(unit(rng));
    return normalized(std::move(row));
  };

  // Contexts are suffixes of BOS-padded regular-token strings:
  // BOS^(order-j) followed by every regular string of length j.
  TableModel::ContextTable table;
  for (int j = 0; j <= order; ++j) {
    TokenSeq ctx(static_cast<std::size_t>(order));
    for (int i = 0; i < order - j; ++i) ctx[static_cast<std::size_t>(i)] = vocab.bos();
    std::vector<int> digits(static_cast<std::size_t>(j), 0);
    for (;;) {
      for (int i = 0; i < j; ++i)
        ctx[static_cast<std::size_t>(order - j + i)] =
            static_cast<TokenId>(digits[static_cast<std::size_t>(i)]);
      table.emplace(ctx, draw_row());
      int pos = j - 1;
      while (pos >= 0 && ++digits[static_cast<std::size_t>(pos)] == regulars) {
        digits[static_cast<std::size_t>(pos)] = 0;
        --pos;
      }
      if (pos < 0) break;
    }
    if (j == 0 && order == 0) break;  // single empty context
  }

  std::map<std::string, TableModel::ContextTable> tables;
  tables.emplace(std::string(), std::move(table));
  return TableModel(std::move(vocab), order, std::move(tables), /*input_keyed=*/false);
}

// ---------------------------------------------------------------------------
// NgramLm

NgramLm::NgramLm(Vocabulary vocab, int order, double alpha)
    : vocab_(std::move(vocab)), order_(order), alpha_(alpha) {
  if (order_ < 1) throw ConfigError("NgramLm: order must be >= 1");
  if (alpha_ <= 0.0) throw ConfigError("NgramLm: alpha must be > 0");
  const int c = vocab_.candidate_count();
  unseen_log_ = Eigen::VectorXd::Constant(c, -std::log(static_cast<double>(c)));
}

TokenSeq NgramLm::context_of(const TokenSeq& prefix) const {
  const int m = order_ - 1;
  TokenSeq ctx;
  ctx.reserve(static_cast<std::size_t>(m));
  const int have = static_cast<int>(prefix.size());
  for (int i = m; i > 0; --i) {
    const int pos = have - i;
    ctx.push_back(pos >= 0 ? prefix[static_cast<std::size_t>(pos)] : vocab_.bos());
  }
  return ctx;
}

void NgramLm::add_sequence(const TokenSeq& seq) {
  TokenSeq tokens;
  tokens.reserve(seq.size() + 2);
  tokens.push_back(vocab_.bos());
  tokens.insert(tokens.end(), seq.begin(), seq.end());
  tokens.push_back(vocab_.eos());
  const int c = vocab_.candidate_count();
  for (std::size_t i = 1; i < tokens.size(); ++i) {
    const TokenSeq prefix(tokens.begin(), tokens.begin() + static_cast<std::ptrdiff_t>(i));
    auto& row = counts_.try_emplace(context_of(prefix), static_cast<std::size_t>(c), 0).first->second;
    ++row[static_cast<std::size_t>(tokens[i])];
  }
}

void NgramLm::finalize() {
  const int c = vocab_.candidate_count();
  for (const auto& [ctx, row] : counts_) {
    std::int64_t total = 0;
    for (auto v : row) total += v;
    const double denom = static_cast<double>(total) + alpha_ * c;
    Eigen::VectorXd logs(c);
    for (int i = 0; i < c; ++i)
      logs[i] = std::log((static_cast<double>(row[static_cast<std::size_t>(i)]) + alpha_) / denom);
    log_rows_.emplace(ctx, std::move(logs));
  }
}

Eigen::VectorXd NgramLm::step(const TokenSeq& prefix) const {
  const auto it = log_rows_.find(context_of(prefix));
  return it == log_rows_.end() ? unseen_log_ : it->second;
}

Eigen::VectorXd NgramLm::step_logprob(const DecoderInput&, const TokenSeq& prefix) const {
  if (prefix.empty() || prefix.front() != vocab_.bos())
    throw std::logic_error("step_logprob: prefix must begin with BOS");
  return step(prefix);
}

std::int64_t NgramLm::context_count(const TokenSeq& ctx, TokenId t) const {
  const auto it = counts_.find(ctx);
  if (it == counts_.end()) return 0;
  return it->second[static_cast<std::size_t>(t)];
}

std::int64_t NgramLm::context_total(const TokenSeq& ctx) const {
  const auto it = counts_.find(ctx);
  if (it == counts_.end()) return 0;
  std::int64_t total = 0;
  for (auto v : it->second) total += v;
  return total;
}

NgramLm train_ngram(const std::vector<std::vector<std::string>>& corpus, int order, double alpha,
                    const Vocabulary* vocab) {
  if (corpus.empty()) throw ConfigError("train_ngram: empty corpus");
  for (const auto& line : corpus)
    for (const auto& s : line)
      if (s == kBosSurface || s == kEosSurface)
        throw ConfigError("train_ngram: corpus must not contain reserved markers");

  std::unique_ptr<Vocabulary> derived;
  if (!vocab) {
    std::set<std::string> surfaces;
    for (const auto& line : corpus)
      for (const auto& s : line) surfaces.insert(s);
    if (surfaces.empty()) throw ConfigError("train_ngram: corpus has no tokens");
    std::vector<std::string> tokens(surfaces.begin(), surfaces.end());
    tokens.push_back(kEosSurface);
    tokens.push_back(kBosSurface);
    derived = std::make_unique<Vocabulary>(tokens, static_cast<TokenId>(tokens.size() - 1),
                                           static_cast<TokenId>(tokens.size() - 2));
    vocab = derived.get();
  }

  NgramLm lm(*vocab, order, alpha);
  for (const auto& line : corpus) lm.add_sequence(tokenize(line, *vocab));
  lm.finalize();
  return lm;
}

std::vector<std::vector<std::string>> parse_corpus(const std::string& text) {
  std::vector<std::vector<std::string>> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::vector<std::string> tokens;
    std::string tok;
    while (ls >> tok) tokens.push_back(tok);
    if (!tokens.empty()) out.push_back(std::move(tokens));
  }
  return out;
}

TokenSeq tokenize(const std::vector<std::string>& surfaces, const Vocabulary& vocab) {
  TokenSeq out;
  out.reserve(surfaces.size());
  for (const auto& s : surfaces) {
    const auto id = vocab.id(s);
    if (!id) throw ConfigError("unknown token: " + s);
    out.push_back(*id);
  }
  return out;
}

}  // namespace beamdec
