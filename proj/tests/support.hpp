#pragma once

#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "beamdec/core.hpp"
#include "beamdec/models.hpp"

namespace testsupport {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE_MESSAGE(static_cast<bool>(in), "cannot open ", path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string data_path(const std::string& name) {
  return std::string(TESTDATA_DIR) + "/" + name;
}

/// Random decode instance used across the differential suites.
struct RandomInstance {
  beamdec::TableModel model;
  beamdec::DecoderInput input;
  int k;
};

inline RandomInstance random_instance(std::uint64_t seed, int vocab_lo = 3, int vocab_hi = 8,
                                      int nmax_lo = 4, int nmax_hi = 12) {
  std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ull + 1);
  std::uniform_int_distribution<int> vocab_dist(vocab_lo, vocab_hi);
  std::uniform_int_distribution<int> order_dist(0, 2);
  std::uniform_int_distribution<int> nmax_dist(nmax_lo, nmax_hi);
  std::uniform_int_distribution<int> len_dist(2, 6);
  const int vocab_size = vocab_dist(rng);
  beamdec::TableModel model = beamdec::random_model(seed, vocab_size, order_dist(rng));
  std::uniform_int_distribution<beamdec::TokenId> tok_dist(
      0, static_cast<beamdec::TokenId>(model.vocab().regular_count() - 1));
  beamdec::TokenSeq x(static_cast<std::size_t>(len_dist(rng)));
  for (auto& t : x) t = tok_dist(rng);
  const int ks[] = {1, 2, 3, 5};
  std::uniform_int_distribution<int> k_dist(0, 3);
  const int k = ks[k_dist(rng)];
  return RandomInstance{std::move(model), beamdec::DecoderInput(std::move(x), nmax_dist(rng)), k};
}

}  // namespace testsupport
