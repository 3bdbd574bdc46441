#pragma once

// Independent reference implementations used to cross-check the library.
// They are written from the defining formulas, favour clarity over speed and
// share no code with the production paths they check.

#include <cstddef>
#include <string>
#include <vector>

#include "s2p/metrics.hpp"

namespace s2p::testing {

struct RefSample {
  std::string id;
  std::vector<float> embedding;
};

/// Greedy maximal marginal relevance evaluated from scratch every round:
/// score(s) = lambda * cos(s, q) - (1 - lambda) * max_{c picked} cos(s, c),
/// the second term 0 before the first pick; equal scores go to the smaller id.
/// Returns pool indices in pick order.
std::vector<std::size_t> brute_force_mmr(const std::vector<double>& query, const std::vector<RefSample>& pool,
                                         std::size_t k, double lambda);

/// Indices of the k samples most similar to the query (ties: smaller id).
std::vector<std::size_t> top_k_cosine(const std::vector<double>& query, const std::vector<RefSample>& pool,
                                      std::size_t k);

/// Metric definitions restated on plain data.
double naive_ts(const std::vector<EpisodeResult>& results, bool set_match = false);
int naive_d(const std::vector<EpisodeResult>& results);
double naive_sr(const std::vector<EpisodeResult>& results);
double naive_spl(const std::vector<EpisodeResult>& results);

}  // namespace s2p::testing
