#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "s2p/config.hpp"
#include "s2p/embedder.hpp"
#include "s2p/memory_store.hpp"

namespace s2p {

/// Dot product of two unit vectors, clamped to [-1, 1].
double cosine(std::span<const double> a, std::span<const double> b);
double cosine(std::span<const double> a, std::span<const float> b);
double cosine(std::span<const float> a, std::span<const float> b);

struct RankedSample {
  std::size_t index = 0;  // position in the candidate pool
  std::string sample_id;
  double relevance = 0.0;  // cosine to the query
  double mmr_score = 0.0;  // objective value when picked
};

/// Greedy Maximal Marginal Relevance over `pool`:
///   pick argmax_s  lambda * sim(s, q) - (1 - lambda) * max_{c in picked} sim(s, c)
/// The redundancy term is 0 while nothing has been picked. Exact score ties go
/// to the smallest sample id. Returns picks in selection order.
std::vector<RankedSample> mmr_rank(std::span<const double> query,
                                   std::span<const ExperienceSample* const> pool, std::size_t k,
                                   double lambda);

std::vector<ExperienceSample> mmr_select(std::span<const double> query, const MemoryStore& memory,
                                         std::size_t k, double lambda);

using SampleFilter = std::function<bool(const ExperienceSample&)>;

/// Retrieves the in-context demonstrations for a live frame: samples of the
/// same setup that pass `filter`, ranked by MMR with cfg.k_icl and cfg.lambda.
/// Returns min(k_icl, eligible) samples; k_icl == 0 yields an empty context.
std::vector<ExperienceSample> build_context(const Frame& live, const MemoryStore& memory,
                                            const Embedder& embedder, const RunConfig& cfg,
                                            Setup setup, const SampleFilter& filter = {});

/// Pool filter for the scenario experiments: only samples tagged `scenario`;
/// for D, samples recorded in `inference_room` are excluded as well.
SampleFilter scenario_filter(Scenario scenario, std::string inference_room);

}  // namespace s2p
