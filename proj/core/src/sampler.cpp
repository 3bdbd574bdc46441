#include "s2p/sampler.hpp"

#include <algorithm>
#include <limits>

#include "s2p/error.hpp"

namespace s2p {

namespace {

template <typename A, typename B>
double dot(std::span<const A> a, std::span<const B> b) {
  if (a.size() != b.size())
    throw Error(ErrorCode::DimMismatch, std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return std::clamp(s, -1.0, 1.0);
}

}  // namespace

double cosine(std::span<const double> a, std::span<const double> b) { return dot(a, b); }
double cosine(std::span<const double> a, std::span<const float> b) { return dot(a, b); }
double cosine(std::span<const float> a, std::span<const float> b) { return dot(a, b); }

std::vector<RankedSample> mmr_rank(std::span<const double> query,
                                   std::span<const ExperienceSample* const> pool, std::size_t k,
                                   double lambda) {
  if (pool.empty()) throw Error(ErrorCode::EmptyMemory, "");
  if (k > pool.size())
    throw Error(ErrorCode::KTooLarge, std::to_string(k) + " > " + std::to_string(pool.size()));
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw Error(ErrorCode::Range, "lambda");

  const std::size_t n = pool.size();
  std::vector<double> relevance(n);
  for (std::size_t i = 0; i < n; ++i) relevance[i] = cosine(query, std::span<const float>(pool[i]->embedding));

  // Running max similarity of every candidate to the picked set.
  std::vector<double> redundancy(n, 0.0);
  std::vector<bool> picked(n, false);
  std::vector<RankedSample> out;
  out.reserve(k);
  for (std::size_t round = 0; round < k; ++round) {
    std::size_t best = n;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      if (picked[i]) continue;
      const double score = lambda * relevance[i] - (1.0 - lambda) * (round == 0 ? 0.0 : redundancy[i]);
      if (best == n || score > best_score || (score == best_score && pool[i]->id < pool[best]->id)) {
        best = i;
        best_score = score;
      }
    }
    picked[best] = true;
    out.push_back({best, pool[best]->id, relevance[best], best_score});
    const std::span<const float> chosen(pool[best]->embedding);
    for (std::size_t i = 0; i < n; ++i) {
      if (picked[i]) continue;
      const double sim = cosine(std::span<const float>(pool[i]->embedding), chosen);
      redundancy[i] = round == 0 ? sim : std::max(redundancy[i], sim);
    }
  }
  return out;
}

std::vector<ExperienceSample> mmr_select(std::span<const double> query, const MemoryStore& memory,
                                         std::size_t k, double lambda) {
  std::vector<const ExperienceSample*> pool;
  pool.reserve(memory.size());
  for (const auto& s : memory.samples()) pool.push_back(&s);
  std::vector<ExperienceSample> out;
  for (const auto& r : mmr_rank(query, pool, k, lambda)) out.push_back(*pool[r.index]);
  return out;
}

std::vector<ExperienceSample> build_context(const Frame& live, const MemoryStore& memory,
                                            const Embedder& embedder, const RunConfig& cfg,
                                            Setup setup, const SampleFilter& filter) {
  if (cfg.k_icl == 0) return {};
  if (embedder.id() != memory.embedder_id())
    throw Error(ErrorCode::EmbedderMismatch,
                "store embedder '" + memory.embedder_id() + "', live embedder '" + embedder.id() + "'");
  std::vector<const ExperienceSample*> pool;
  for (const auto& s : memory.samples())
    if (s.setup == setup && (!filter || filter(s))) pool.push_back(&s);
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(cfg.k_icl), pool.size());
  if (k == 0) return {};
  const auto query = embedder.embed(live);
  std::vector<ExperienceSample> out;
  out.reserve(k);
  for (const auto& r : mmr_rank(query, pool, k, cfg.lambda)) out.push_back(*pool[r.index]);
  return out;
}

SampleFilter scenario_filter(Scenario scenario, std::string inference_room) {
  return [scenario, room = std::move(inference_room)](const ExperienceSample& s) {
    if (s.scenario != scenario) return false;
    if (scenario == Scenario::D && s.room_id && *s.room_id == room) return false;
    return true;
  };
}

}  // namespace s2p
