#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace s2p::testing {

namespace {

double norm_cos(const std::vector<double>& a, const std::vector<float>& b) {
  double ab = 0.0;
  double aa = 0.0;
  double bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += static_cast<double>(b[i]) * b[i];
  }
  return ab / std::sqrt(aa * bb);
}

double norm_cos(const std::vector<float>& a, const std::vector<float>& b) {
  return norm_cos(std::vector<double>(a.begin(), a.end()), b);
}

}  // namespace

std::vector<std::size_t> brute_force_mmr(const std::vector<double>& query, const std::vector<RefSample>& pool,
                                         std::size_t k, double lambda) {
  std::vector<std::size_t> picked;
  while (picked.size() < k) {
    std::size_t best = pool.size();
    double best_score = 0.0;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (std::find(picked.begin(), picked.end(), i) != picked.end()) continue;
      double redundancy = 0.0;
      for (std::size_t j = 0; j < picked.size(); ++j) {
        const double s = norm_cos(pool[i].embedding, pool[picked[j]].embedding);
        redundancy = j == 0 ? s : std::max(redundancy, s);
      }
      const double score = lambda * norm_cos(query, pool[i].embedding) - (1.0 - lambda) * redundancy;
      const bool better = best == pool.size() || score > best_score ||
                          (score == best_score && pool[i].id < pool[best].id);
      if (better) {
        best = i;
        best_score = score;
      }
    }
    picked.push_back(best);
  }
  return picked;
}

std::vector<std::size_t> top_k_cosine(const std::vector<double>& query, const std::vector<RefSample>& pool,
                                      std::size_t k) {
  std::vector<std::size_t> order(pool.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double ca = norm_cos(query, pool[a].embedding);
    const double cb = norm_cos(query, pool[b].embedding);
    if (ca != cb) return ca > cb;
    return pool[a].id < pool[b].id;
  });
  order.resize(k);
  return order;
}

double naive_ts(const std::vector<EpisodeResult>& results, bool set_match) {
  double total = 0.0;
  for (const auto& r : results) {
    if (!r.safe || r.sequences.empty()) continue;
    double sum = 0.0;
    for (const auto& q : r.sequences) {
      double correct = 0.0;
      if (set_match) {
        std::set<int> g(q.ground_truth.begin(), q.ground_truth.end());
        std::set<int> p(q.predicted.begin(), q.predicted.end());
        for (int id : p) correct += g.count(id);
      } else {
        for (std::size_t j = 0; j < q.predicted.size() && j < q.ground_truth.size(); ++j)
          if (q.predicted[j] == q.ground_truth[j]) correct += 1.0;
      }
      const double longest = static_cast<double>(std::max(q.predicted.size(), q.ground_truth.size()));
      sum += longest == 0.0 ? 0.0 : correct / longest;
    }
    total += sum / static_cast<double>(r.sequences.size());
  }
  return total;
}

int naive_d(const std::vector<EpisodeResult>& results) {
  int d = 0;
  for (const auto& r : results) d += r.dangerous_hit ? 1 : 0;
  return d;
}

double naive_sr(const std::vector<EpisodeResult>& results) {
  double s = 0.0;
  for (const auto& r : results) s += r.success ? 1.0 : 0.0;
  return 100.0 * s / static_cast<double>(results.size());
}

double naive_spl(const std::vector<EpisodeResult>& results) {
  double s = 0.0;
  for (const auto& r : results) {
    if (!r.success) continue;
    const double l = *r.shortest_length;
    const double p = *r.path_length;
    s += l / (p > l ? p : l);
  }
  return 100.0 * s / static_cast<double>(results.size());
}

}  // namespace s2p::testing
