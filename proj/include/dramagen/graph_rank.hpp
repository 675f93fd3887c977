#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace dramagen {

/// Dense symmetric edge-weight matrix; weight 0 means no edge.
class WeightedGraph {
 public:
  explicit WeightedGraph(std::size_t n = 0) : n_(n), w_(n * n, 0.0) {}

  std::size_t size() const noexcept { return n_; }
  double weight(std::size_t i, std::size_t j) const { return w_[i * n_ + j]; }
  void set_edge(std::size_t i, std::size_t j, double w) {
    w_[i * n_ + j] = w;
    w_[j * n_ + i] = w;
  }
  void add_edge(std::size_t i, std::size_t j, double w) { set_edge(i, j, weight(i, j) + w); }
  double out_weight(std::size_t i) const {
    double s = 0;
    for (std::size_t j = 0; j < n_; ++j) s += w_[i * n_ + j];
    return s;
  }

 private:
  std::size_t n_;
  std::vector<double> w_;
};

struct RankOptions {
  double damping = 0.85;
  double tolerance = 1e-6;  // L1 change between rounds
  int max_rounds = 100;
};

/// Weighted PageRank by power iteration. The result sums to 1; mass of nodes
/// without edges is spread uniformly.
inline std::vector<double> rank_graph(const WeightedGraph& g, const RankOptions& opts = {}) {
  const std::size_t n = g.size();
  if (n == 0) return {};
  std::vector<double> out_w(n);
  for (std::size_t i = 0; i < n; ++i) out_w[i] = g.out_weight(i);
  std::vector<double> score(n, 1.0 / static_cast<double>(n)), next(n);
  const double base = (1.0 - opts.damping) / static_cast<double>(n);
  for (int round = 0; round < opts.max_rounds; ++round) {
    double dangling = 0;
    for (std::size_t j = 0; j < n; ++j)
      if (out_w[j] <= 0) dangling += score[j];
    for (std::size_t i = 0; i < n; ++i) {
      double in = 0;
      for (std::size_t j = 0; j < n; ++j) {
        const double w = g.weight(j, i);
        if (w > 0) in += score[j] * w / out_w[j];
      }
      next[i] = base + opts.damping * (in + dangling / static_cast<double>(n));
    }
    double delta = 0;
    for (std::size_t i = 0; i < n; ++i) delta += std::abs(next[i] - score[i]);
    score.swap(next);
    if (delta < opts.tolerance) break;
  }
  return score;
}

}  // namespace dramagen
