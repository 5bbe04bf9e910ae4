#pragma once

// Independent reference computations used by the tests. Everything here is
// written directly from the definitions, in double precision, without
// calling the library code it checks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "ackgnn/graph.hpp"
#include "ackgnn/ini.hpp"
#include "ackgnn/models.hpp"

namespace oracle {

using ackgnn::graph::CsrGraph;
using ackgnn::graph::FeatureMatrix;
using ackgnn::ini::InducedSubgraph;
using Dense = std::vector<std::vector<double>>;

inline Dense to_dense(const FeatureMatrix& m) {
  Dense d(m.rows(), std::vector<double>(m.cols()));
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) d[r][c] = m.at(r, c);
  return d;
}

/// max |a - b| / max(1, max |b|).
inline double rel_error(const Dense& a, const Dense& b) {
  double diff = 0, scale = 1;
  for (std::size_t r = 0; r < b.size(); ++r)
    for (std::size_t c = 0; c < b[r].size(); ++c) {
      diff = std::max(diff, std::abs(a[r][c] - b[r][c]));
      scale = std::max(scale, std::abs(b[r][c]));
    }
  return diff / scale;
}

inline double rel_error(const std::vector<float>& a, const std::vector<double>& b) {
  double diff = 0, scale = 1;
  for (std::size_t i = 0; i < b.size(); ++i) {
    diff = std::max(diff, std::abs(a[i] - b[i]));
    scale = std::max(scale, std::abs(b[i]));
  }
  return diff / scale;
}

/// PPR by power iteration over out-edges: p = alpha e_t + (1 - alpha) P^T p,
/// each out-edge entry taking an equal share and dangling mass returning to
/// the target.
inline std::vector<double> power_iteration_ppr(const CsrGraph& g, std::uint32_t target, double alpha,
                                               int iterations = 200) {
  const auto n = g.num_vertices();
  std::vector<double> p(n, 0.0), next(n);
  p[target] = 1.0;
  for (int it = 0; it < iterations; ++it) {
    std::fill(next.begin(), next.end(), 0.0);
    next[target] += alpha;
    for (std::uint32_t u = 0; u < n; ++u) {
      const auto nbrs = g.out_neighbors(u);
      const double mass = (1 - alpha) * p[u];
      if (nbrs.empty()) {
        next[target] += mass;
        continue;
      }
      for (auto v : nbrs) next[v] += mass / static_cast<double>(nbrs.size());
    }
    p.swap(next);
  }
  return p;
}

/// Indices of the k largest scores excluding `skip`; ties to the lower id.
inline std::vector<std::uint32_t> top_k(const std::vector<double>& scores, std::uint32_t skip, std::size_t k) {
  std::vector<std::uint32_t> ids;
  for (std::uint32_t v = 0; v < scores.size(); ++v)
    if (v != skip && scores[v] > 0) ids.push_back(v);
  std::sort(ids.begin(), ids.end(), [&](auto a, auto b) { return scores[a] != scores[b] ? scores[a] > scores[b] : a < b; });
  if (ids.size() > k) ids.resize(k);
  return ids;
}

/// Dense weighted adjacency A[src][dst] of a subgraph.
inline Dense adjacency(const InducedSubgraph& sub, const std::vector<float>& weights) {
  const auto n = sub.num_vertices();
  Dense a(n, std::vector<double>(n, 0.0));
  for (std::size_t k = 0; k < sub.local_edges.size(); ++k) {
    const auto& e = sub.local_edges[k];
    a[e.src][e.dst] += weights[k];
  }
  return a;
}

inline std::vector<double> in_degree(const InducedSubgraph& sub) {
  std::vector<double> d(sub.num_vertices(), 0.0);
  for (const auto& e : sub.local_edges) d[e.dst] += 1;
  return d;
}

/// Aggregation as dense algebra: sum is A^T H, gcn-norm is
/// D^-1/2 (A + I)^T D^-1/2 H with D = in-degree + 1, mean divides by the
/// in-degree, max scans every in-edge. Rows without in-edges follow the
/// library's documented fallback.
inline Dense aggregate(const InducedSubgraph& sub, const FeatureMatrix& h, ackgnn::models::Aggregator agg,
                       const std::vector<float>& weights) {
  using ackgnn::models::Aggregator;
  const auto n = sub.num_vertices();
  const auto f = h.cols();
  const auto a = adjacency(sub, weights);
  const auto deg = in_degree(sub);
  const auto hd = to_dense(h);
  Dense z(n, std::vector<double>(f, 0.0));
  if (agg == Aggregator::kMax) {
    for (std::size_t j = 0; j < n; ++j) {
      if (deg[j] == 0) {
        z[j] = hd[j];
        continue;
      }
      std::fill(z[j].begin(), z[j].end(), -std::numeric_limits<double>::infinity());
      for (std::size_t k = 0; k < sub.local_edges.size(); ++k) {
        const auto& e = sub.local_edges[k];
        if (e.dst != j) continue;
        for (std::size_t c = 0; c < f; ++c) z[j][c] = std::max(z[j][c], weights[k] * hd[e.src][c]);
      }
    }
    return z;
  }
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      double coef = a[i][j];
      if (agg == Aggregator::kGcnNorm) {
        coef = (coef + (i == j ? 1.0 : 0.0)) / std::sqrt((deg[i] + 1) * (deg[j] + 1));
      }
      if (coef == 0) continue;
      for (std::size_t c = 0; c < f; ++c) z[j][c] += coef * hd[i][c];
    }
    if (agg == Aggregator::kMean) {
      if (deg[j] == 0) {
        z[j] = hd[j];
      } else {
        for (auto& x : z[j]) x /= deg[j];
      }
    }
  }
  return z;
}

/// Triple-loop Z W^T.
inline Dense matmul_t(const Dense& z, const Dense& w) {
  Dense out(z.size(), std::vector<double>(w.size(), 0.0));
  for (std::size_t i = 0; i < z.size(); ++i)
    for (std::size_t j = 0; j < w.size(); ++j)
      for (std::size_t k = 0; k < w[j].size(); ++k) out[i][j] += z[i][k] * w[j][k];
  return out;
}

inline double leaky(double x, double slope) { return x >= 0 ? x : slope * x; }

/// Attention weights from a dense projection and per-destination softmax.
inline std::vector<double> attention(const InducedSubgraph& sub, const FeatureMatrix& h, const FeatureMatrix& w_att,
                                     const std::vector<float>& a, double slope) {
  const auto proj = matmul_t(to_dense(h), to_dense(w_att));
  const auto f = w_att.rows();
  std::vector<double> score(sub.local_edges.size());
  for (std::size_t k = 0; k < score.size(); ++k) {
    const auto& e = sub.local_edges[k];
    double s = 0;
    for (std::size_t c = 0; c < f; ++c) s += a[c] * proj[e.src][c] + a[f + c] * proj[e.dst][c];
    score[k] = leaky(s, slope);
  }
  std::vector<double> out(score.size());
  for (std::size_t j = 0; j < sub.num_vertices(); ++j) {
    double mx = -std::numeric_limits<double>::infinity(), sum = 0;
    for (std::size_t k = 0; k < score.size(); ++k)
      if (sub.local_edges[k].dst == j) mx = std::max(mx, score[k]);
    for (std::size_t k = 0; k < score.size(); ++k)
      if (sub.local_edges[k].dst == j) sum += std::exp(score[k] - mx);
    for (std::size_t k = 0; k < score.size(); ++k)
      if (sub.local_edges[k].dst == j) out[k] = std::exp(score[k] - mx) / sum;
  }
  return out;
}

/// Random subgraph with `n` vertices, each ordered pair present with
/// probability `density`, weights in [0.5, 1.5) and features in [-1, 1).
inline InducedSubgraph random_subgraph(std::size_t n, std::size_t f, double density, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  InducedSubgraph sub;
  for (std::size_t i = 0; i < n; ++i) sub.global_ids.push_back(static_cast<std::uint32_t>(i));
  for (std::uint32_t s = 0; s < n; ++s)
    for (std::uint32_t d = 0; d < n; ++d)
      if (s != d && u(rng) < density) sub.local_edges.push_back({s, d, static_cast<float>(0.5 + u(rng))});
  sub.input_features = FeatureMatrix(n, f);
  for (auto& x : sub.input_features.data()) x = static_cast<float>(2 * u(rng) - 1);
  return sub;
}

}  // namespace oracle
