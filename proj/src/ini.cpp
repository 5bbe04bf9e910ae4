#include "ackgnn/ini.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>

#include "ackgnn/error.hpp"

namespace ackgnn::ini {

std::string_view to_string(PushDirection d) {
  switch (d) {
    case PushDirection::kForward:
      return "forward";
    case PushDirection::kReverse:
      return "reverse";
    case PushDirection::kSymmetric:
      return "symmetric";
  }
  return "?";
}

PushDirection parse_push_direction(std::string_view s) {
  if (s == "forward") return PushDirection::kForward;
  if (s == "reverse") return PushDirection::kReverse;
  if (s == "symmetric") return PushDirection::kSymmetric;
  throw ConfigError(fmt::format("unknown push direction '{}'", s));
}

void PprParams::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError(fmt::format("alpha {} not in (0,1)", alpha));
  if (!(epsilon > 0.0)) throw ConfigError(fmt::format("epsilon {} must be positive", epsilon));
}

namespace {

double lookup(const std::vector<ScoredVertex>& xs, VertexId v) {
  auto it = std::lower_bound(xs.begin(), xs.end(), v,
                             [](const ScoredVertex& s, VertexId id) { return s.vertex < id; });
  return (it != xs.end() && it->vertex == v) ? it->score : 0.0;
}

std::vector<ScoredVertex> to_sorted(const std::unordered_map<VertexId, double>& m) {
  std::vector<ScoredVertex> out;
  out.reserve(m.size());
  for (auto [v, s] : m) {
    if (s != 0.0) out.push_back({v, s});
  }
  std::sort(out.begin(), out.end(),
            [](const ScoredVertex& a, const ScoredVertex& b) { return a.vertex < b.vertex; });
  return out;
}

template <typename Fn>
void for_each_neighbor(const graph::CsrGraph& g, VertexId u, PushDirection dir, Fn&& fn) {
  if (dir != PushDirection::kReverse) {
    for (auto v : g.out_neighbors(u)) fn(v);
  }
  if (dir != PushDirection::kForward) {
    for (auto v : g.in_neighbors(u)) fn(v);
  }
}

}  // namespace

double PprResult::estimate(VertexId v) const { return lookup(estimates, v); }
double PprResult::residual(VertexId v) const { return lookup(residuals, v); }

std::size_t push_degree(const graph::CsrGraph& g, VertexId v, PushDirection dir) {
  switch (dir) {
    case PushDirection::kForward:
      return g.out_degree(v);
    case PushDirection::kReverse:
      return g.in_degree(v);
    case PushDirection::kSymmetric:
      return g.out_degree(v) + g.in_degree(v);
  }
  return 0;
}

PprResult ppr_local_push(const graph::CsrGraph& g, VertexId target, const PprParams& params) {
  params.validate();
  if (target >= g.num_vertices()) {
    throw DimensionError(fmt::format("target {} out of range ({} vertices)", target, g.num_vertices()));
  }
  const double alpha = params.alpha;
  const double eps = params.epsilon;
  const auto dir = params.direction;

  std::unordered_map<VertexId, double> p;
  std::unordered_map<VertexId, double> r;
  std::deque<VertexId> queue;
  std::unordered_set<VertexId> queued;

  auto threshold = [&](VertexId v) {
    return eps * static_cast<double>(std::max<std::size_t>(1, push_degree(g, v, dir)));
  };
  auto activate = [&](VertexId v) {
    if (!queued.contains(v) && r[v] >= threshold(v)) {
      queue.push_back(v);
      queued.insert(v);
    }
  };
  auto check_mass = [&] {
    double total = 0.0;
    for (auto [v, x] : p) total += x;
    for (auto [v, x] : r) total += x;
    if (std::abs(total - 1.0) > 1e-9) {
      throw Error(fmt::format("local push lost mass: sum(p)+sum(r) = {:.17g}", total));
    }
  };

  r[target] = 1.0;
  activate(target);

  PprResult result;
  while (!queue.empty()) {
    const VertexId u = queue.front();
    queue.pop_front();
    queued.erase(u);
    const double ru = r[u];
    if (ru < threshold(u)) continue;
    if (result.pushes >= params.max_pushes) {
      result.converged = false;
      break;
    }
    ++result.pushes;
    p[u] += alpha * ru;
    r[u] = 0.0;
    const double spread = (1.0 - alpha) * ru;
    const auto deg = push_degree(g, u, dir);
    if (deg == 0) {
      r[target] += spread;
      activate(target);
    } else {
      const double share = spread / static_cast<double>(deg);
      for_each_neighbor(g, u, dir, [&](VertexId v) {
        r[v] += share;
        activate(v);
      });
    }
    if (params.check_conservation) check_mass();
  }

  result.estimates = to_sorted(p);
  result.residuals = to_sorted(r);
  return result;
}

std::vector<VertexId> select_important(std::span<const ScoredVertex> scores, VertexId target,
                                       std::size_t n) {
  if (n == 0) throw ConfigError("receptive field size must be at least 1");
  std::vector<ScoredVertex> candidates;
  candidates.reserve(scores.size());
  for (const auto& s : scores) {
    if (s.vertex != target && s.score > 0.0) candidates.push_back(s);
  }
  auto better = [](const ScoredVertex& a, const ScoredVertex& b) {
    return a.score != b.score ? a.score > b.score : a.vertex < b.vertex;
  };
  const auto k = std::min(n, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k),
                    candidates.end(), better);
  std::vector<VertexId> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(candidates[i].vertex);
  return out;
}

InducedSubgraph induce_subgraph(const graph::CsrGraph& g, const graph::FeatureMatrix& features,
                                VertexId target, std::span<const VertexId> neighbors) {
  const auto n = g.num_vertices();
  if (target >= n) throw DimensionError(fmt::format("target {} out of range", target));
  if (features.rows() != n) {
    throw DimensionError(fmt::format("feature rows {} != vertices {}", features.rows(), n));
  }

  InducedSubgraph sub;
  sub.global_ids.reserve(neighbors.size() + 1);
  sub.global_ids.push_back(target);
  std::unordered_map<VertexId, std::uint32_t> local;
  local.emplace(target, 0);
  for (auto v : neighbors) {
    if (v >= n) throw DimensionError(fmt::format("neighbor {} out of range", v));
    if (!local.emplace(v, static_cast<std::uint32_t>(sub.global_ids.size())).second) {
      throw ConfigError(fmt::format("neighbor {} repeated or equal to target", v));
    }
    sub.global_ids.push_back(v);
  }

  for (std::uint32_t ls = 0; ls < sub.global_ids.size(); ++ls) {
    const auto u = sub.global_ids[ls];
    auto nbrs = g.out_neighbors(u);
    auto wts = g.out_weights(u);
    for (std::size_t i = 0; i < nbrs.size(); ++i) {
      if (auto it = local.find(nbrs[i]); it != local.end()) {
        sub.local_edges.push_back({ls, it->second, wts[i]});
      }
    }
  }

  sub.input_features = graph::FeatureMatrix(sub.global_ids.size(), features.cols());
  for (std::size_t i = 0; i < sub.global_ids.size(); ++i) {
    auto src = features.row(sub.global_ids[i]);
    std::copy(src.begin(), src.end(), sub.input_features.row(i).begin());
  }
  return sub;
}

InducedSubgraph build_receptive_field(const graph::CsrGraph& g, const graph::FeatureMatrix& features,
                                      VertexId target, std::size_t n, const PprParams& params) {
  auto ppr = ppr_local_push(g, target, params);
  auto neighbors = select_important(ppr.estimates, target, n);
  return induce_subgraph(g, features, target, neighbors);
}

}  // namespace ackgnn::ini
