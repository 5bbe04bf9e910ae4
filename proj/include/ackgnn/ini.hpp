#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "ackgnn/graph.hpp"

namespace ackgnn::ini {

using graph::VertexId;

/// Which adjacency the push walks along.
enum class PushDirection { kForward, kReverse, kSymmetric };

std::string_view to_string(PushDirection d);
/// "forward", "reverse" or "symmetric".
PushDirection parse_push_direction(std::string_view s);

struct PprParams {
  double alpha = 0.15;
  double epsilon = 1e-4;
  std::uint64_t max_pushes = 10'000'000;
  PushDirection direction = PushDirection::kForward;
  /// Re-check sum(p) + sum(r) == 1 after every push. O(pushes * touched).
  bool check_conservation = false;

  void validate() const;
};

struct ScoredVertex {
  VertexId vertex;
  double score;
  friend bool operator==(const ScoredVertex&, const ScoredVertex&) = default;
};

struct PprResult {
  /// Nonzero estimates, ascending by vertex id.
  std::vector<ScoredVertex> estimates;
  /// Nonzero residuals at termination, ascending by vertex id.
  std::vector<ScoredVertex> residuals;
  std::uint64_t pushes = 0;
  bool converged = true;

  double estimate(VertexId v) const;
  double residual(VertexId v) const;
};

/// Degree of `v` along the walk direction.
std::size_t push_degree(const graph::CsrGraph& g, VertexId v, PushDirection dir);

/// Approximate personalized PageRank from `target` by local push.
///
/// A vertex u is pushed while r(u) >= epsilon * deg(u). Pushing moves
/// alpha * r(u) into the estimate and spreads the rest uniformly over the
/// neighbours of u. A vertex without neighbours sends the non-retained mass
/// back to the target; for such vertices the threshold uses deg = 1 so the
/// push loop terminates.
///
/// Vertices are pushed in FIFO order of activation, which makes the result
/// a deterministic function of the inputs.
PprResult ppr_local_push(const graph::CsrGraph& g, VertexId target, const PprParams& params = {});

/// Top-n vertices by score, excluding `target`. Ties go to the smaller id.
/// Returns fewer than n ids if fewer vertices have positive score.
std::vector<VertexId> select_important(std::span<const ScoredVertex> scores, VertexId target,
                                       std::size_t n);

struct LocalEdge {
  std::uint32_t src;
  std::uint32_t dst;
  float weight;
  friend bool operator==(const LocalEdge&, const LocalEdge&) = default;
};

/// Width of one ⟨src, dst, weight⟩ edge record: three 32-bit fields.
inline constexpr std::size_t kEdgeRecordBits = 96;

struct InducedSubgraph {
  static constexpr std::uint32_t kTargetLocalId = 0;
  /// global_ids[local] for local = 0..N; the target is local 0.
  std::vector<VertexId> global_ids;
  /// Ordered by local source id, then host adjacency order.
  std::vector<LocalEdge> local_edges;
  graph::FeatureMatrix input_features;

  std::size_t num_vertices() const noexcept { return global_ids.size(); }
  std::size_t num_edges() const noexcept { return local_edges.size(); }
};

/// Vertex-induced subgraph on {target} + neighbors. Local ids follow the
/// order target, neighbors[0], neighbors[1], ...
InducedSubgraph induce_subgraph(const graph::CsrGraph& g, const graph::FeatureMatrix& features,
                                VertexId target, std::span<const VertexId> neighbors);

/// INI for one target: local push, top-N selection and induction.
InducedSubgraph build_receptive_field(const graph::CsrGraph& g, const graph::FeatureMatrix& features,
                                      VertexId target, std::size_t n, const PprParams& params = {});

}  // namespace ackgnn::ini
