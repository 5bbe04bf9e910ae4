#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ackgnn/graph.hpp"
#include "ackgnn/ini.hpp"

namespace ackgnn::models {

using graph::FeatureMatrix;
using ini::InducedSubgraph;

enum class ModelKind { kGcn, kSage, kGat };
enum class Aggregator { kSum, kMean, kMax, kGcnNorm };
enum class ReadoutKind { kMax, kTargetRow };

struct Activation {
  enum class Kind { kIdentity, kRelu, kLeakyRelu } kind = Kind::kRelu;
  float slope = 0.01f;

  float operator()(float x) const {
    switch (kind) {
      case Kind::kRelu:
        return x > 0.0f ? x : 0.0f;
      case Kind::kLeakyRelu:
        return x > 0.0f ? x : slope * x;
      case Kind::kIdentity:
        break;
    }
    return x;
  }
  static Activation relu() { return {Kind::kRelu, 0.0f}; }
  static Activation leaky_relu(float slope) { return {Kind::kLeakyRelu, slope}; }
  static Activation identity() { return {Kind::kIdentity, 0.0f}; }
};

std::string_view to_string(ModelKind k);
std::string_view to_string(Aggregator a);
std::string_view to_string(ReadoutKind r);
std::string to_string(const Activation& a);
ModelKind parse_model_kind(std::string_view s);
Aggregator parse_aggregator(std::string_view s);
ReadoutKind parse_readout(std::string_view s);
Activation parse_activation(std::string_view s);

/// Weights of layer l (1-based in the literature, index l-1 here).
///   GCN, GAT: weight is f_l x f_{l-1}
///   SAGE:     weight is f_l x 2*f_{l-1}, applied to [h || z]
///   GAT only: att_weight is f_l x f_{l-1}, att_vector has 2*f_l entries
struct LayerWeights {
  FeatureMatrix weight;
  FeatureMatrix att_weight;
  std::vector<float> att_vector;
};

struct GnnModelSpec {
  ModelKind kind = ModelKind::kGcn;
  std::size_t receptive_field = 64;  // N
  std::vector<std::size_t> dims;     // f_0 .. f_L
  Aggregator aggregator = Aggregator::kGcnNorm;
  Activation activation = Activation::relu();
  ReadoutKind readout = ReadoutKind::kMax;
  float attention_slope = 0.2f;
  std::vector<LayerWeights> layers;

  std::size_t num_layers() const noexcept { return layers.size(); }
  std::size_t input_dim() const { return dims.front(); }
  std::size_t output_dim() const { return dims.back(); }

  /// Shape and invariant checks. Throws ConfigError / DimensionError.
  void validate() const;
};

/// Default aggregator per kind: GCN gcn-norm, SAGE mean, GAT sum.
Aggregator default_aggregator(ModelKind kind);

/// Glorot-uniform weights from a seeded generator.
GnnModelSpec make_random_model(ModelKind kind, std::vector<std::size_t> dims,
                               std::size_t receptive_field, std::uint64_t seed);

/// Host-graph weight of every subgraph edge, in edge order.
std::vector<float> host_edge_weights(const InducedSubgraph& sub);

/// Z[dst] = aggregate over in-edges e=(src,dst) of edge_weights[e] * H[src].
///
/// gcn-norm scales each term by 1/sqrt(D(src) D(dst)), D = in-degree + 1 on
/// the subgraph, and adds the virtual self term H[dst] / D(dst). mean and max
/// fall back to H[dst] for a row with no in-edges; sum leaves it zero.
FeatureMatrix feature_aggregate(const InducedSubgraph& sub, const FeatureMatrix& h, Aggregator agg,
                                std::span<const float> edge_weights);

/// act(Z * W^T).
FeatureMatrix feature_transform(const FeatureMatrix& z, const FeatureMatrix& w, Activation act);

/// [a || b] row-wise.
FeatureMatrix concat_columns(const FeatureMatrix& a, const FeatureMatrix& b);

/// Raw attention logits: leaky_relu(a . (Wh_src || Wh_dst)) per edge.
std::vector<float> gat_edge_scores(const InducedSubgraph& sub, const FeatureMatrix& projected,
                                   std::span<const float> att_vector, float slope);

/// Softmax of scores over the in-edges of each destination.
std::vector<float> softmax_by_destination(const InducedSubgraph& sub, std::span<const float> scores);

/// Attention weights per edge (projection, logits, per-destination softmax).
std::vector<float> gat_edge_weights(const InducedSubgraph& sub, const FeatureMatrix& h,
                                    const FeatureMatrix& att_weight, std::span<const float> att_vector,
                                    float slope);

std::vector<float> readout(const FeatureMatrix& h, ReadoutKind kind);

/// One layer of message passing. `layer` is 0-based.
FeatureMatrix layer_forward(const InducedSubgraph& sub, const FeatureMatrix& h, const GnnModelSpec& spec,
                            std::size_t layer);

/// Full decoupled forward pass: L layers then readout. Output has f_L entries.
std::vector<float> forward(const InducedSubgraph& sub, const GnnModelSpec& spec);

}  // namespace ackgnn::models
