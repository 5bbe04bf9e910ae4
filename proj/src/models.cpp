#include "ackgnn/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <fmt/format.h>

#include "ackgnn/error.hpp"

namespace ackgnn::models {

std::string_view to_string(ModelKind k) {
  switch (k) {
    case ModelKind::kGcn:
      return "gcn";
    case ModelKind::kSage:
      return "sage";
    case ModelKind::kGat:
      return "gat";
  }
  return "?";
}

std::string_view to_string(Aggregator a) {
  switch (a) {
    case Aggregator::kSum:
      return "sum";
    case Aggregator::kMean:
      return "mean";
    case Aggregator::kMax:
      return "max";
    case Aggregator::kGcnNorm:
      return "gcn-norm";
  }
  return "?";
}

std::string_view to_string(ReadoutKind r) { return r == ReadoutKind::kMax ? "max" : "target-row"; }

std::string to_string(const Activation& a) {
  switch (a.kind) {
    case Activation::Kind::kRelu:
      return "relu";
    case Activation::Kind::kLeakyRelu:
      return fmt::format("leaky_relu:{}", a.slope);
    case Activation::Kind::kIdentity:
      break;
  }
  return "identity";
}

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

}  // namespace

ModelKind parse_model_kind(std::string_view s) {
  auto v = lower(s);
  if (v == "gcn") return ModelKind::kGcn;
  if (v == "sage" || v == "graphsage") return ModelKind::kSage;
  if (v == "gat") return ModelKind::kGat;
  throw ConfigError(fmt::format("unknown model kind '{}'", s));
}

Aggregator parse_aggregator(std::string_view s) {
  auto v = lower(s);
  if (v == "sum") return Aggregator::kSum;
  if (v == "mean") return Aggregator::kMean;
  if (v == "max") return Aggregator::kMax;
  if (v == "gcn-norm" || v == "gcn_norm") return Aggregator::kGcnNorm;
  throw ConfigError(fmt::format("unknown aggregator '{}'", s));
}

ReadoutKind parse_readout(std::string_view s) {
  auto v = lower(s);
  if (v == "max") return ReadoutKind::kMax;
  if (v == "target-row" || v == "target_row" || v == "target") return ReadoutKind::kTargetRow;
  throw ConfigError(fmt::format("unknown readout '{}'", s));
}

Activation parse_activation(std::string_view s) {
  auto v = lower(s);
  if (v == "relu") return Activation::relu();
  if (v == "identity" || v == "none") return Activation::identity();
  if (v.starts_with("leaky_relu") || v.starts_with("leakyrelu")) {
    float slope = 0.01f;
    if (auto colon = v.find(':'); colon != std::string::npos) {
      try {
        slope = std::stof(v.substr(colon + 1));
      } catch (const std::exception&) {
        throw ConfigError(fmt::format("bad leaky_relu slope in '{}'", s));
      }
    }
    return Activation::leaky_relu(slope);
  }
  throw ConfigError(fmt::format("unknown activation '{}'", s));
}

Aggregator default_aggregator(ModelKind kind) {
  switch (kind) {
    case ModelKind::kGcn:
      return Aggregator::kGcnNorm;
    case ModelKind::kSage:
      return Aggregator::kMean;
    case ModelKind::kGat:
      return Aggregator::kSum;
  }
  return Aggregator::kSum;
}

void GnnModelSpec::validate() const {
  if (layers.empty()) throw ConfigError("model needs at least one layer");
  if (dims.size() != layers.size() + 1) {
    throw ConfigError(fmt::format("{} dims given for {} layers", dims.size(), layers.size()));
  }
  if (receptive_field < 1) throw ConfigError("receptive field N must be >= 1");
  for (auto f : dims) {
    if (f < 1) throw ConfigError("every layer dimension must be >= 1");
  }
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto in = dims[l];
    const auto out = dims[l + 1];
    const auto expect_in = kind == ModelKind::kSage ? 2 * in : in;
    const auto& lw = layers[l];
    if (lw.weight.rows() != out || lw.weight.cols() != expect_in) {
      throw DimensionError(fmt::format("layer {} weight is {}x{}, expected {}x{}", l + 1, lw.weight.rows(),
                                       lw.weight.cols(), out, expect_in));
    }
    if (kind == ModelKind::kGat) {
      if (lw.att_weight.rows() != out || lw.att_weight.cols() != in) {
        throw DimensionError(fmt::format("layer {} attention weight is {}x{}, expected {}x{}", l + 1,
                                         lw.att_weight.rows(), lw.att_weight.cols(), out, in));
      }
      if (lw.att_vector.size() != 2 * out) {
        throw DimensionError(fmt::format("layer {} attention vector has {} entries, expected {}", l + 1,
                                         lw.att_vector.size(), 2 * out));
      }
    }
  }
}

GnnModelSpec make_random_model(ModelKind kind, std::vector<std::size_t> dims, std::size_t receptive_field,
                               std::uint64_t seed) {
  if (dims.size() < 2) throw ConfigError("model needs at least one layer");
  GnnModelSpec spec;
  spec.kind = kind;
  spec.receptive_field = receptive_field;
  spec.dims = std::move(dims);
  spec.aggregator = default_aggregator(kind);
  std::mt19937_64 rng(seed);
  auto glorot = [&](std::size_t rows, std::size_t cols) {
    const float bound = std::sqrt(6.0f / static_cast<float>(rows + cols));
    std::uniform_real_distribution<float> dist(-bound, bound);
    FeatureMatrix m(rows, cols);
    for (auto& x : m.data()) x = dist(rng);
    return m;
  };
  for (std::size_t l = 0; l + 1 < spec.dims.size(); ++l) {
    const auto in = spec.dims[l];
    const auto out = spec.dims[l + 1];
    LayerWeights lw;
    lw.weight = glorot(out, kind == ModelKind::kSage ? 2 * in : in);
    if (kind == ModelKind::kGat) {
      lw.att_weight = glorot(out, in);
      auto a = glorot(1, 2 * out);
      lw.att_vector.assign(a.data().begin(), a.data().end());
    }
    spec.layers.push_back(std::move(lw));
  }
  spec.validate();
  return spec;
}

namespace {

void check_rows(const InducedSubgraph& sub, const FeatureMatrix& h) {
  if (h.rows() != sub.num_vertices()) {
    throw DimensionError(
        fmt::format("feature matrix has {} rows, subgraph has {} vertices", h.rows(), sub.num_vertices()));
  }
}

std::vector<std::size_t> in_degrees(const InducedSubgraph& sub) {
  std::vector<std::size_t> deg(sub.num_vertices(), 0);
  for (const auto& e : sub.local_edges) ++deg[e.dst];
  return deg;
}

}  // namespace

std::vector<float> host_edge_weights(const InducedSubgraph& sub) {
  std::vector<float> w;
  w.reserve(sub.num_edges());
  for (const auto& e : sub.local_edges) w.push_back(e.weight);
  return w;
}

FeatureMatrix feature_aggregate(const InducedSubgraph& sub, const FeatureMatrix& h, Aggregator agg,
                                std::span<const float> edge_weights) {
  check_rows(sub, h);
  if (edge_weights.size() != sub.num_edges()) {
    throw DimensionError(
        fmt::format("{} edge weights for {} edges", edge_weights.size(), sub.num_edges()));
  }
  const auto n = h.rows();
  const auto f = h.cols();
  const float init = agg == Aggregator::kMax ? -std::numeric_limits<float>::infinity() : 0.0f;
  FeatureMatrix z(n, f, init);
  auto deg = in_degrees(sub);

  for (std::size_t k = 0; k < sub.num_edges(); ++k) {
    const auto& e = sub.local_edges[k];
    float w = edge_weights[k];
    if (agg == Aggregator::kGcnNorm) {
      w /= std::sqrt(static_cast<float>(deg[e.src] + 1) * static_cast<float>(deg[e.dst] + 1));
    }
    auto src = h.row(e.src);
    auto dst = z.row(e.dst);
    if (agg == Aggregator::kMax) {
      for (std::size_t c = 0; c < f; ++c) dst[c] = std::max(dst[c], w * src[c]);
    } else {
      for (std::size_t c = 0; c < f; ++c) dst[c] += w * src[c];
    }
  }

  if (agg == Aggregator::kGcnNorm) {
    for (std::size_t v = 0; v < n; ++v) {
      const float self = 1.0f / static_cast<float>(deg[v] + 1);
      auto src = h.row(v);
      auto dst = z.row(v);
      for (std::size_t c = 0; c < f; ++c) dst[c] += self * src[c];
    }
  } else if (agg == Aggregator::kMean || agg == Aggregator::kMax) {
    for (std::size_t v = 0; v < n; ++v) {
      auto dst = z.row(v);
      if (deg[v] == 0) {
        auto own = h.row(v);
        std::copy(own.begin(), own.end(), dst.begin());
      } else if (agg == Aggregator::kMean) {
        const float inv = 1.0f / static_cast<float>(deg[v]);
        for (auto& x : dst) x *= inv;
      }
    }
  }
  return z;
}

FeatureMatrix feature_transform(const FeatureMatrix& z, const FeatureMatrix& w, Activation act) {
  if (z.cols() != w.cols()) {
    throw DimensionError(fmt::format("cannot multiply {}x{} by ({}x{})^T", z.rows(), z.cols(), w.rows(), w.cols()));
  }
  FeatureMatrix out(z.rows(), w.rows());
  for (std::size_t i = 0; i < z.rows(); ++i) {
    auto zi = z.row(i);
    auto oi = out.row(i);
    for (std::size_t j = 0; j < w.rows(); ++j) {
      auto wj = w.row(j);
      float acc = 0.0f;
      for (std::size_t k = 0; k < zi.size(); ++k) acc += zi[k] * wj[k];
      oi[j] = act(acc);
    }
  }
  return out;
}

FeatureMatrix concat_columns(const FeatureMatrix& a, const FeatureMatrix& b) {
  if (a.rows() != b.rows()) throw DimensionError("concat_columns: row counts differ");
  FeatureMatrix out(a.rows(), a.cols() + b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto o = out.row(i);
    auto ar = a.row(i);
    auto br = b.row(i);
    std::copy(ar.begin(), ar.end(), o.begin());
    std::copy(br.begin(), br.end(), o.begin() + static_cast<std::ptrdiff_t>(a.cols()));
  }
  return out;
}

std::vector<float> gat_edge_scores(const InducedSubgraph& sub, const FeatureMatrix& projected,
                                   std::span<const float> att_vector, float slope) {
  check_rows(sub, projected);
  const auto f = projected.cols();
  if (att_vector.size() != 2 * f) {
    throw DimensionError(fmt::format("attention vector has {} entries, expected {}", att_vector.size(), 2 * f));
  }
  const auto leaky = Activation::leaky_relu(slope);
  std::vector<float> scores;
  scores.reserve(sub.num_edges());
  for (const auto& e : sub.local_edges) {
    auto hs = projected.row(e.src);
    auto hd = projected.row(e.dst);
    float s = 0.0f;
    for (std::size_t c = 0; c < f; ++c) s += att_vector[c] * hs[c];
    for (std::size_t c = 0; c < f; ++c) s += att_vector[f + c] * hd[c];
    scores.push_back(leaky(s));
  }
  return scores;
}

std::vector<float> softmax_by_destination(const InducedSubgraph& sub, std::span<const float> scores) {
  if (scores.size() != sub.num_edges()) throw DimensionError("one score per edge required");
  const auto n = sub.num_vertices();
  std::vector<float> peak(n, -std::numeric_limits<float>::infinity());
  for (std::size_t k = 0; k < scores.size(); ++k) {
    auto d = sub.local_edges[k].dst;
    peak[d] = std::max(peak[d], scores[k]);
  }
  std::vector<float> out(scores.size());
  std::vector<float> denom(n, 0.0f);
  for (std::size_t k = 0; k < scores.size(); ++k) {
    auto d = sub.local_edges[k].dst;
    out[k] = std::exp(scores[k] - peak[d]);
    denom[d] += out[k];
  }
  for (std::size_t k = 0; k < scores.size(); ++k) out[k] /= denom[sub.local_edges[k].dst];
  return out;
}

std::vector<float> gat_edge_weights(const InducedSubgraph& sub, const FeatureMatrix& h,
                                    const FeatureMatrix& att_weight, std::span<const float> att_vector,
                                    float slope) {
  auto projected = feature_transform(h, att_weight, Activation::identity());
  auto scores = gat_edge_scores(sub, projected, att_vector, slope);
  return softmax_by_destination(sub, scores);
}

std::vector<float> readout(const FeatureMatrix& h, ReadoutKind kind) {
  if (h.rows() == 0) throw DimensionError("readout of an empty matrix");
  auto first = h.row(0);
  std::vector<float> out(first.begin(), first.end());
  if (kind == ReadoutKind::kTargetRow) return out;
  for (std::size_t i = 1; i < h.rows(); ++i) {
    auto r = h.row(i);
    for (std::size_t c = 0; c < out.size(); ++c) out[c] = std::max(out[c], r[c]);
  }
  return out;
}

FeatureMatrix layer_forward(const InducedSubgraph& sub, const FeatureMatrix& h, const GnnModelSpec& spec,
                            std::size_t layer) {
  const auto& lw = spec.layers.at(layer);
  std::vector<float> weights;
  if (spec.kind == ModelKind::kGat) {
    weights = gat_edge_weights(sub, h, lw.att_weight, lw.att_vector, spec.attention_slope);
  } else {
    weights = host_edge_weights(sub);
  }
  auto z = feature_aggregate(sub, h, spec.aggregator, weights);
  if (spec.kind == ModelKind::kSage) {
    return feature_transform(concat_columns(h, z), lw.weight, spec.activation);
  }
  return feature_transform(z, lw.weight, spec.activation);
}

std::vector<float> forward(const InducedSubgraph& sub, const GnnModelSpec& spec) {
  spec.validate();
  if (sub.input_features.cols() != spec.input_dim()) {
    throw DimensionError(fmt::format("subgraph features have width {}, model expects {}",
                                     sub.input_features.cols(), spec.input_dim()));
  }
  FeatureMatrix h = sub.input_features;
  for (std::size_t l = 0; l < spec.num_layers(); ++l) h = layer_forward(sub, h, spec, l);
  return readout(h, spec.readout);
}

}  // namespace ackgnn::models
