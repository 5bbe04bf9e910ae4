#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "ackgnn/error.hpp"
#include "ackgnn/models.hpp"
#include "oracles.hpp"

using namespace ackgnn;
using namespace ackgnn::models;
using graph::FeatureMatrix;
using ini::InducedSubgraph;

namespace {

InducedSubgraph make_sub(std::size_t n, std::vector<ini::LocalEdge> edges, FeatureMatrix h) {
  InducedSubgraph s;
  for (std::uint32_t i = 0; i < n; ++i) s.global_ids.push_back(i);
  s.local_edges = std::move(edges);
  s.input_features = std::move(h);
  return s;
}

FeatureMatrix identity(std::size_t n) {
  FeatureMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1;
  return m;
}

std::vector<std::vector<double>> dense(const FeatureMatrix& m) { return oracle::to_dense(m); }

}  // namespace

TEST(Aggregate, EmptyEdgeSet) {
  auto h = FeatureMatrix(3, 2, std::vector<float>{1, 2, 3, 4, 5, 6});
  auto sub = make_sub(3, {}, h);
  auto z = feature_aggregate(sub, h, Aggregator::kSum, {});
  EXPECT_EQ(z, FeatureMatrix(3, 2));
  auto g = feature_aggregate(sub, h, Aggregator::kGcnNorm, {});
  EXPECT_EQ(g, h);
  EXPECT_EQ(feature_aggregate(sub, h, Aggregator::kMean, {}), h);
  EXPECT_EQ(feature_aggregate(sub, h, Aggregator::kMax, {}), h);
}

TEST(Aggregate, TwoCycleSwaps) {
  auto h = FeatureMatrix(2, 3, std::vector<float>{1, 2, 3, 4, 5, 6});
  auto sub = make_sub(2, {{0, 1, 1}, {1, 0, 1}}, h);
  std::vector<float> w{1, 1};
  auto z = feature_aggregate(sub, h, Aggregator::kSum, w);
  for (std::size_t c = 0; c < 3; ++c) {
    EXPECT_EQ(z.at(0, c), h.at(1, c));
    EXPECT_EQ(z.at(1, c), h.at(0, c));
  }
}

TEST(Aggregate, MatchesDenseOracle) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const std::size_t n = 20 + seed * 4;
    auto sub = oracle::random_subgraph(n, 12, 0.2, seed);
    auto w = host_edge_weights(sub);
    for (auto agg : {Aggregator::kSum, Aggregator::kMean, Aggregator::kMax, Aggregator::kGcnNorm}) {
      auto z = feature_aggregate(sub, sub.input_features, agg, w);
      auto expect = oracle::aggregate(sub, sub.input_features, agg, w);
      EXPECT_LE(oracle::rel_error(dense(z), expect), 1e-5) << to_string(agg) << " seed " << seed;
    }
  }
}

TEST(Aggregate, WeightCountMismatch) {
  auto h = FeatureMatrix(2, 1);
  auto sub = make_sub(2, {{0, 1, 1}}, h);
  EXPECT_THROW(feature_aggregate(sub, h, Aggregator::kSum, {}), DimensionError);
}

TEST(Transform, IdentityKeepsNonNegativeInput) {
  FeatureMatrix z(3, 4, std::vector<float>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11});
  EXPECT_EQ(feature_transform(z, identity(4), Activation::relu()), z);
}

TEST(Transform, ZeroInputGivesZero) {
  FeatureMatrix z(5, 3);
  auto w = make_random_model(ModelKind::kGcn, {3, 6}, 4, 1).layers[0].weight;
  EXPECT_EQ(feature_transform(z, w, Activation::relu()), FeatureMatrix(5, 6));
}

TEST(Transform, MatchesNaiveProduct) {
  std::mt19937 rng(4);
  std::uniform_real_distribution<float> u(-1, 1);
  FeatureMatrix z(8, 4), w(3, 4);
  for (auto& x : z.data()) x = u(rng);
  for (auto& x : w.data()) x = u(rng);
  auto expect = oracle::matmul_t(dense(z), dense(w));
  auto got = feature_transform(z, w, Activation::relu());
  for (auto& row : expect)
    for (auto& x : row) x = std::max(0.0, x);
  EXPECT_LE(oracle::rel_error(dense(got), expect), 1e-6);

  auto leaky = feature_transform(z, w, Activation::leaky_relu(0.1f));
  auto raw = oracle::matmul_t(dense(z), dense(w));
  for (auto& row : raw)
    for (auto& x : row) x = oracle::leaky(x, 0.1);
  EXPECT_LE(oracle::rel_error(dense(leaky), raw), 1e-6);
}

TEST(Transform, DimensionMismatch) {
  EXPECT_THROW(feature_transform(FeatureMatrix(2, 3), FeatureMatrix(4, 2), Activation::relu()), DimensionError);
}

TEST(Attention, SingleInEdgeGetsWeightOne) {
  auto h = FeatureMatrix(2, 2, std::vector<float>{1, -1, 0.5, 2});
  auto sub = make_sub(2, {{1, 0, 1}}, h);
  auto model = make_random_model(ModelKind::kGat, {2, 3}, 1, 9);
  const auto& lw = model.layers[0];
  auto w = gat_edge_weights(sub, h, lw.att_weight, lw.att_vector, 0.2f);
  ASSERT_EQ(w.size(), 1u);
  EXPECT_FLOAT_EQ(w[0], 1.0f);
}

TEST(Attention, EqualScoresSplitEvenly) {
  auto h = FeatureMatrix(3, 2, std::vector<float>{1, 1, 0.3f, 0.7f, 0.3f, 0.7f});
  auto sub = make_sub(3, {{1, 0, 1}, {2, 0, 1}}, h);
  auto model = make_random_model(ModelKind::kGat, {2, 4}, 2, 3);
  const auto& lw = model.layers[0];
  auto w = gat_edge_weights(sub, h, lw.att_weight, lw.att_vector, 0.2f);
  EXPECT_FLOAT_EQ(w[0], 0.5f);
  EXPECT_FLOAT_EQ(w[1], 0.5f);
}

TEST(Attention, MatchesDenseOracle) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto sub = oracle::random_subgraph(10, 6, 0.35, 50 + seed);
    auto model = make_random_model(ModelKind::kGat, {6, 5}, 9, seed);
    const auto& lw = model.layers[0];
    auto w = gat_edge_weights(sub, sub.input_features, lw.att_weight, lw.att_vector, 0.2f);
    auto expect = oracle::attention(sub, sub.input_features, lw.att_weight, lw.att_vector, 0.2);
    ASSERT_EQ(w.size(), expect.size());
    for (std::size_t k = 0; k < w.size(); ++k) EXPECT_NEAR(w[k], expect[k], 1e-5);

    std::vector<double> per_dst(sub.num_vertices(), 0.0);
    std::vector<int> has_in(sub.num_vertices(), 0);
    for (std::size_t k = 0; k < w.size(); ++k) {
      EXPECT_GE(w[k], 0.0f);
      per_dst[sub.local_edges[k].dst] += w[k];
      has_in[sub.local_edges[k].dst] = 1;
    }
    for (std::size_t v = 0; v < per_dst.size(); ++v)
      if (has_in[v]) EXPECT_NEAR(per_dst[v], 1.0, 1e-6);
  }
}

TEST(Readout, Kinds) {
  FeatureMatrix one(1, 3, std::vector<float>{1, -2, 3});
  EXPECT_EQ(readout(one, ReadoutKind::kMax), (std::vector<float>{1, -2, 3}));
  EXPECT_EQ(readout(one, ReadoutKind::kTargetRow), (std::vector<float>{1, -2, 3}));
  FeatureMatrix two(2, 2, std::vector<float>{1, 5, 3, 2});
  EXPECT_EQ(readout(two, ReadoutKind::kMax), (std::vector<float>{3, 5}));
  EXPECT_EQ(readout(two, ReadoutKind::kTargetRow), (std::vector<float>{1, 5}));
}

TEST(Readout, ColumnMaxOracle) {
  auto sub = oracle::random_subgraph(17, 9, 0.0, 2);
  const auto& h = sub.input_features;
  auto got = readout(h, ReadoutKind::kMax);
  for (std::size_t c = 0; c < h.cols(); ++c) {
    float m = h.at(0, c);
    for (std::size_t r = 1; r < h.rows(); ++r) m = std::max(m, h.at(r, c));
    EXPECT_EQ(got[c], m);
  }
  EXPECT_THROW(readout(FeatureMatrix(), ReadoutKind::kMax), Error);
}

TEST(Forward, GcnSelfLoopIdentityReturnsInput) {
  auto h = FeatureMatrix(1, 3, std::vector<float>{0.5f, 2, 0});
  auto sub = make_sub(1, {{0, 0, 1}}, h);
  GnnModelSpec spec;
  spec.kind = ModelKind::kGcn;
  spec.receptive_field = 1;
  spec.dims = {3, 3};
  spec.layers = {{identity(3), {}, {}}};
  auto out = forward(sub, spec);
  EXPECT_EQ(out, (std::vector<float>{0.5f, 2, 0}));
}

TEST(Forward, TwoLayerSageByHand) {
  // 2-cycle, h = (2, 3), mean aggregation, W1 = [1, -0.5], W2 = [0.5, 1].
  //   layer 1: z = (3, 2), h = relu(2 - 1.5, 3 - 1) = (0.5, 2)
  //   layer 2: z = (2, 0.5), h = relu(0.25 + 2, 1 + 0.5) = (2.25, 1.5)
  auto sub = make_sub(2, {{0, 1, 1}, {1, 0, 1}}, FeatureMatrix(2, 1, std::vector<float>{2, 3}));
  GnnModelSpec spec;
  spec.kind = ModelKind::kSage;
  spec.aggregator = Aggregator::kMean;
  spec.receptive_field = 1;
  spec.dims = {1, 1, 1};
  spec.layers = {{FeatureMatrix(1, 2, std::vector<float>{1, -0.5f}), {}, {}},
                 {FeatureMatrix(1, 2, std::vector<float>{0.5f, 1}), {}, {}}};
  EXPECT_EQ(forward(sub, spec), (std::vector<float>{2.25f}));
  spec.readout = ReadoutKind::kTargetRow;
  EXPECT_EQ(forward(sub, spec), (std::vector<float>{2.25f}));
  auto h1 = layer_forward(sub, sub.input_features, spec, 0);
  EXPECT_EQ(h1, FeatureMatrix(2, 1, std::vector<float>{0.5f, 2}));
}

TEST(Forward, OutputShapeAndFixedRows) {
  for (auto kind : {ModelKind::kGcn, ModelKind::kSage, ModelKind::kGat}) {
    auto sub = oracle::random_subgraph(9, 7, 0.3, 8);
    auto spec = make_random_model(kind, {7, 5, 4}, 8, 1);
    EXPECT_EQ(forward(sub, spec).size(), 4u);
    auto h = sub.input_features;
    for (std::size_t l = 0; l < spec.num_layers(); ++l) {
      h = layer_forward(sub, h, spec, l);
      EXPECT_EQ(h.rows(), sub.num_vertices());
      EXPECT_EQ(h.cols(), spec.dims[l + 1]);
    }
  }
}

TEST(Forward, NeighborPermutationInvariance) {
  for (auto kind : {ModelKind::kGcn, ModelKind::kSage, ModelKind::kGat}) {
    auto sub = oracle::random_subgraph(12, 6, 0.3, 31);
    auto spec = make_random_model(kind, {6, 8, 5}, 11, 2);
    std::vector<std::uint32_t> perm(sub.num_vertices());
    std::iota(perm.begin(), perm.end(), 0u);
    std::mt19937 rng(5);
    std::shuffle(perm.begin() + 1, perm.end(), rng);

    InducedSubgraph p = sub;
    for (std::size_t v = 0; v < perm.size(); ++v) {
      p.global_ids[perm[v]] = sub.global_ids[v];
      auto src = sub.input_features.row(v);
      std::copy(src.begin(), src.end(), p.input_features.row(perm[v]).begin());
    }
    for (auto& e : p.local_edges) {
      e.src = perm[e.src];
      e.dst = perm[e.dst];
    }
    std::stable_sort(p.local_edges.begin(), p.local_edges.end(),
                     [](const auto& a, const auto& b) { return a.src < b.src; });

    auto a = forward(sub, spec);
    auto b = forward(p, spec);
    std::vector<double> bd(b.begin(), b.end());
    EXPECT_LE(oracle::rel_error(a, bd), 1e-6) << to_string(kind);
  }
}

TEST(ModelSpec, ValidationAndParsing) {
  auto spec = make_random_model(ModelKind::kSage, {4, 3}, 4, 0);
  EXPECT_EQ(spec.layers[0].weight.cols(), 8u);
  EXPECT_EQ(spec.aggregator, Aggregator::kMean);
  spec.layers[0].weight = FeatureMatrix(3, 4);
  EXPECT_THROW(spec.validate(), Error);
  EXPECT_THROW(make_random_model(ModelKind::kGcn, {4}, 4, 0), Error);

  auto gat = make_random_model(ModelKind::kGat, {4, 6}, 4, 0);
  EXPECT_EQ(gat.layers[0].att_vector.size(), 12u);
  EXPECT_EQ(gat.layers[0].att_weight.rows(), 6u);

  EXPECT_EQ(parse_model_kind("graphsage"), ModelKind::kSage);
  EXPECT_EQ(parse_aggregator("gcn-norm"), Aggregator::kGcnNorm);
  EXPECT_EQ(parse_readout("target-row"), ReadoutKind::kTargetRow);
  EXPECT_FLOAT_EQ(parse_activation("leaky_relu:0.1").slope, 0.1f);
  EXPECT_THROW(parse_model_kind("gin"), ConfigError);
  EXPECT_EQ(make_random_model(ModelKind::kGcn, {4, 4}, 2, 3).layers[0].weight,
            make_random_model(ModelKind::kGcn, {4, 4}, 2, 3).layers[0].weight);
}
