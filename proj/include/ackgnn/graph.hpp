#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace ackgnn::graph {

using VertexId = std::uint32_t;
using EdgeIndex = std::uint64_t;

/// Dense row-major float32 matrix. Used for vertex features, layer
/// activations and weight matrices alike.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, std::size_t cols, float fill = 0.0f);
  FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<float> data);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  std::span<float> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const float> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  float& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  float at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<const float> data() const noexcept { return data_; }
  std::span<float> data() noexcept { return data_; }

  bool all_finite() const;

  friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<float> data_;
};

struct Edge {
  VertexId src;
  VertexId dst;
  float weight = 1.0f;
  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Immutable directed graph in CSR form. The reverse (in-edge) view is built
/// at construction and shares edge weights with the forward view.
class CsrGraph {
 public:
  CsrGraph() = default;

  /// Builds both views from an edge list. Edge order within a row follows
  /// the input order (stable counting sort), duplicates and self-loops kept.
  static CsrGraph from_edges(std::size_t num_vertices, std::span<const Edge> edges);

  std::size_t num_vertices() const noexcept { return num_vertices_; }
  std::size_t num_edges() const noexcept { return col_indices_.size(); }

  std::span<const EdgeIndex> row_offsets() const noexcept { return row_offsets_; }
  std::span<const VertexId> col_indices() const noexcept { return col_indices_; }
  std::span<const float> edge_weights() const noexcept { return edge_weights_; }

  std::span<const VertexId> out_neighbors(VertexId v) const;
  std::span<const float> out_weights(VertexId v) const;
  std::size_t out_degree(VertexId v) const;

  std::span<const VertexId> in_neighbors(VertexId v) const;
  std::span<const float> in_weights(VertexId v) const;
  std::size_t in_degree(VertexId v) const;

  double average_degree() const;

  /// All edges in forward CSR order.
  std::vector<Edge> edges() const;

 private:
  std::size_t num_vertices_ = 0;
  std::vector<EdgeIndex> row_offsets_{0};
  std::vector<VertexId> col_indices_;
  std::vector<float> edge_weights_;
  std::vector<EdgeIndex> rev_offsets_{0};
  std::vector<VertexId> rev_indices_;
  std::vector<float> rev_weights_;
};

struct LoadOptions {
  bool directed = false;
  /// Relabel the ids that occur in the file to 0..k-1, ascending.
  bool compact_ids = false;
};

struct LoadedGraph {
  CsrGraph graph;
  /// original_ids[local] = id in the file. Empty unless compact_ids was set.
  std::vector<std::uint64_t> original_ids;
};

/// Parses lines "src dst [weight]". Blank lines and lines starting with '#'
/// or '%' are skipped.
LoadedGraph load_edge_list(const std::filesystem::path& path, const LoadOptions& opts = {});
LoadedGraph parse_edge_list(const std::string& text, const LoadOptions& opts = {});

/// Writes every forward edge as "src dst weight".
void write_edge_list(const CsrGraph& g, const std::filesystem::path& path);
std::string format_edge_list(const CsrGraph& g);

void write_id_map(std::span<const std::uint64_t> original_ids, const std::filesystem::path& path);

/// Binary layout: u64 rows, u64 cols (little-endian), then rows*cols
/// little-endian float32 values, row-major.
FeatureMatrix load_features(const std::filesystem::path& path, const CsrGraph& g);
FeatureMatrix read_matrix(std::istream& in);
FeatureMatrix read_matrix(const std::filesystem::path& path);
void write_matrix(std::ostream& out, const FeatureMatrix& m);
void write_matrix(const FeatureMatrix& m, const std::filesystem::path& path);

/// Symmetric random graph with a ring-local component, no self-loops.
/// Average out-degree equals 2*round(n*avg_degree/2)/n.
CsrGraph synth_graph(std::size_t num_vertices, double avg_degree, std::uint64_t seed);

/// Uniform [-1, 1) features, deterministic in seed.
FeatureMatrix synth_features(std::size_t rows, std::size_t cols, std::uint64_t seed);

}  // namespace ackgnn::graph
