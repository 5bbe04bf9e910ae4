#include "ackgnn/graph.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "ackgnn/error.hpp"

namespace ackgnn::graph {

FeatureMatrix::FeatureMatrix(std::size_t rows, std::size_t cols, float fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

FeatureMatrix::FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<float> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw DimensionError(fmt::format("matrix data length {} != {}x{}", data_.size(), rows_, cols_));
  }
}

bool FeatureMatrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](float x) { return std::isfinite(x); });
}

namespace {

// Stable counting sort of edges into CSR rows keyed by `key`.
template <typename KeyFn, typename ValFn>
void build_csr(std::size_t n, std::span<const Edge> edges, KeyFn key, ValFn val,
               std::vector<EdgeIndex>& offsets, std::vector<VertexId>& indices,
               std::vector<float>& weights) {
  offsets.assign(n + 1, 0);
  for (const auto& e : edges) ++offsets[key(e) + 1];
  for (std::size_t v = 0; v < n; ++v) offsets[v + 1] += offsets[v];
  indices.resize(edges.size());
  weights.resize(edges.size());
  std::vector<EdgeIndex> cursor(offsets.begin(), offsets.end() - 1);
  for (const auto& e : edges) {
    auto pos = cursor[key(e)]++;
    indices[pos] = val(e);
    weights[pos] = e.weight;
  }
}

}  // namespace

CsrGraph CsrGraph::from_edges(std::size_t num_vertices, std::span<const Edge> edges) {
  for (const auto& e : edges) {
    if (e.src >= num_vertices || e.dst >= num_vertices) {
      throw DimensionError(
          fmt::format("edge ({}, {}) out of range for {} vertices", e.src, e.dst, num_vertices));
    }
  }
  CsrGraph g;
  g.num_vertices_ = num_vertices;
  build_csr(
      num_vertices, edges, [](const Edge& e) { return e.src; },
      [](const Edge& e) { return e.dst; }, g.row_offsets_, g.col_indices_, g.edge_weights_);
  build_csr(
      num_vertices, edges, [](const Edge& e) { return e.dst; },
      [](const Edge& e) { return e.src; }, g.rev_offsets_, g.rev_indices_, g.rev_weights_);
  return g;
}

std::span<const VertexId> CsrGraph::out_neighbors(VertexId v) const {
  return std::span(col_indices_).subspan(row_offsets_[v], row_offsets_[v + 1] - row_offsets_[v]);
}

std::span<const float> CsrGraph::out_weights(VertexId v) const {
  return std::span(edge_weights_).subspan(row_offsets_[v], row_offsets_[v + 1] - row_offsets_[v]);
}

std::size_t CsrGraph::out_degree(VertexId v) const {
  return row_offsets_[v + 1] - row_offsets_[v];
}

std::span<const VertexId> CsrGraph::in_neighbors(VertexId v) const {
  return std::span(rev_indices_).subspan(rev_offsets_[v], rev_offsets_[v + 1] - rev_offsets_[v]);
}

std::span<const float> CsrGraph::in_weights(VertexId v) const {
  return std::span(rev_weights_).subspan(rev_offsets_[v], rev_offsets_[v + 1] - rev_offsets_[v]);
}

std::size_t CsrGraph::in_degree(VertexId v) const {
  return rev_offsets_[v + 1] - rev_offsets_[v];
}

double CsrGraph::average_degree() const {
  return num_vertices_ ? static_cast<double>(num_edges()) / static_cast<double>(num_vertices_) : 0.0;
}

std::vector<Edge> CsrGraph::edges() const {
  std::vector<Edge> out;
  out.reserve(num_edges());
  for (VertexId u = 0; u < num_vertices_; ++u) {
    for (auto i = row_offsets_[u]; i < row_offsets_[u + 1]; ++i) {
      out.push_back({u, col_indices_[i], edge_weights_[i]});
    }
  }
  return out;
}

// --- edge-list text -------------------------------------------------------

namespace {

struct RawEdge {
  std::uint64_t src, dst;
  float weight;
};

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == ','; }

std::string_view next_token(std::string_view& s) {
  std::size_t i = 0;
  while (i < s.size() && is_space(s[i])) ++i;
  std::size_t j = i;
  while (j < s.size() && !is_space(s[j])) ++j;
  auto tok = s.substr(i, j - i);
  s.remove_prefix(j);
  return tok;
}

template <typename T>
bool parse_number(std::string_view tok, T& out) {
  if (tok.empty()) return false;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc{} && ptr == tok.data() + tok.size();
}

}  // namespace

LoadedGraph parse_edge_list(const std::string& text, const LoadOptions& opts) {
  std::vector<RawEdge> raw;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view rest(line);
    auto first = next_token(rest);
    if (first.empty() || first.front() == '#' || first.front() == '%') continue;
    auto second = next_token(rest);
    auto third = next_token(rest);
    RawEdge e{0, 0, 1.0f};
    if (!parse_number(first, e.src) || !parse_number(second, e.dst)) {
      throw ParseError("expected \"src dst [weight]\"", lineno);
    }
    if (!third.empty() && !parse_number(third, e.weight)) {
      throw ParseError(fmt::format("bad weight '{}'", third), lineno);
    }
    if (!next_token(rest).empty()) throw ParseError("trailing tokens", lineno);
    raw.push_back(e);
  }
  if (raw.empty()) throw ParseError("edge list is empty");

  LoadedGraph out;
  std::size_t n = 0;
  std::vector<std::uint64_t> ids;
  if (opts.compact_ids) {
    ids.reserve(raw.size() * 2);
    for (const auto& e : raw) {
      ids.push_back(e.src);
      ids.push_back(e.dst);
    }
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    n = ids.size();
  } else {
    std::uint64_t max_id = 0;
    for (const auto& e : raw) max_id = std::max({max_id, e.src, e.dst});
    if (max_id >= std::numeric_limits<VertexId>::max()) {
      throw ParseError(fmt::format("vertex id {} exceeds 32-bit range", max_id));
    }
    n = static_cast<std::size_t>(max_id) + 1;
  }
  auto local = [&](std::uint64_t id) -> VertexId {
    if (!opts.compact_ids) return static_cast<VertexId>(id);
    return static_cast<VertexId>(std::lower_bound(ids.begin(), ids.end(), id) - ids.begin());
  };

  std::vector<Edge> edges;
  edges.reserve(opts.directed ? raw.size() : raw.size() * 2);
  for (const auto& e : raw) {
    edges.push_back({local(e.src), local(e.dst), e.weight});
    if (!opts.directed) edges.push_back({local(e.dst), local(e.src), e.weight});
  }
  out.graph = CsrGraph::from_edges(n, edges);
  if (opts.compact_ids) out.original_ids = std::move(ids);
  return out;
}

LoadedGraph load_edge_list(const std::filesystem::path& path, const LoadOptions& opts) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open edge list " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_edge_list(buf.str(), opts);
}

std::string format_edge_list(const CsrGraph& g) {
  std::string out;
  for (const auto& e : g.edges()) {
    fmt::format_to(std::back_inserter(out), "{} {} {}\n", e.src, e.dst, e.weight);
  }
  return out;
}

void write_edge_list(const CsrGraph& g, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  out << format_edge_list(g);
}

void write_id_map(std::span<const std::uint64_t> original_ids, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  for (std::size_t i = 0; i < original_ids.size(); ++i) out << i << ' ' << original_ids[i] << '\n';
}

// --- binary matrices ------------------------------------------------------

namespace {

std::uint64_t read_u64_le(std::istream& in) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) throw FormatError("short read in matrix header");
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

void write_u64_le(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 8);
}

}  // namespace

FeatureMatrix read_matrix(std::istream& in) {
  const auto rows = read_u64_le(in);
  const auto cols = read_u64_le(in);
  constexpr std::uint64_t kMaxElems = std::uint64_t{1} << 34;
  if (cols != 0 && rows > kMaxElems / cols) throw FormatError("matrix header too large");
  std::vector<unsigned char> bytes(rows * cols * 4);
  if (!in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()))) {
    throw FormatError(fmt::format("short read: expected {}x{} float32 values", rows, cols));
  }
  std::vector<float> data(rows * cols);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const unsigned char* p = &bytes[i * 4];
    std::uint32_t bits = std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) |
                         (std::uint32_t(p[2]) << 16) | (std::uint32_t(p[3]) << 24);
    data[i] = std::bit_cast<float>(bits);
  }
  return FeatureMatrix(rows, cols, std::move(data));
}

FeatureMatrix read_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return read_matrix(in);
}

void write_matrix(std::ostream& out, const FeatureMatrix& m) {
  write_u64_le(out, m.rows());
  write_u64_le(out, m.cols());
  std::vector<char> bytes(m.data().size() * 4);
  for (std::size_t i = 0; i < m.data().size(); ++i) {
    auto bits = std::bit_cast<std::uint32_t>(m.data()[i]);
    for (int k = 0; k < 4; ++k) bytes[i * 4 + k] = static_cast<char>((bits >> (8 * k)) & 0xff);
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

void write_matrix(const FeatureMatrix& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  write_matrix(out, m);
}

FeatureMatrix load_features(const std::filesystem::path& path, const CsrGraph& g) {
  auto m = read_matrix(path);
  if (m.rows() != g.num_vertices()) {
    throw DimensionError(
        fmt::format("feature file has {} rows, graph has {} vertices", m.rows(), g.num_vertices()));
  }
  if (!m.all_finite()) throw FormatError("feature file contains non-finite values");
  return m;
}

// --- synthetic data -------------------------------------------------------

CsrGraph synth_graph(std::size_t num_vertices, double avg_degree, std::uint64_t seed) {
  if (num_vertices < 1) throw DimensionError("synth_graph needs at least one vertex");
  if (!(avg_degree >= 0)) throw DimensionError("synth_graph needs avg_degree >= 0");
  std::vector<Edge> edges;
  if (num_vertices == 1) return CsrGraph::from_edges(1, edges);

  const auto n = num_vertices;
  const auto pairs = static_cast<std::size_t>(std::llround(static_cast<double>(n) * avg_degree / 2.0));
  const auto window = std::max<std::size_t>(1, std::min<std::size_t>(n - 1, static_cast<std::size_t>(avg_degree)));
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::uniform_int_distribution<std::size_t> near(1, window);
  std::bernoulli_distribution local(0.5);
  edges.reserve(pairs * 2);
  for (std::size_t i = 0; i < pairs; ++i) {
    auto u = pick(rng);
    std::size_t v;
    if (local(rng)) {
      v = (u + near(rng)) % n;
    } else {
      do v = pick(rng); while (v == u);
    }
    edges.push_back({static_cast<VertexId>(u), static_cast<VertexId>(v), 1.0f});
    edges.push_back({static_cast<VertexId>(v), static_cast<VertexId>(u), 1.0f});
  }
  return CsrGraph::from_edges(n, edges);
}

FeatureMatrix synth_features(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
  FeatureMatrix m(rows, cols);
  for (auto& x : m.data()) x = dist(rng);
  return m;
}

}  // namespace ackgnn::graph
