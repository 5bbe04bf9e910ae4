#include "ackgnn/ack.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "ackgnn/error.hpp"

namespace ackgnn::ack {

namespace {

Cycles ceil_div(std::uint64_t a, std::uint64_t b) { return (a + b - 1) / b; }

std::vector<float> edge_weights_of(const InducedSubgraph& sub) {
  std::vector<float> w;
  w.reserve(sub.num_edges());
  for (const auto& e : sub.local_edges) w.push_back(e.weight);
  return w;
}

}  // namespace

void AcceleratorConfig::validate() const {
  if (p_sys < 2 || !std::has_single_bit(p_sys)) {
    throw ConfigError(fmt::format("p_sys = {} must be a power of two >= 2", p_sys));
  }
  if (alu_dsps < 1) throw ConfigError("alu_dsps must be >= 1");
  if (num_pes < 1) throw ConfigError("num_pes must be >= 1");
  if (!(clock_hz > 0)) throw ConfigError("clock_hz must be positive");
  if (buffer_capacity_words < 1) throw ConfigError("buffer_capacity_words must be >= 1");
  if (mode_switch_cycles != 1) throw ConfigError("mode switches cost exactly one cycle");
}

std::string_view to_string(JobKind k) {
  switch (k) {
    case JobKind::kFtMatmul:
      return "FT-matmul";
    case JobKind::kFaScatterGather:
      return "FA-scatter-gather";
    case JobKind::kAttScore:
      return "ATT-score";
    case JobKind::kActivation:
      return "activation";
    case JobKind::kReadout:
      return "readout";
  }
  return "?";
}

Engine engine_of(JobKind k) {
  switch (k) {
    case JobKind::kFtMatmul:
      return Engine::kSystolic;
    case JobKind::kActivation:
      return Engine::kActivationUnit;
    case JobKind::kFaScatterGather:
    case JobKind::kAttScore:
    case JobKind::kReadout:
      break;
  }
  return Engine::kScatterGather;
}

Cycles PeTrace::total_cycles() const {
  Cycles t = mode_switches();
  for (const auto& j : jobs) t += j.duration();
  return t;
}

Cycles PeTrace::stall_cycles() const {
  Cycles s = 0;
  for (const auto& j : jobs) s += j.stall_cycles;
  return s;
}

std::uint32_t PeTrace::mode_switches() const {
  std::uint32_t s = 0;
  for (const auto& j : jobs) s += j.mode_switches;
  return s;
}

std::vector<Cycles> PeTrace::cycles_by_kind() const {
  std::vector<Cycles> out(5, 0);
  for (const auto& j : jobs) out[static_cast<std::size_t>(j.kind)] += j.duration();
  return out;
}

std::string PeTrace::to_csv() const {
  std::string out = "kind,label,layer,start_cycle,end_cycle,stall_cycles,mode_switches\n";
  for (const auto& j : jobs) {
    fmt::format_to(std::back_inserter(out), "{},{},{},{},{},{},{}\n", to_string(j.kind), j.label, j.layer,
                   j.start, j.end, j.stall_cycles, j.mode_switches);
  }
  return out;
}

Cycles systolic_cycles(std::size_t m, std::size_t k, std::size_t f, const AcceleratorConfig& cfg) {
  if (m < 1 || k < 1 || f < 1) throw DimensionError("systolic job needs M, K, F >= 1");
  const auto p = cfg.p_sys;
  return ceil_div(m, p) * ceil_div(f, p) * k + 2 * p;
}

std::size_t gather_bank(std::uint32_t v, std::size_t num_vertices, const AcceleratorConfig& cfg) {
  const auto bank_rows = std::max<std::size_t>(1, ceil_div(num_vertices, cfg.p_sg()));
  return std::min<std::size_t>(v / bank_rows, cfg.p_sg() - 1);
}

namespace {

Cycles stream_end(std::span<const StreamEdge> stream, std::size_t num_vertices, Cycles per_update,
                  const AcceleratorConfig& cfg, bool track_raw) {
  const auto units = cfg.p_sg();
  constexpr Cycles kNever = std::numeric_limits<Cycles>::max();
  std::vector<Cycles> scatter_free(units, 0);
  std::vector<Cycles> gather_free(units, 0);
  std::vector<Cycles> last_write(track_raw ? num_vertices : 0, kNever);
  Cycles finish = 0;
  for (std::size_t k = 0; k < stream.size(); ++k) {
    const auto& e = stream[k];
    const auto s = k % units;
    const auto g = gather_bank(e.dst, num_vertices, cfg);
    Cycles start = std::max(scatter_free[s], gather_free[g]);
    if (track_raw && last_write[e.dst] != kNever) start = std::max(start, last_write[e.dst] + cfg.raw_pipeline_depth);
    const Cycles end = start + per_update;
    scatter_free[s] = end;
    gather_free[g] = end;
    if (track_raw) last_write[e.dst] = end;
    finish = std::max(finish, end);
  }
  return finish;
}

}  // namespace

ScatterGatherTiming scatter_gather_timing(std::span<const StreamEdge> stream, std::size_t num_vertices,
                                          std::size_t f, const AcceleratorConfig& cfg) {
  ScatterGatherTiming t;
  if (stream.empty()) return t;
  for (const auto& e : stream) {
    if (e.src >= num_vertices || e.dst >= num_vertices) throw DimensionError("stream edge outside the subgraph");
  }
  const Cycles per_update = ceil_div(f, cfg.unit_width());
  const Cycles ideal = ceil_div(stream.size(), cfg.p_sg()) * per_update;
  const Cycles routed_only = stream_end(stream, num_vertices, per_update, cfg, false);
  t.cycles = stream_end(stream, num_vertices, per_update, cfg, true);
  t.conflict_cycles = routed_only - ideal;
  t.raw_stall_cycles = t.cycles - routed_only;
  return t;
}

ScatterGatherTiming simulate_scatter_gather(const InducedSubgraph& sub, std::size_t f,
                                            const AcceleratorConfig& cfg) {
  cfg.validate();
  const auto words = sub.num_vertices() * f;
  if (words > cfg.buffer_capacity_words) {
    throw CapacityError(fmt::format("{} x {} features need {} words, buffer holds {}", sub.num_vertices(), f,
                                    words, cfg.buffer_capacity_words));
  }
  std::vector<StreamEdge> stream;
  stream.reserve(sub.num_edges());
  for (const auto& e : sub.local_edges) stream.push_back({e.src, e.dst});
  return scatter_gather_timing(stream, sub.num_vertices(), f, cfg);
}

// --- PE simulator ---------------------------------------------------------

PeSimulator::PeSimulator(AcceleratorConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

JobRecord& PeSimulator::begin_job(JobKind kind, std::string label, std::size_t layer) {
  JobRecord job{kind, std::move(label), layer};
  const auto engine = engine_of(kind);
  if (engine != Engine::kActivationUnit) {
    const auto want = engine == Engine::kSystolic ? AckMode::kSystolic : AckMode::kScatterGather;
    if (want != mode_) {
      mode_ = want;
      now_ += cfg_.mode_switch_cycles;
      ++job.mode_switches;
    }
  }
  job.start = now_;
  trace_.jobs.push_back(std::move(job));
  return trace_.jobs.back();
}

void PeSimulator::finish_job(JobRecord& job, Cycles busy) {
  now_ += busy;
  job.end = now_;
}

void PeSimulator::return_to_scatter_gather() {
  if (mode_ == AckMode::kScatterGather) return;
  mode_ = AckMode::kScatterGather;
  now_ += cfg_.mode_switch_cycles;
  ++trace_.jobs.back().mode_switches;
}

void PeSimulator::check_capacity(std::size_t rows, std::size_t cols, std::string_view what) const {
  const auto words = rows * cols;
  if (words > cfg_.buffer_capacity_words) {
    throw CapacityError(fmt::format("{}: {} x {} needs {} words, buffer holds {}", what, rows, cols, words,
                                    cfg_.buffer_capacity_words));
  }
}

FeatureMatrix PeSimulator::aggregate(const InducedSubgraph& sub, const FeatureMatrix& h, models::Aggregator agg,
                                     std::span<const float> weights, std::size_t layer) {
  using models::Aggregator;
  const auto nv = sub.num_vertices();
  const auto f = h.cols();
  check_capacity(nv, f, "feature aggregation");

  // Edge stream as the Edge Buffer would hold it: subgraph edges, then one
  // virtual self-loop per vertex for gcn-norm.
  std::vector<StreamEdge> stream;
  std::vector<float> coef;
  stream.reserve(sub.num_edges() + nv);
  coef.reserve(sub.num_edges() + nv);
  std::vector<std::uint32_t> in_deg(nv, 0);
  for (const auto& e : sub.local_edges) ++in_deg[e.dst];
  for (std::size_t k = 0; k < sub.num_edges(); ++k) {
    const auto& e = sub.local_edges[k];
    stream.push_back({e.src, e.dst});
    if (agg == Aggregator::kGcnNorm) {
      coef.push_back(weights[k] / std::sqrt(static_cast<float>(in_deg[e.src] + 1) *
                                          static_cast<float>(in_deg[e.dst] + 1)));
    } else {
      coef.push_back(weights[k]);
    }
  }
  if (agg == Aggregator::kGcnNorm) {
    for (std::uint32_t v = 0; v < nv; ++v) {
      stream.push_back({v, v});
      coef.push_back(1.0f / static_cast<float>(in_deg[v] + 1));
    }
  }

  auto& job = begin_job(JobKind::kFaScatterGather, "FA", layer);
  auto timing = scatter_gather_timing(stream, nv, f, cfg_);
  Cycles busy = timing.cycles;

  // Scatter: coef * h[src]; gather: accumulate into the destination bank.
  const bool is_max = agg == Aggregator::kMax;
  FeatureMatrix z(nv, f, is_max ? -std::numeric_limits<float>::infinity() : 0.0f);
  for (std::size_t k = 0; k < stream.size(); ++k) {
    auto src = h.row(stream[k].src);
    auto acc = z.row(stream[k].dst);
    const float w = coef[k];
    if (is_max) {
      for (std::size_t c = 0; c < f; ++c) acc[c] = std::max(acc[c], w * src[c]);
    } else {
      for (std::size_t c = 0; c < f; ++c) acc[c] += w * src[c];
    }
  }
  if (agg == Aggregator::kMean || is_max) {
    // Each gather unit finalizes the rows of its own bank.
    busy += ceil_div(nv, cfg_.p_sg()) * ceil_div(f, cfg_.unit_width());
    for (std::size_t v = 0; v < nv; ++v) {
      auto row = z.row(v);
      if (in_deg[v] == 0) {
        auto own = h.row(v);
        std::copy(own.begin(), own.end(), row.begin());
      } else if (agg == Aggregator::kMean) {
        const float inv = 1.0f / static_cast<float>(in_deg[v]);
        for (auto& x : row) x *= inv;
      }
    }
  }
  job.stall_cycles = timing.stall_cycles();
  job.useful_ops = static_cast<std::uint64_t>(stream.size()) * f;
  finish_job(job, busy);
  return z;
}

FeatureMatrix PeSimulator::matmul(const FeatureMatrix& a, const FeatureMatrix& w, std::string label,
                                  std::size_t layer) {
  check_capacity(a.rows(), std::max(a.cols(), w.rows()), label);
  auto& job = begin_job(JobKind::kFtMatmul, std::move(label), layer);
  auto out = models::feature_transform(a, w, models::Activation::identity());
  job.useful_ops = static_cast<std::uint64_t>(a.rows()) * a.cols() * w.rows();
  finish_job(job, systolic_cycles(a.rows(), a.cols(), w.rows(), cfg_));
  return out;
}

void PeSimulator::activate(FeatureMatrix& m, models::Activation act, std::size_t layer) {
  auto& job = begin_job(JobKind::kActivation, "act", layer);
  for (auto& x : m.data()) x = act(x);
  job.useful_ops = m.data().size();
  finish_job(job, ceil_div(m.data().size(), cfg_.p_sys));
}

std::vector<float> PeSimulator::attention(const InducedSubgraph& sub, const FeatureMatrix& projected,
                                          std::span<const float> att_vector, float slope, std::size_t layer) {
  const auto f = projected.cols();
  const auto ne = sub.num_edges();
  if (att_vector.size() != 2 * f) throw DimensionError("attention vector must have 2*f entries");

  // Per-edge dot products streamed through the scatter units; scores are
  // staged in the Edge Buffer, so no gather bank is involved.
  auto& score_job = begin_job(JobKind::kAttScore, "ATT", layer);
  std::vector<float> scores(ne);
  for (std::size_t k = 0; k < ne; ++k) {
    const auto& e = sub.local_edges[k];
    auto hs = projected.row(e.src);
    auto hd = projected.row(e.dst);
    float s = 0.0f;
    for (std::size_t c = 0; c < f; ++c) s += att_vector[c] * hs[c];
    for (std::size_t c = 0; c < f; ++c) s += att_vector[f + c] * hd[c];
    scores[k] = s > 0.0f ? s : slope * s;
  }
  score_job.useful_ops = static_cast<std::uint64_t>(ne) * 2 * f;
  finish_job(score_job, ne ? ceil_div(ne, cfg_.p_sg()) * ceil_div(2 * f, cfg_.unit_width()) : 0);

  // Softmax on the Activation Unit: one pass for max and exp-sum, one to
  // normalize.
  auto& sm_job = begin_job(JobKind::kActivation, "softmax", layer);
  const auto nv = sub.num_vertices();
  std::vector<float> peak(nv, -std::numeric_limits<float>::infinity());
  std::vector<float> denom(nv, 0.0f);
  for (std::size_t k = 0; k < ne; ++k) {
    auto d = sub.local_edges[k].dst;
    peak[d] = std::max(peak[d], scores[k]);
  }
  for (std::size_t k = 0; k < ne; ++k) {
    auto d = sub.local_edges[k].dst;
    scores[k] = std::exp(scores[k] - peak[d]);
    denom[d] += scores[k];
  }
  for (std::size_t k = 0; k < ne; ++k) scores[k] /= denom[sub.local_edges[k].dst];
  sm_job.useful_ops = ne;
  finish_job(sm_job, 2 * ceil_div(ne, cfg_.p_sys));
  return scores;
}

FeatureMatrix PeSimulator::run_layer(const InducedSubgraph& sub, const FeatureMatrix& h,
                                     const models::GnnModelSpec& spec, std::size_t layer) {
  using models::ModelKind;
  if (h.rows() != sub.num_vertices()) throw DimensionError("layer input rows must match subgraph vertices");
  const auto& lw = spec.layers.at(layer);
  const auto tag = layer + 1;
  FeatureMatrix out;
  switch (spec.kind) {
    case ModelKind::kGcn: {
      auto weights = edge_weights_of(sub);
      auto z = aggregate(sub, h, spec.aggregator, weights, tag);
      out = matmul(z, lw.weight, "W", tag);
      break;
    }
    case ModelKind::kSage: {
      auto weights = edge_weights_of(sub);
      auto z = aggregate(sub, h, spec.aggregator, weights, tag);
      out = matmul(models::concat_columns(h, z), lw.weight, "W", tag);
      break;
    }
    case ModelKind::kGat: {
      auto projected = matmul(h, lw.att_weight, "W_att", tag);
      auto weights = attention(sub, projected, lw.att_vector, spec.attention_slope, tag);
      auto z = aggregate(sub, h, spec.aggregator, weights, tag);
      out = matmul(z, lw.weight, "W", tag);
      break;
    }
  }
  activate(out, spec.activation, tag);
  return_to_scatter_gather();
  return out;
}

std::vector<float> PeSimulator::run_readout(const FeatureMatrix& h, models::ReadoutKind kind) {
  if (h.rows() == 0) throw DimensionError("readout of an empty matrix");
  auto& job = begin_job(JobKind::kReadout, models::to_string(kind) == "max" ? "max" : "target-row", 0);
  const auto f = h.cols();
  auto first = h.row(0);
  std::vector<float> out(first.begin(), first.end());
  Cycles busy = ceil_div(f, cfg_.unit_width());
  if (kind == models::ReadoutKind::kMax) {
    for (std::size_t i = 1; i < h.rows(); ++i) {
      auto r = h.row(i);
      for (std::size_t c = 0; c < f; ++c) out[c] = std::max(out[c], r[c]);
    }
    busy = ceil_div(h.rows(), cfg_.p_sg()) * ceil_div(f, cfg_.unit_width());
    job.useful_ops = h.data().size();
  }
  finish_job(job, busy);
  return out;
}

PeResult run_pe(const InducedSubgraph& sub, const models::GnnModelSpec& spec, const AcceleratorConfig& cfg) {
  spec.validate();
  if (sub.input_features.cols() != spec.input_dim()) {
    throw DimensionError(fmt::format("subgraph features have width {}, model expects {}",
                                     sub.input_features.cols(), spec.input_dim()));
  }
  PeSimulator pe(cfg);
  FeatureMatrix h = sub.input_features;
  for (std::size_t l = 0; l < spec.num_layers(); ++l) h = pe.run_layer(sub, h, spec, l);
  PeResult result;
  result.embedding = pe.run_readout(h, spec.readout);
  result.trace = pe.trace();
  return result;
}

double trace_seconds(const PeTrace& trace, const AcceleratorConfig& cfg) {
  return static_cast<double>(trace.total_cycles()) / cfg.clock_hz;
}

}  // namespace ackgnn::ack
