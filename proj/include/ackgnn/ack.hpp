#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ackgnn/graph.hpp"
#include "ackgnn/ini.hpp"
#include "ackgnn/models.hpp"

namespace ackgnn::ack {

using graph::FeatureMatrix;
using ini::InducedSubgraph;
using Cycles = std::uint64_t;

/// Parameters of one generated accelerator. One PE holds a p_sys x p_sys
/// ALU array; in scatter-gather mode it is split into p_sg = p_sys/2 scatter
/// units and p_sg gather units of 2*p_sg ALUs each.
struct AcceleratorConfig {
  std::size_t alu_dsps = 5;  // N_ALU
  std::size_t p_sys = 16;
  std::size_t num_pes = 8;
  double clock_hz = 300e6;
  Cycles raw_pipeline_depth = 8;
  std::size_t buffer_capacity_words = 512 * 1024 / 4;
  Cycles mode_switch_cycles = 1;

  /// Set by DSE when SLRs differ and p_sys was clamped to the minimum.
  bool heterogeneous_slrs = false;
  std::vector<std::size_t> pes_per_slr;

  std::size_t p_sg() const noexcept { return p_sys / 2; }
  /// ALUs per scatter or gather unit.
  std::size_t unit_width() const noexcept { return 2 * p_sg(); }

  /// Throws ConfigError unless p_sys is a power of two >= 2 and the
  /// remaining fields are positive.
  void validate() const;
};

enum class AckMode { kSystolic, kScatterGather };

enum class JobKind { kFtMatmul, kFaScatterGather, kAttScore, kActivation, kReadout };

std::string_view to_string(JobKind k);

/// Which datapath executes a job. Activation jobs run on the Activation Unit
/// and leave the ACK mode unchanged.
enum class Engine { kSystolic, kScatterGather, kActivationUnit };

Engine engine_of(JobKind k);

struct JobRecord {
  JobKind kind;
  std::string label;
  std::size_t layer = 0;  // 1-based; 0 for the readout
  Cycles start = 0;
  Cycles end = 0;
  Cycles stall_cycles = 0;
  /// Mode switches charged to this job: the one right before it starts, and
  /// for the last job of a layer the switch back to scatter-gather after it.
  /// Switch cycles are not part of [start, end).
  std::uint32_t mode_switches = 0;
  /// Useful multiply-accumulates (FT) or element updates (others).
  std::uint64_t useful_ops = 0;

  Cycles duration() const noexcept { return end - start; }
};

struct PeTrace {
  std::vector<JobRecord> jobs;

  /// Sum of job durations plus one cycle per mode switch. Jobs run back to
  /// back, so this is also the end of the PE timeline.
  Cycles total_cycles() const;
  Cycles stall_cycles() const;
  std::uint32_t mode_switches() const;
  /// Cycles per job kind, indexed by static_cast<size_t>(JobKind).
  std::vector<Cycles> cycles_by_kind() const;
  std::string to_csv() const;
};

/// Cycles of an M x K by K x F product on the systolic array: output tiles
/// of p_sys x p_sys stream back-to-back, each taking K cycles, plus one
/// fill/drain of 2*p_sys.
Cycles systolic_cycles(std::size_t m, std::size_t k, std::size_t f, const AcceleratorConfig& cfg);

struct StreamEdge {
  std::uint32_t src;
  std::uint32_t dst;
};

/// Stalls are measured against the ideal ceil(E / p_sg) * ceil(f / 2p_sg)
/// cycles. conflict_cycles is the excess of the same stream timed without
/// RAW checks; raw_stall_cycles is what the RAW checks add on top.
struct ScatterGatherTiming {
  Cycles cycles = 0;
  Cycles raw_stall_cycles = 0;
  Cycles conflict_cycles = 0;
  Cycles stall_cycles() const noexcept { return raw_stall_cycles + conflict_cycles; }
};

/// Gather bank owning local vertex v when num_vertices rows are split
/// contiguously over p_sg banks.
std::size_t gather_bank(std::uint32_t v, std::size_t num_vertices, const AcceleratorConfig& cfg);

/// Discrete-event timing of an edge stream in scatter-gather mode.
///
/// Edge k goes to scatter unit k mod p_sg. An update occupies its scatter
/// unit and the gather unit of its destination bank for ceil(f / 2p_sg)
/// cycles. It starts once both units are free and, if the same destination
/// was last written at cycle t, no earlier than t + raw_pipeline_depth.
ScatterGatherTiming scatter_gather_timing(std::span<const StreamEdge> stream, std::size_t num_vertices,
                                          std::size_t f, const AcceleratorConfig& cfg);

/// Timing of feature aggregation over the subgraph's edges at width f.
/// Throws CapacityError if (N+1)*f words exceed one Feature/Result buffer.
ScatterGatherTiming simulate_scatter_gather(const InducedSubgraph& sub, std::size_t f,
                                            const AcceleratorConfig& cfg);

/// Runs one PE through a model, kernel by kernel, tracking the ACK mode.
class PeSimulator {
 public:
  explicit PeSimulator(AcceleratorConfig cfg);

  /// One layer (0-based index). Enters and leaves in scatter-gather mode.
  FeatureMatrix run_layer(const InducedSubgraph& sub, const FeatureMatrix& h, const models::GnnModelSpec& spec,
                          std::size_t layer);

  std::vector<float> run_readout(const FeatureMatrix& h, models::ReadoutKind kind);

  const PeTrace& trace() const noexcept { return trace_; }
  AckMode mode() const noexcept { return mode_; }
  Cycles now() const noexcept { return now_; }

 private:
  JobRecord& begin_job(JobKind kind, std::string label, std::size_t layer);
  void finish_job(JobRecord& job, Cycles busy);
  void return_to_scatter_gather();
  void check_capacity(std::size_t rows, std::size_t cols, std::string_view what) const;

  FeatureMatrix aggregate(const InducedSubgraph& sub, const FeatureMatrix& h, models::Aggregator agg,
                          std::span<const float> weights, std::size_t layer);
  FeatureMatrix matmul(const FeatureMatrix& a, const FeatureMatrix& w, std::string label, std::size_t layer);
  void activate(FeatureMatrix& m, models::Activation act, std::size_t layer);
  std::vector<float> attention(const InducedSubgraph& sub, const FeatureMatrix& projected,
                               std::span<const float> att_vector, float slope, std::size_t layer);

  AcceleratorConfig cfg_;
  AckMode mode_ = AckMode::kScatterGather;
  Cycles now_ = 0;
  PeTrace trace_;
};

struct PeResult {
  std::vector<float> embedding;
  PeTrace trace;
};

/// L layers then readout on one PE. Input loading is hidden by triple
/// buffering and does not appear in the trace.
PeResult run_pe(const InducedSubgraph& sub, const models::GnnModelSpec& spec, const AcceleratorConfig& cfg);

/// Per-vertex compute time in seconds for a trace.
double trace_seconds(const PeTrace& trace, const AcceleratorConfig& cfg);

}  // namespace ackgnn::ack
