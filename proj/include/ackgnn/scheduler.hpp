#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ackgnn/ack.hpp"

namespace ackgnn::sched {

/// Host side and interconnect parameters.
struct HostParams {
  std::size_t ini_threads = 8;
  double t_ini_per_vertex = 96e-6;  // seconds, single thread
  double pcie_bandwidth = 15.6e9;   // bytes per second
  double t_fixed = 0.35e-6;         // per-transfer setup latency
  std::size_t feature_bits = 32;    // b_fe
  std::size_t edge_bits = 96;       // b_ed

  void validate() const;
};

/// Upper bound on loading one induced subgraph:
/// (N f b_fe + N(N-1) b_ed / 2) / (8 BW) + t_fixed.
double t_load_bound(std::size_t n, std::size_t f, const HostParams& host);

/// Load time for an actual subgraph with `rows` feature rows and `edges` edges.
double t_load(std::size_t rows, std::size_t edges, std::size_t f, const HostParams& host);

/// Cost of sending an f_out-wide embedding back to the host.
double t_return(std::size_t f_out, const HostParams& host);

struct VertexWork {
  std::uint32_t vertex = 0;
  double t_ini = 0;
  double t_load = 0;
  double compute = 0;
  double t_return = 0;
};

enum class EventKind { kIni, kLoad, kCompute, kReturn };
std::string_view to_string(EventKind k);

enum class ActorKind { kCpuThread, kPcieH2c, kPcieC2h, kPe };

struct Actor {
  ActorKind kind;
  std::size_t index = 0;
  std::string name() const;
  friend bool operator==(const Actor&, const Actor&) = default;
};

struct ScheduleEvent {
  Actor actor;
  EventKind kind;
  std::size_t slot = 0;  // position of the vertex in the batch
  std::uint32_t vertex = 0;
  double start = 0;
  double end = 0;
};

struct ScheduleTimeline {
  std::vector<ScheduleEvent> events;
  /// pe_of[slot] = PE that computed the slot-th vertex of the batch.
  std::vector<std::size_t> pe_of;
  std::size_t num_pes = 0;
  double latency = 0;
  double t_initialization = 0;

  std::string to_csv() const;
};

/// Event-driven model of one batch on the CPU-FPGA system.
///
///  - INI: ini_threads workers take vertices in batch order; a vertex goes
///    to the earliest free thread, lowest index on ties.
///  - Loads: one host-to-card PCIe channel serves finished subgraphs FIFO by
///    INI completion time. A PE holds at most one prefetched vertex besides
///    the one it computes, so a load into PE j may start once the previous
///    vertex assigned to j has started computing.
///  - Each vertex goes to the PE where it would start computing first;
///    ties go to the earlier load end and then to the lowest PE index.
///  - Returns use the card-to-host direction, FIFO by compute end.
ScheduleTimeline schedule_batch(std::span<const VertexWork> work, std::size_t ini_threads, std::size_t num_pes);

/// Uniform batch: C vertices, each with the host's t_INI, the given load
/// time and per-vertex compute times.
ScheduleTimeline schedule_batch(std::span<const double> compute, double load, double ret, const HostParams& host,
                                std::size_t num_pes);

struct PeUsage {
  double compute = 0;
  double idle = 0;
  double window = 0;  // first compute start to last compute end
  std::size_t vertices = 0;
};

struct BatchLatencyReport {
  std::size_t batch_size = 0;
  double latency = 0;
  double t_initialization = 0;
  double initialization_fraction = 0;
  double load_time_total = 0;
  double ini_time_total = 0;
  /// Cycle share per job kind over all traces; sums to 1 when any cycles.
  std::vector<std::pair<std::string, double>> kernel_shares;
  double stall_share = 0;
  std::uint64_t total_cycles = 0;
  std::uint64_t mode_switches = 0;
  std::vector<PeUsage> pes;
};

BatchLatencyReport latency_report(const ScheduleTimeline& timeline, std::span<const ack::PeTrace> traces);

}  // namespace ackgnn::sched
