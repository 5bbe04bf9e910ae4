#include "ackgnn/scheduler.hpp"

#include <algorithm>
#include <numeric>

#include <fmt/format.h>

#include "ackgnn/error.hpp"

namespace ackgnn::sched {

void HostParams::validate() const {
  if (ini_threads < 1) throw ConfigError("ini_threads must be >= 1");
  if (!(t_ini_per_vertex >= 0)) throw ConfigError("t_ini_per_vertex must be >= 0");
  if (!(pcie_bandwidth > 0)) throw ConfigError("pcie_bandwidth must be positive");
  if (!(t_fixed >= 0)) throw ConfigError("t_fixed must be >= 0");
  if (feature_bits < 1 || edge_bits < 1) throw ConfigError("record widths must be positive");
}

double t_load_bound(std::size_t n, std::size_t f, const HostParams& host) {
  if (n < 1) throw ConfigError("t_load_bound needs N >= 1");
  const double nn = static_cast<double>(n);
  const double bits = nn * static_cast<double>(f) * static_cast<double>(host.feature_bits) +
                      nn * (nn - 1.0) * static_cast<double>(host.edge_bits) / 2.0;
  return bits / (8.0 * host.pcie_bandwidth) + host.t_fixed;
}

double t_load(std::size_t rows, std::size_t edges, std::size_t f, const HostParams& host) {
  const double bits = static_cast<double>(rows) * static_cast<double>(f) * static_cast<double>(host.feature_bits) +
                      static_cast<double>(edges) * static_cast<double>(host.edge_bits);
  return bits / (8.0 * host.pcie_bandwidth) + host.t_fixed;
}

double t_return(std::size_t f_out, const HostParams& host) {
  return static_cast<double>(f_out) * static_cast<double>(host.feature_bits) / (8.0 * host.pcie_bandwidth) +
         host.t_fixed;
}

std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::kIni:
      return "INI";
    case EventKind::kLoad:
      return "load";
    case EventKind::kCompute:
      return "compute";
    case EventKind::kReturn:
      return "return";
  }
  return "?";
}

std::string Actor::name() const {
  switch (kind) {
    case ActorKind::kCpuThread:
      return fmt::format("cpu-thread {}", index);
    case ActorKind::kPcieH2c:
      return "pcie-h2c";
    case ActorKind::kPcieC2h:
      return "pcie-c2h";
    case ActorKind::kPe:
      return fmt::format("pe {}", index);
  }
  return "?";
}

std::string ScheduleTimeline::to_csv() const {
  std::string out = "actor,kind,slot,vertex,start,end\n";
  for (const auto& e : events) {
    fmt::format_to(std::back_inserter(out), "{},{},{},{},{:.9g},{:.9g}\n", e.actor.name(), to_string(e.kind),
                   e.slot, e.vertex, e.start, e.end);
  }
  return out;
}

ScheduleTimeline schedule_batch(std::span<const VertexWork> work, std::size_t ini_threads, std::size_t num_pes) {
  if (work.empty()) throw ConfigError("batch must contain at least one vertex");
  if (ini_threads < 1 || num_pes < 1) throw ConfigError("need at least one INI thread and one PE");
  const auto c = work.size();

  ScheduleTimeline tl;
  tl.num_pes = num_pes;
  tl.pe_of.assign(c, 0);

  // INI on the host thread pool.
  std::vector<double> thread_free(ini_threads, 0.0);
  std::vector<double> ini_end(c);
  for (std::size_t i = 0; i < c; ++i) {
    auto t = static_cast<std::size_t>(std::min_element(thread_free.begin(), thread_free.end()) - thread_free.begin());
    const double start = thread_free[t];
    ini_end[i] = start + work[i].t_ini;
    thread_free[t] = ini_end[i];
    tl.events.push_back({{ActorKind::kCpuThread, t}, EventKind::kIni, i, work[i].vertex, start, ini_end[i]});
  }

  std::vector<std::size_t> order(c);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return ini_end[a] < ini_end[b]; });

  // Host-to-card loads and PE compute.
  double h2c_free = 0.0;
  std::vector<double> pe_compute_free(num_pes, 0.0);
  std::vector<double> pe_accept(num_pes, 0.0);  // prefetch buffer free from
  std::vector<double> compute_end(c);
  for (auto i : order) {
    std::size_t best = 0;
    double best_cs = 0, best_ls = 0, best_le = 0;
    for (std::size_t j = 0; j < num_pes; ++j) {
      const double ls = std::max({ini_end[i], h2c_free, pe_accept[j]});
      const double le = ls + work[i].t_load;
      const double cs = std::max(le, pe_compute_free[j]);
      if (j == 0 || cs < best_cs || (cs == best_cs && le < best_le)) {
        best = j;
        best_cs = cs;
        best_ls = ls;
        best_le = le;
      }
    }
    h2c_free = best_le;
    pe_accept[best] = best_cs;
    compute_end[i] = best_cs + work[i].compute;
    pe_compute_free[best] = compute_end[i];
    tl.pe_of[i] = best;
    tl.events.push_back({{ActorKind::kPcieH2c, 0}, EventKind::kLoad, i, work[i].vertex, best_ls, best_le});
    tl.events.push_back({{ActorKind::kPe, best}, EventKind::kCompute, i, work[i].vertex, best_cs, compute_end[i]});
  }

  // Card-to-host returns.
  std::vector<std::size_t> by_finish(order);
  std::stable_sort(by_finish.begin(), by_finish.end(),
                   [&](auto a, auto b) { return compute_end[a] < compute_end[b]; });
  double c2h_free = 0.0;
  for (auto i : by_finish) {
    const double start = std::max(compute_end[i], c2h_free);
    c2h_free = start + work[i].t_return;
    tl.events.push_back({{ActorKind::kPcieC2h, 0}, EventKind::kReturn, i, work[i].vertex, start, c2h_free});
  }

  for (const auto& e : tl.events) tl.latency = std::max(tl.latency, e.end);
  const auto first = order.front();
  tl.t_initialization = work[first].t_ini + work[first].t_load;
  return tl;
}

ScheduleTimeline schedule_batch(std::span<const double> compute, double load, double ret, const HostParams& host,
                                std::size_t num_pes) {
  host.validate();
  std::vector<VertexWork> work(compute.size());
  for (std::size_t i = 0; i < compute.size(); ++i) {
    work[i] = {static_cast<std::uint32_t>(i), host.t_ini_per_vertex, load, compute[i], ret};
  }
  return schedule_batch(work, host.ini_threads, num_pes);
}

BatchLatencyReport latency_report(const ScheduleTimeline& timeline, std::span<const ack::PeTrace> traces) {
  BatchLatencyReport r;
  r.batch_size = timeline.pe_of.size();
  r.latency = timeline.latency;
  r.t_initialization = timeline.t_initialization;
  r.initialization_fraction = r.latency > 0 ? r.t_initialization / r.latency : 0.0;

  r.pes.assign(timeline.num_pes, {});
  std::vector<double> first_start(timeline.num_pes, -1.0);
  std::vector<double> last_end(timeline.num_pes, 0.0);
  for (const auto& e : timeline.events) {
    switch (e.kind) {
      case EventKind::kLoad:
        r.load_time_total += e.end - e.start;
        break;
      case EventKind::kIni:
        r.ini_time_total += e.end - e.start;
        break;
      case EventKind::kCompute: {
        auto& pe = r.pes[e.actor.index];
        pe.compute += e.end - e.start;
        ++pe.vertices;
        auto& fs = first_start[e.actor.index];
        if (fs < 0 || e.start < fs) fs = e.start;
        last_end[e.actor.index] = std::max(last_end[e.actor.index], e.end);
        break;
      }
      case EventKind::kReturn:
        break;
    }
  }
  for (std::size_t j = 0; j < r.pes.size(); ++j) {
    if (first_start[j] < 0) continue;
    r.pes[j].window = last_end[j] - first_start[j];
    r.pes[j].idle = r.pes[j].window - r.pes[j].compute;
  }

  std::vector<std::uint64_t> by_kind(5, 0);
  std::uint64_t stalls = 0;
  for (const auto& t : traces) {
    auto k = t.cycles_by_kind();
    for (std::size_t i = 0; i < k.size(); ++i) by_kind[i] += k[i];
    r.total_cycles += t.total_cycles();
    r.mode_switches += t.mode_switches();
    stalls += t.stall_cycles();
  }
  const auto job_cycles = std::accumulate(by_kind.begin(), by_kind.end(), std::uint64_t{0});
  for (std::size_t i = 0; i < by_kind.size(); ++i) {
    const double share = job_cycles ? static_cast<double>(by_kind[i]) / static_cast<double>(job_cycles) : 0.0;
    r.kernel_shares.emplace_back(std::string(ack::to_string(static_cast<ack::JobKind>(i))), share);
  }
  r.stall_share = r.total_cycles ? static_cast<double>(stalls) / static_cast<double>(r.total_cycles) : 0.0;
  return r;
}

}  // namespace ackgnn::sched
