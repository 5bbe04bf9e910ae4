#include "ackgnn/dse.hpp"

#include <algorithm>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "ackgnn/error.hpp"

namespace ackgnn::dse {

const AluCostTable& AluCostTable::defaults() {
  static const AluCostTable table({
      {"Add", 1},
      {"Sub", 1},
      {"Min", 1},
      {"Max", 1},
      {"Mul", 3},
      {"MulAcc", 5},
  });
  return table;
}

std::size_t AluCostTable::alu_cost(const OpSet& ops) const {
  if (ops.empty()) throw ConfigError("operation set is empty");
  std::size_t cost = 0;
  for (const auto& op : ops) {
    auto it = entries_.find(op);
    if (it == entries_.end()) throw ConfigError(fmt::format("no ALU cost entry for operation '{}'", op));
    cost = std::max(cost, it->second);
  }
  return cost;
}

std::size_t alu_cost(const OpSet& ops) { return AluCostTable::defaults().alu_cost(ops); }

OpSet required_ops(models::ModelKind kind) {
  switch (kind) {
    case models::ModelKind::kGcn:
      return {"Mul", "Add", "MulAcc"};
    case models::ModelKind::kSage:
      return {"Mul", "Add", "MulAcc", "Min", "Max"};
    case models::ModelKind::kGat:
      return {"Mul", "Add", "MulAcc", "Max"};
  }
  return {};
}

OpSet required_ops(const std::vector<models::ModelKind>& kinds) {
  OpSet out;
  for (auto k : kinds) out.merge(required_ops(k));
  return out;
}

SlrDesign dse_per_slr(std::size_t n_dsp, std::size_t n_alu) {
  if (n_alu == 0) throw ConfigError("N_ALU must be positive");
  if (n_dsp < n_alu) {
    throw InfeasibleError(fmt::format("{} DSPs cannot hold a single {}-DSP ALU", n_dsp, n_alu));
  }
  // p^2 <= n_dsp / n_alu  <=>  p^2 * n_alu <= n_dsp, kept in integers.
  std::size_t p = 1;
  while ((2 * p) * (2 * p) * n_alu <= n_dsp) p *= 2;
  return {n_dsp, p, n_dsp / (n_alu * p * p)};
}

void DsePlatform::validate() const {
  if (slr_dsp_counts.empty()) throw ConfigError("platform lists no SLRs");
  for (std::size_t i = 0; i < slr_dsp_counts.size(); ++i) {
    if (slr_dsp_counts[i] == 0) throw ConfigError(fmt::format("SLR {} has no DSPs", i));
  }
  if (!(clock_hz > 0)) throw ConfigError("clock_hz must be positive");
}

DseResult dse_full(const DsePlatform& platform, const OpSet& ops, const AluCostTable& table) {
  platform.validate();
  DseResult result;
  result.alu_dsps = table.alu_cost(ops);
  for (std::size_t i = 0; i < platform.slr_dsp_counts.size(); ++i) {
    try {
      result.slrs.push_back(dse_per_slr(platform.slr_dsp_counts[i], result.alu_dsps));
    } catch (const InfeasibleError& e) {
      throw InfeasibleError(fmt::format("SLR {}: {}", i, e.what()));
    }
  }
  auto p_min = std::min_element(result.slrs.begin(), result.slrs.end(),
                                [](const SlrDesign& a, const SlrDesign& b) { return a.p_sys < b.p_sys; })
                   ->p_sys;
  const bool heterogeneous = std::any_of(result.slrs.begin(), result.slrs.end(),
                                         [&](const SlrDesign& s) { return s.p_sys != p_min; });
  auto& cfg = result.config;
  cfg.alu_dsps = result.alu_dsps;
  cfg.p_sys = p_min;
  cfg.clock_hz = platform.clock_hz;
  cfg.heterogeneous_slrs = heterogeneous;
  cfg.num_pes = 0;
  for (auto& s : result.slrs) {
    if (heterogeneous) {
      s.p_sys = p_min;
      s.num_pes = s.dsps / (result.alu_dsps * p_min * p_min);
    }
    cfg.pes_per_slr.push_back(s.num_pes);
    cfg.num_pes += s.num_pes;
  }
  return result;
}

}  // namespace ackgnn::dse
