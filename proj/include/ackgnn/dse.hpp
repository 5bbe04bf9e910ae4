#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "ackgnn/ack.hpp"
#include "ackgnn/models.hpp"

namespace ackgnn::dse {

using OpSet = std::set<std::string>;

/// DSPs needed by an ALU that implements a given operation on float32.
///
/// An ALU is sized by its most expensive operation; cheaper ones share that
/// datapath. The default MulAcc entry is calibrated so that the GCN, SAGE
/// and GAT operation set costs 5 DSPs per ALU.
class AluCostTable {
 public:
  AluCostTable() = default;
  explicit AluCostTable(std::map<std::string, std::size_t> entries) : entries_(std::move(entries)) {}

  static const AluCostTable& defaults();

  /// Throws ConfigError for an empty set or an operation not in the table.
  std::size_t alu_cost(const OpSet& ops) const;
  const std::map<std::string, std::size_t>& entries() const noexcept { return entries_; }

 private:
  std::map<std::string, std::size_t> entries_;
};

std::size_t alu_cost(const OpSet& ops);

/// Arithmetic operations each model kind needs from the ALU.
OpSet required_ops(models::ModelKind kind);
OpSet required_ops(const std::vector<models::ModelKind>& kinds);

struct SlrDesign {
  std::size_t dsps = 0;
  std::size_t p_sys = 0;
  std::size_t num_pes = 0;
};

/// Largest power-of-two p_sys with p_sys^2 <= N_DSP / N_ALU, and the number
/// of such arrays that fit. Throws InfeasibleError if N_DSP < N_ALU.
SlrDesign dse_per_slr(std::size_t n_dsp, std::size_t n_alu);

struct DsePlatform {
  std::string name;
  std::vector<std::size_t> slr_dsp_counts;
  double clock_hz = 300e6;

  void validate() const;
};

struct DseResult {
  std::size_t alu_dsps = 0;
  std::vector<SlrDesign> slrs;
  ack::AcceleratorConfig config;
};

/// Three-step DSE applied to every SLR. With unequal SLRs the smallest
/// p_sys is used everywhere and the PE count of each SLR is recomputed for
/// it; config.heterogeneous_slrs is set in that case.
DseResult dse_full(const DsePlatform& platform, const OpSet& ops,
                   const AluCostTable& table = AluCostTable::defaults());

}  // namespace ackgnn::dse
