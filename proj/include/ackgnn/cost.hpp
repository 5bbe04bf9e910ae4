#pragma once

#include <span>
#include <string>
#include <vector>

namespace ackgnn::cost {

/// Inputs of the asymptotic cost models; constant factors are dropped.
struct CostModelInput {
  double degree = 10;          // d
  std::size_t layers = 3;      // L
  double width = 256;          // f, uniform hidden width
  std::size_t receptive = 64;  // N

  void validate() const;
};

struct Costs {
  double compute = 0;
  double communication = 0;
  double c2c = 0;
};

/// Recursive neighbourhood expansion: d^L f^2 compute, d^L f traffic.
Costs coupled_costs(const CostModelInput& in);

/// Fixed receptive field: N L f^2 compute, N f traffic.
Costs decoupled_costs(const CostModelInput& in);

/// Workloads and resources of one GCN layer under a unified or a split
/// (hybrid) accelerator.
struct HybridSplit {
  double fa_work = 1;        // alpha_1
  double ft_work = 1;        // alpha_2
  double resources = 2;      // beta
  double fa_resources = 1;   // beta_1

  void validate() const;
};

struct HybridLatency {
  double unified = 0;
  double hybrid = 0;
};

/// unified = (a1 + a2) / b, hybrid = max(a1 / b1, a2 / (b - b1)).
HybridLatency hybrid_latency(const HybridSplit& s);

/// The split that balances both modules: b1 = b * a1 / (a1 + a2).
HybridSplit balanced_split(double fa_work, double ft_work, double resources);

struct LinearFit {
  double slope = 0;
  double intercept = 0;
  double r_squared = 0;
};

/// Ordinary least squares y = slope * x + intercept.
LinearFit fit_line(std::span<const double> xs, std::span<const double> ys);

/// CSV rows over the cartesian grid for plotting cost curves.
std::string cost_grid_csv(std::span<const double> degrees, std::span<const std::size_t> layers,
                          std::span<const double> widths, std::span<const std::size_t> receptive);

}  // namespace ackgnn::cost
