#include "ackgnn/cost.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "ackgnn/error.hpp"

namespace ackgnn::cost {

void CostModelInput::validate() const {
  if (!(degree >= 1) || layers < 1 || !(width >= 1) || receptive < 1) {
    throw ConfigError("cost model needs d >= 1, L >= 1, f >= 1, N >= 1");
  }
}

Costs coupled_costs(const CostModelInput& in) {
  in.validate();
  const double field = std::pow(in.degree, static_cast<double>(in.layers));
  Costs c;
  c.compute = field * in.width * in.width;
  c.communication = field * in.width;
  c.c2c = c.compute / c.communication;
  return c;
}

Costs decoupled_costs(const CostModelInput& in) {
  in.validate();
  const double n = static_cast<double>(in.receptive);
  const double l = static_cast<double>(in.layers);
  Costs c;
  c.compute = n * l * in.width * in.width;
  c.communication = n * in.width;
  c.c2c = c.compute / c.communication;
  return c;
}

void HybridSplit::validate() const {
  if (!(fa_work > 0) || !(ft_work > 0)) throw ConfigError("workloads must be positive");
  if (!(resources > 0)) throw ConfigError("total resources must be positive");
  if (!(fa_resources > 0 && fa_resources < resources)) {
    throw ConfigError("FA resources must lie strictly between 0 and the total");
  }
}

HybridLatency hybrid_latency(const HybridSplit& s) {
  s.validate();
  return {(s.fa_work + s.ft_work) / s.resources,
          std::max(s.fa_work / s.fa_resources, s.ft_work / (s.resources - s.fa_resources))};
}

HybridSplit balanced_split(double fa_work, double ft_work, double resources) {
  HybridSplit s{fa_work, ft_work, resources, resources * fa_work / (fa_work + ft_work)};
  s.validate();
  return s;
}

LinearFit fit_line(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2) throw DimensionError("fit_line needs >= 2 paired samples");
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0) throw DimensionError("fit_line needs at least two distinct x values");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (fit.slope * xs[i] + fit.intercept);
    ss_res += r * r;
  }
  fit.r_squared = syy == 0 ? 1.0 : 1.0 - ss_res / syy;
  return fit;
}

std::string cost_grid_csv(std::span<const double> degrees, std::span<const std::size_t> layers,
                          std::span<const double> widths, std::span<const std::size_t> receptive) {
  std::string out =
      "d,L,f,N,coupled_compute,coupled_comm,coupled_c2c,decoupled_compute,decoupled_comm,decoupled_c2c\n";
  for (double d : degrees) {
    for (auto l : layers) {
      for (double f : widths) {
        for (auto n : receptive) {
          CostModelInput in{d, l, f, n};
          auto c = coupled_costs(in);
          auto dc = decoupled_costs(in);
          fmt::format_to(std::back_inserter(out), "{},{},{},{},{:.6g},{:.6g},{:.6g},{:.6g},{:.6g},{:.6g}\n", d, l,
                         f, n, c.compute, c.communication, c.c2c, dc.compute, dc.communication, dc.c2c);
        }
      }
    }
  }
  return out;
}

}  // namespace ackgnn::cost
