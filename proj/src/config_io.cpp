#include "ackgnn/config_io.hpp"

#include <fstream>

#include <fmt/format.h>

#include "ackgnn/error.hpp"
#include "ackgnn/graph.hpp"

namespace ackgnn::io {

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

void write_json(const json& j, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

namespace {

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("field '{}': {}", key, e.what()));
  }
}

template <typename T>
T require(const json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(fmt::format("missing field '{}'", key));
  return get_or<T>(j, key, T{});
}

}  // namespace

std::vector<std::string> weight_manifest(const models::GnnModelSpec& spec) {
  std::vector<std::string> names;
  for (std::size_t l = 1; l <= spec.num_layers(); ++l) {
    names.push_back(fmt::format("layer{}.weight", l));
    if (spec.kind == models::ModelKind::kGat) {
      names.push_back(fmt::format("layer{}.att_weight", l));
      names.push_back(fmt::format("layer{}.att_vector", l));
    }
  }
  return names;
}

namespace {

struct WeightSlot {
  std::size_t layer;  // 0-based
  enum { kWeight, kAttWeight, kAttVector } which;
};

WeightSlot parse_slot(const std::string& name, std::size_t num_layers) {
  std::size_t layer = 0;
  char field[32] = {};
  if (std::sscanf(name.c_str(), "layer%zu.%31s", &layer, field) != 2 || layer < 1 || layer > num_layers) {
    throw ConfigError(fmt::format("bad weight manifest entry '{}'", name));
  }
  std::string f(field);
  if (f == "weight") return {layer - 1, WeightSlot::kWeight};
  if (f == "att_weight") return {layer - 1, WeightSlot::kAttWeight};
  if (f == "att_vector") return {layer - 1, WeightSlot::kAttVector};
  throw ConfigError(fmt::format("bad weight manifest entry '{}'", name));
}

}  // namespace

models::GnnModelSpec model_spec_from_json(const json& j, const std::filesystem::path& base_dir) {
  const auto kind = models::parse_model_kind(require<std::string>(j, "model_kind"));
  auto dims = require<std::vector<std::size_t>>(j, "dims");
  if (dims.size() < 2) throw ConfigError("dims must list f_0 .. f_L with L >= 1");
  if (j.contains("layers") && get_or<std::size_t>(j, "layers", 0) != dims.size() - 1) {
    throw ConfigError(fmt::format("layers = {} but dims describe {} layers", j.at("layers").dump(), dims.size() - 1));
  }
  const auto n = require<std::size_t>(j, "receptive_field");
  const auto weights = j.contains("weights") ? j.at("weights") : json::object({{"seed", 0}});

  models::GnnModelSpec spec;
  if (weights.contains("file")) {
    spec.kind = kind;
    spec.receptive_field = n;
    spec.dims = dims;
    spec.layers.resize(dims.size() - 1);
    auto path = std::filesystem::path(require<std::string>(weights, "file"));
    if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open weight file " + path.string());
    auto manifest = weights.contains("manifest") ? require<std::vector<std::string>>(weights, "manifest")
                                                 : weight_manifest(spec);
    for (const auto& name : manifest) {
      auto slot = parse_slot(name, spec.layers.size());
      auto m = graph::read_matrix(in);
      auto& lw = spec.layers[slot.layer];
      switch (slot.which) {
        case WeightSlot::kWeight:
          lw.weight = std::move(m);
          break;
        case WeightSlot::kAttWeight:
          lw.att_weight = std::move(m);
          break;
        case WeightSlot::kAttVector:
          lw.att_vector.assign(m.data().begin(), m.data().end());
          break;
      }
    }
  } else {
    spec = models::make_random_model(kind, dims, n, get_or<std::uint64_t>(weights, "seed", 0));
  }
  spec.aggregator = j.contains("aggregator") ? models::parse_aggregator(require<std::string>(j, "aggregator"))
                                             : models::default_aggregator(kind);
  if (j.contains("activation")) spec.activation = models::parse_activation(require<std::string>(j, "activation"));
  if (j.contains("readout")) spec.readout = models::parse_readout(require<std::string>(j, "readout"));
  spec.attention_slope = get_or<float>(j, "attention_slope", 0.2f);
  spec.validate();
  return spec;
}

models::GnnModelSpec load_model_spec(const std::filesystem::path& path) {
  return model_spec_from_json(read_json(path), path.parent_path());
}

void write_weights(const models::GnnModelSpec& spec, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  for (const auto& lw : spec.layers) {
    graph::write_matrix(out, lw.weight);
    if (spec.kind == models::ModelKind::kGat) {
      graph::write_matrix(out, lw.att_weight);
      graph::write_matrix(out, graph::FeatureMatrix(1, lw.att_vector.size(), lw.att_vector));
    }
  }
}

json model_spec_to_json(const models::GnnModelSpec& spec, const std::string& weights_file) {
  return {
      {"model_kind", models::to_string(spec.kind)},
      {"layers", spec.num_layers()},
      {"receptive_field", spec.receptive_field},
      {"dims", spec.dims},
      {"aggregator", models::to_string(spec.aggregator)},
      {"activation", models::to_string(spec.activation)},
      {"readout", models::to_string(spec.readout)},
      {"attention_slope", spec.attention_slope},
      {"weights", {{"file", weights_file}, {"manifest", weight_manifest(spec)}}},
  };
}

json to_json(const ack::AcceleratorConfig& cfg) {
  return {
      {"alu_dsps", cfg.alu_dsps},
      {"p_sys", cfg.p_sys},
      {"p_sg", cfg.p_sg()},
      {"num_pes", cfg.num_pes},
      {"clock_hz", cfg.clock_hz},
      {"raw_pipeline_depth", cfg.raw_pipeline_depth},
      {"buffer_capacity_words", cfg.buffer_capacity_words},
      {"mode_switch_cycles", cfg.mode_switch_cycles},
      {"heterogeneous_slrs", cfg.heterogeneous_slrs},
      {"pes_per_slr", cfg.pes_per_slr},
  };
}

ack::AcceleratorConfig accelerator_config_from_json(const json& j) {
  const auto& a = j.contains("accelerator") ? j.at("accelerator") : j;
  ack::AcceleratorConfig cfg;
  cfg.alu_dsps = get_or(a, "alu_dsps", cfg.alu_dsps);
  cfg.p_sys = get_or(a, "p_sys", cfg.p_sys);
  cfg.num_pes = get_or(a, "num_pes", cfg.num_pes);
  cfg.clock_hz = get_or(a, "clock_hz", cfg.clock_hz);
  cfg.raw_pipeline_depth = get_or(a, "raw_pipeline_depth", cfg.raw_pipeline_depth);
  cfg.buffer_capacity_words = get_or(a, "buffer_capacity_words", cfg.buffer_capacity_words);
  cfg.mode_switch_cycles = get_or(a, "mode_switch_cycles", cfg.mode_switch_cycles);
  cfg.heterogeneous_slrs = get_or(a, "heterogeneous_slrs", cfg.heterogeneous_slrs);
  cfg.pes_per_slr = get_or(a, "pes_per_slr", cfg.pes_per_slr);
  if (a.contains("p_sg") && get_or<std::size_t>(a, "p_sg", 0) != cfg.p_sg()) {
    throw ConfigError("p_sg must equal p_sys / 2");
  }
  cfg.validate();
  return cfg;
}

ack::AcceleratorConfig load_accelerator_config(const std::filesystem::path& path) {
  return accelerator_config_from_json(read_json(path));
}

sched::HostParams host_params_from_json(const json& j, sched::HostParams host) {
  if (!j.contains("host")) return host;
  const auto& h = j.at("host");
  host.ini_threads = get_or(h, "ini_threads", host.ini_threads);
  host.t_ini_per_vertex = get_or(h, "t_ini_per_vertex", host.t_ini_per_vertex);
  host.pcie_bandwidth = get_or(h, "pcie_bandwidth", host.pcie_bandwidth);
  host.t_fixed = get_or(h, "t_fixed", host.t_fixed);
  host.feature_bits = get_or(h, "feature_bits", host.feature_bits);
  host.edge_bits = get_or(h, "edge_bits", host.edge_bits);
  host.validate();
  return host;
}

json to_json(const sched::HostParams& host) {
  return {
      {"ini_threads", host.ini_threads},   {"t_ini_per_vertex", host.t_ini_per_vertex},
      {"pcie_bandwidth", host.pcie_bandwidth}, {"t_fixed", host.t_fixed},
      {"feature_bits", host.feature_bits}, {"edge_bits", host.edge_bits},
  };
}

dse::DsePlatform load_platform(const std::filesystem::path& path) {
  auto j = read_json(path);
  dse::DsePlatform p;
  p.name = get_or<std::string>(j, "name", path.stem().string());
  p.slr_dsp_counts = require<std::vector<std::size_t>>(j, "slr_dsp_counts");
  p.clock_hz = get_or(j, "clock_hz", p.clock_hz);
  p.validate();
  return p;
}

ModelSet load_model_set(const std::filesystem::path& path) {
  auto j = read_json(path);
  ModelSet set;
  if (j.contains("models")) {
    std::vector<models::ModelKind> kinds;
    for (const auto& m : require<std::vector<std::string>>(j, "models")) kinds.push_back(models::parse_model_kind(m));
    set.ops = dse::required_ops(kinds);
  }
  if (j.contains("ops")) {
    for (const auto& op : require<std::vector<std::string>>(j, "ops")) set.ops.insert(op);
  }
  if (j.contains("alu_cost_table")) {
    set.table = dse::AluCostTable(require<std::map<std::string, std::size_t>>(j, "alu_cost_table"));
  }
  if (set.ops.empty()) throw ConfigError("model set names no models or operations");
  return set;
}

json to_json(const dse::DseResult& result) {
  json slrs = json::array();
  for (const auto& s : result.slrs) slrs.push_back({{"dsps", s.dsps}, {"p_sys", s.p_sys}, {"num_pes", s.num_pes}});
  auto j = json{{"accelerator", to_json(result.config)}, {"slrs", slrs}};
  return j;
}

json to_json(const sched::BatchLatencyReport& r) {
  json shares = json::object();
  for (const auto& [k, v] : r.kernel_shares) shares[k] = v;
  json pes = json::array();
  for (const auto& p : r.pes) {
    pes.push_back({{"compute", p.compute}, {"idle", p.idle}, {"window", p.window}, {"vertices", p.vertices}});
  }
  return {
      {"batch_size", r.batch_size},
      {"latency_s", r.latency},
      {"t_initialization_s", r.t_initialization},
      {"initialization_fraction", r.initialization_fraction},
      {"load_time_total_s", r.load_time_total},
      {"ini_time_total_s", r.ini_time_total},
      {"kernel_shares", shares},
      {"stall_share", r.stall_share},
      {"total_cycles", r.total_cycles},
      {"mode_switches", r.mode_switches},
      {"pes", pes},
  };
}

std::string report_csv(const sched::BatchLatencyReport& r) {
  std::string out = "metric,value\n";
  auto row = [&](std::string_view k, double v) { fmt::format_to(std::back_inserter(out), "{},{:.9g}\n", k, v); };
  row("batch_size", static_cast<double>(r.batch_size));
  row("latency_s", r.latency);
  row("t_initialization_s", r.t_initialization);
  row("initialization_fraction", r.initialization_fraction);
  row("load_time_total_s", r.load_time_total);
  row("ini_time_total_s", r.ini_time_total);
  for (const auto& [k, v] : r.kernel_shares) row("share:" + k, v);
  row("stall_share", r.stall_share);
  row("total_cycles", static_cast<double>(r.total_cycles));
  row("mode_switches", static_cast<double>(r.mode_switches));
  for (std::size_t i = 0; i < r.pes.size(); ++i) {
    row(fmt::format("pe{}:compute_s", i), r.pes[i].compute);
    row(fmt::format("pe{}:idle_s", i), r.pes[i].idle);
  }
  return out;
}

}  // namespace ackgnn::io
