#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "ackgnn/ack.hpp"
#include "ackgnn/dse.hpp"
#include "ackgnn/models.hpp"
#include "ackgnn/scheduler.hpp"

namespace ackgnn::io {

using nlohmann::json;

json read_json(const std::filesystem::path& path);
void write_json(const json& j, const std::filesystem::path& path);

/// Model spec file:
///
///   {
///     "model_kind": "gcn" | "sage" | "gat",
///     "layers": L,                       optional, checked against dims
///     "receptive_field": N,
///     "dims": [f_0, ..., f_L],
///     "aggregator": "gcn-norm",          optional, per-kind default
///     "activation": "relu",              optional
///     "readout": "max" | "target-row",   optional
///     "attention_slope": 0.2,            optional
///     "weights": { "seed": 7 }
///              | { "file": "w.bin", "manifest": ["layer1.weight", ...] }
///   }
///
/// The weight file is the matrices named by the manifest, concatenated in
/// manifest order, each in the binary feature-matrix layout. Names are
/// layer<l>.weight, layer<l>.att_weight and layer<l>.att_vector (1 x 2f_l).
/// A relative weight path is resolved against the spec file's directory.
models::GnnModelSpec load_model_spec(const std::filesystem::path& path);
models::GnnModelSpec model_spec_from_json(const json& j, const std::filesystem::path& base_dir = {});

/// Default manifest order for a model: per layer weight, then for GAT
/// att_weight and att_vector.
std::vector<std::string> weight_manifest(const models::GnnModelSpec& spec);
void write_weights(const models::GnnModelSpec& spec, const std::filesystem::path& path);

/// Spec JSON with inline "weights": {"file", "manifest"} pointing at
/// `weights_file`; call write_weights separately.
json model_spec_to_json(const models::GnnModelSpec& spec, const std::string& weights_file);

json to_json(const ack::AcceleratorConfig& cfg);
ack::AcceleratorConfig accelerator_config_from_json(const json& j);
ack::AcceleratorConfig load_accelerator_config(const std::filesystem::path& path);

sched::HostParams host_params_from_json(const json& j, sched::HostParams defaults = {});
json to_json(const sched::HostParams& host);

/// {"name": ..., "slr_dsp_counts": [...], "clock_hz": ...}
dse::DsePlatform load_platform(const std::filesystem::path& path);

/// {"models": ["gcn", "sage", "gat"]} and/or {"ops": ["Mul", ...]}, plus an
/// optional "alu_cost_table": {"Op": dsps, ...} replacing the default table.
struct ModelSet {
  dse::OpSet ops;
  dse::AluCostTable table = dse::AluCostTable::defaults();
};
ModelSet load_model_set(const std::filesystem::path& path);

json to_json(const dse::DseResult& result);
json to_json(const sched::BatchLatencyReport& report);
std::string report_csv(const sched::BatchLatencyReport& report);

}  // namespace ackgnn::io
