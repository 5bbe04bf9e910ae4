// Command-line front end: infer, simulate, dse, bench.

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "ackgnn/ack.hpp"
#include "ackgnn/config_io.hpp"
#include "ackgnn/cost.hpp"
#include "ackgnn/dse.hpp"
#include "ackgnn/error.hpp"
#include "ackgnn/graph.hpp"
#include "ackgnn/pipeline.hpp"

namespace fs = std::filesystem;
using namespace ackgnn;
using io::json;

namespace {

struct DataOptions {
  std::string graph_path;
  std::string features_path;
  bool undirected = true;
  bool compact_ids = false;
  std::size_t synth_vertices = 1000;
  double synth_degree = 10.0;
};

struct RunOptions {
  DataOptions data;
  std::string model_path;
  std::string accel_path;
  std::size_t batch_size = 32;
  std::vector<graph::VertexId> targets;
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  std::size_t threads = 0;
  double alpha = 0.15;
  double epsilon = 1e-4;
  std::string push_direction = "forward";
};

void add_data_options(CLI::App* cmd, DataOptions& d) {
  cmd->add_option("--graph", d.graph_path, "Edge list (src dst [weight] per line); synthetic if omitted")
      ->check(CLI::ExistingFile);
  cmd->add_option("--features", d.features_path, "Binary feature matrix; synthetic if omitted")
      ->check(CLI::ExistingFile);
  cmd->add_flag("--undirected,!--directed", d.undirected, "Mirror every edge (default) or keep edges directed");
  cmd->add_flag("--compact-ids", d.compact_ids, "Relabel file ids to 0..k-1 and write id_map.txt");
  cmd->add_option("--synth-vertices", d.synth_vertices, "Synthetic graph vertex count")->check(CLI::PositiveNumber);
  cmd->add_option("--synth-degree", d.synth_degree, "Synthetic graph average degree")->check(CLI::NonNegativeNumber);
}

void add_run_options(CLI::App* cmd, RunOptions& o) {
  add_data_options(cmd, o.data);
  cmd->add_option("--model", o.model_path, "Model spec JSON")->required();
  cmd->add_option("--batch-size,-C", o.batch_size, "Number of target vertices")->check(CLI::PositiveNumber);
  cmd->add_option("--targets", o.targets, "Explicit target vertices (overrides --batch-size)")->delimiter(',');
  cmd->add_option("--seed", o.seed, "Seed for synthetic data and target selection");
  cmd->add_option("--out", o.out_dir, "Output directory");
  cmd->add_option("--threads", o.threads, "Worker threads per stage (0: host INI threads)");
  cmd->add_option("--alpha", o.alpha, "PPR teleport probability");
  cmd->add_option("--epsilon", o.epsilon, "PPR residual tolerance");
  cmd->add_option("--push-direction", o.push_direction, "forward, reverse or symmetric")
      ->check(CLI::IsMember({"forward", "reverse", "symmetric"}));
}

struct Dataset {
  graph::CsrGraph graph;
  graph::FeatureMatrix features;
  json source;
};

Dataset load_dataset(const DataOptions& d, std::size_t feature_dim, std::uint64_t seed, const fs::path& out_dir) {
  Dataset ds;
  const bool directed = !d.undirected;
  if (!d.graph_path.empty()) {
    auto loaded = graph::load_edge_list(d.graph_path, {directed, d.compact_ids});
    ds.graph = std::move(loaded.graph);
    if (d.compact_ids) graph::write_id_map(loaded.original_ids, out_dir / "id_map.txt");
    ds.source["graph"] = {{"path", d.graph_path}, {"directed", directed}, {"compact_ids", d.compact_ids}};
  } else {
    ds.graph = graph::synth_graph(d.synth_vertices, d.synth_degree, seed);
    ds.source["graph"] = {{"synthetic", true}, {"vertices", d.synth_vertices}, {"degree", d.synth_degree},
                          {"seed", seed}};
  }
  if (!d.features_path.empty()) {
    ds.features = graph::load_features(d.features_path, ds.graph);
    ds.source["features"] = {{"path", d.features_path}};
  } else {
    ds.features = graph::synth_features(ds.graph.num_vertices(), feature_dim, seed + 1);
    ds.source["features"] = {{"synthetic", true}, {"cols", feature_dim}, {"seed", seed + 1}};
  }
  ds.source["num_vertices"] = ds.graph.num_vertices();
  ds.source["num_edges"] = ds.graph.num_edges();
  return ds;
}

ini::PprParams ppr_params(const RunOptions& o) {
  ini::PprParams p;
  p.alpha = o.alpha;
  p.epsilon = o.epsilon;
  p.direction = ini::parse_push_direction(o.push_direction);
  p.validate();
  return p;
}

json ppr_json(const ini::PprParams& p) {
  return {{"alpha", p.alpha}, {"epsilon", p.epsilon}, {"max_pushes", p.max_pushes},
          {"direction", ini::to_string(p.direction)}};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

struct Prepared {
  json model_json;
  models::GnnModelSpec model;
  Dataset data;
  std::vector<graph::VertexId> targets;
  ini::PprParams ppr;
  fs::path out;
};

Prepared prepare(const RunOptions& o) {
  Prepared p;
  p.out = o.out_dir;
  fs::create_directories(p.out);
  p.model_json = io::read_json(o.model_path);
  p.model = io::model_spec_from_json(p.model_json, fs::path(o.model_path).parent_path());
  p.data = load_dataset(o.data, p.model.input_dim(), o.seed, p.out);
  p.targets = o.targets.empty() ? pipeline::pick_targets(p.data.graph.num_vertices(), o.batch_size, o.seed)
                                : o.targets;
  p.ppr = ppr_params(o);
  return p;
}

json run_config_json(const RunOptions& o, const Prepared& p) {
  return {{"model", p.model_json},       {"model_path", o.model_path}, {"data", p.data.source},
          {"batch_size", p.targets.size()}, {"targets", p.targets},     {"seed", o.seed},
          {"ppr", ppr_json(p.ppr)}};
}

int cmd_infer(const RunOptions& o) {
  auto p = prepare(o);
  const std::size_t threads = o.threads ? o.threads : sched::HostParams{}.ini_threads;
  pipeline::Workload w{p.data.graph, p.data.features, p.targets, p.model, p.ppr};
  auto r = pipeline::run_infer(w, threads, threads);

  graph::write_matrix(r.embeddings, p.out / "embeddings.bin");
  double ini_total = 0, ini_max = 0;
  for (double t : r.ini_seconds) {
    ini_total += t;
    ini_max = std::max(ini_max, t);
  }
  auto config = run_config_json(o, p);
  config["threads"] = threads;
  json report = {{"command", "infer"},
                 {"config", config},
                 {"embedding_rows", r.embeddings.rows()},
                 {"embedding_cols", r.embeddings.cols()},
                 {"wall_seconds", r.wall_seconds},
                 {"ini_seconds_total", ini_total},
                 {"ini_seconds_max", ini_max}};
  io::write_json(report, p.out / "report.json");
  write_text(p.out / "report.csv",
             fmt::format("metric,value\nbatch_size,{}\nwall_seconds,{:.9g}\nini_seconds_total,{:.9g}\n"
                         "ini_seconds_max,{:.9g}\n",
                         r.embeddings.rows(), r.wall_seconds, ini_total, ini_max));
  fmt::print("infer: {} embeddings of width {} in {:.3f} s -> {}\n", r.embeddings.rows(), r.embeddings.cols(),
             r.wall_seconds, (p.out / "embeddings.bin").string());
  return 0;
}

std::pair<ack::AcceleratorConfig, sched::HostParams> load_hardware(const std::string& accel_path) {
  if (accel_path.empty()) return {};
  auto j = io::read_json(accel_path);
  return {io::accelerator_config_from_json(j), io::host_params_from_json(j)};
}

std::string traces_csv(const std::vector<graph::VertexId>& targets, const std::vector<ack::PeTrace>& traces) {
  std::string out;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    auto csv = traces[i].to_csv();
    auto body = csv.find('\n');
    if (i == 0) out += "vertex," + csv.substr(0, body + 1);
    std::size_t pos = body + 1;
    while (pos < csv.size()) {
      auto eol = csv.find('\n', pos);
      out += fmt::format("{},{}", targets[i], csv.substr(pos, eol + 1 - pos));
      pos = eol + 1;
    }
  }
  return out;
}

int cmd_simulate(const RunOptions& o) {
  auto p = prepare(o);
  auto [cfg, host] = load_hardware(o.accel_path);
  const std::size_t threads = o.threads ? o.threads : host.ini_threads;
  pipeline::Workload w{p.data.graph, p.data.features, p.targets, p.model, p.ppr};
  auto r = pipeline::run_simulate(w, cfg, host, threads);

  graph::write_matrix(r.functional.embeddings, p.out / "embeddings.bin");
  auto config = run_config_json(o, p);
  config["accelerator"] = io::to_json(cfg);
  config["host"] = io::to_json(host);
  config["threads"] = threads;
  json report = io::to_json(r.report);
  report["command"] = "simulate";
  report["config"] = config;
  report["max_relative_error_vs_reference"] = r.max_relative_error;
  io::write_json(report, p.out / "report.json");
  write_text(p.out / "report.csv", io::report_csv(r.report));
  write_text(p.out / "timeline.csv", r.timeline.to_csv());
  write_text(p.out / "traces.csv", traces_csv(p.targets, r.traces));
  fmt::print("simulate: C={} latency {:.3f} us, t_initialization {:.3f} us ({:.2f}%), {} cycles\n",
             r.report.batch_size, r.report.latency * 1e6, r.report.t_initialization * 1e6,
             r.report.initialization_fraction * 100, r.report.total_cycles);
  return 0;
}

int cmd_dse(const std::string& platform_path, const std::string& model_set_path, const std::string& out_path) {
  auto platform = io::load_platform(platform_path);
  auto set = io::load_model_set(model_set_path);
  auto result = dse::dse_full(platform, set.ops, set.table);
  auto j = io::to_json(result);
  j["platform"] = {{"name", platform.name}, {"slr_dsp_counts", platform.slr_dsp_counts},
                   {"clock_hz", platform.clock_hz}};
  j["ops"] = set.ops;
  j["alu_cost_table"] = set.table.entries();
  if (!out_path.empty()) io::write_json(j, out_path);
  fmt::print("dse: {} N_ALU={} p_sys={} N_pe={}{}\n", platform.name, result.alu_dsps, result.config.p_sys,
             result.config.num_pes, result.config.heterogeneous_slrs ? " (heterogeneous SLRs)" : "");
  return 0;
}

struct BenchOptions {
  bool analysis = false;
  std::string sweep;
  std::vector<std::size_t> values;
  std::string kind = "gcn";
  std::size_t receptive_field = 64;
  std::size_t width = 256;
  std::size_t layers = 3;
  std::size_t batch_size = 64;
  std::string accel_path;
  DataOptions data;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  std::string out_path;
};

int cmd_bench(const BenchOptions& b) {
  std::string csv;
  if (b.analysis) {
    const std::vector<double> degrees{2, 5, 10, 15, 25};
    const std::vector<std::size_t> layers{1, 2, 3, 4, 5, 6, 7, 8};
    const std::vector<double> widths{128, 256, 512};
    const std::vector<std::size_t> receptive{64, 128, 256};
    csv = cost::cost_grid_csv(degrees, layers, widths, receptive);
  } else {
    if (b.sweep != "layers" && b.sweep != "batch") throw ConfigError("bench needs --analysis or --sweep layers|batch");
    auto values = b.values;
    if (values.empty()) {
      values = b.sweep == "layers" ? std::vector<std::size_t>{3, 5, 8, 16}
                                   : std::vector<std::size_t>{32, 64, 128, 256, 512};
    }
    auto [cfg, host] = load_hardware(b.accel_path);
    const auto kind = models::parse_model_kind(b.kind);
    auto data = load_dataset(b.data, b.width, b.seed, fs::current_path());
    const auto max_batch = b.sweep == "batch" ? *std::max_element(values.begin(), values.end()) : b.batch_size;
    const auto all_targets = pipeline::pick_targets(data.graph.num_vertices(), max_batch, b.seed);
    csv = "sweep,value,latency_s,t_initialization_s,initialization_fraction,mean_vertex_cycles\n";
    for (auto v : values) {
      const auto layers = b.sweep == "layers" ? v : b.layers;
      const auto batch = b.sweep == "batch" ? v : b.batch_size;
      std::vector<std::size_t> dims(layers + 1, b.width);
      auto model = models::make_random_model(kind, dims, b.receptive_field, b.seed);
      std::vector<graph::VertexId> targets(all_targets.begin(), all_targets.begin() + batch);
      pipeline::Workload w{data.graph, data.features, targets, model, {}};
      auto r = pipeline::run_simulate(w, cfg, host, b.threads);
      fmt::format_to(std::back_inserter(csv), "{},{},{:.9g},{:.9g},{:.9g},{:.9g}\n", b.sweep, v, r.report.latency,
                     r.report.t_initialization, r.report.initialization_fraction,
                     static_cast<double>(r.report.total_cycles) / static_cast<double>(batch));
    }
  }
  if (b.out_path.empty()) {
    fmt::print("{}", csv);
  } else {
    write_text(b.out_path, csv);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decoupled GNN inference on a simulated CPU-FPGA accelerator"};
  app.require_subcommand(1);

  RunOptions infer_opts;
  auto* infer = app.add_subcommand("infer", "Run INI and the reference forward pass for a batch");
  add_run_options(infer, infer_opts);

  RunOptions sim_opts;
  auto* simulate = app.add_subcommand("simulate", "Simulate a batch on the accelerator and report latency");
  add_run_options(simulate, sim_opts);
  simulate->add_option("--accel", sim_opts.accel_path, "Accelerator config JSON (from dse); defaults if omitted")
      ->check(CLI::ExistingFile);

  std::string platform_path, model_set_path, dse_out;
  auto* dse_cmd = app.add_subcommand("dse", "Size the accelerator for a platform and a set of models");
  dse_cmd->add_option("--platform", platform_path, "Platform JSON")->required()->check(CLI::ExistingFile);
  dse_cmd->add_option("--models", model_set_path, "Model set JSON")->required()->check(CLI::ExistingFile);
  dse_cmd->add_option("--out", dse_out, "Accelerator config JSON to write");

  BenchOptions bench_opts;
  auto* bench = app.add_subcommand("bench", "Cost-model grids and simulator sweeps as CSV");
  bench->add_flag("--analysis", bench_opts.analysis, "Coupled vs decoupled cost grid");
  bench->add_option("--sweep", bench_opts.sweep, "layers or batch")->check(CLI::IsMember({"layers", "batch"}));
  bench->add_option("--values", bench_opts.values, "Sweep values")->delimiter(',');
  bench->add_option("--kind", bench_opts.kind, "gcn, sage or gat");
  bench->add_option("--receptive-field,-N", bench_opts.receptive_field, "Receptive field size");
  bench->add_option("--width,-f", bench_opts.width, "Feature width of every layer");
  bench->add_option("--layers,-L", bench_opts.layers, "Layers when sweeping batch size");
  bench->add_option("--batch-size,-C", bench_opts.batch_size, "Batch size when sweeping layers");
  bench->add_option("--accel", bench_opts.accel_path, "Accelerator config JSON")->check(CLI::ExistingFile);
  bench->add_option("--seed", bench_opts.seed, "Seed for data, targets and weights");
  bench->add_option("--threads", bench_opts.threads, "Worker threads")->check(CLI::PositiveNumber);
  bench->add_option("--out", bench_opts.out_path, "CSV file (stdout if omitted)");
  add_data_options(bench, bench_opts.data);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*infer) return cmd_infer(infer_opts);
    if (*simulate) return cmd_simulate(sim_opts);
    if (*dse_cmd) return cmd_dse(platform_path, model_set_path, dse_out);
    if (*bench) return cmd_bench(bench_opts);
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 2;
}
