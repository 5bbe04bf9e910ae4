#pragma once

#include <cstdint>
#include <vector>

#include "ackgnn/ack.hpp"
#include "ackgnn/graph.hpp"
#include "ackgnn/ini.hpp"
#include "ackgnn/models.hpp"
#include "ackgnn/scheduler.hpp"

namespace ackgnn::pipeline {

using graph::FeatureMatrix;
using graph::VertexId;

/// C distinct target vertices drawn uniformly from [0, num_vertices).
/// Throws ConfigError when C is 0 or exceeds the vertex count.
std::vector<VertexId> pick_targets(std::size_t num_vertices, std::size_t batch_size, std::uint64_t seed);

struct Workload {
  const graph::CsrGraph& graph;
  const FeatureMatrix& features;
  std::vector<VertexId> targets;
  const models::GnnModelSpec& model;
  ini::PprParams ppr;
};

struct InferOutput {
  /// Row i is the embedding of targets[i].
  FeatureMatrix embeddings;
  std::vector<ini::InducedSubgraph> subgraphs;
  /// Measured wall time of INI per target, seconds.
  std::vector<double> ini_seconds;
  double wall_seconds = 0;
};

/// INI workers build receptive fields and hand them to inference workers
/// through a queue. Results land in batch order whatever the completion
/// order, so the output does not depend on the thread counts.
InferOutput run_infer(const Workload& w, std::size_t ini_threads, std::size_t inference_threads);

struct SimulateOutput {
  InferOutput functional;
  std::vector<ack::PeTrace> traces;
  std::vector<sched::VertexWork> work;
  sched::ScheduleTimeline timeline;
  sched::BatchLatencyReport report;
  /// Largest normwise relative difference between a simulated PE embedding
  /// and the reference embedding of the same vertex.
  double max_relative_error = 0;
};

/// Functional run plus one simulated PE per vertex, then the batch schedule.
/// INI time per vertex comes from host.t_ini_per_vertex, not the wall clock.
SimulateOutput run_simulate(const Workload& w, const ack::AcceleratorConfig& cfg, const sched::HostParams& host,
                            std::size_t threads);

/// max |a - b| / max(1, max |b|).
double relative_error(std::span<const float> a, std::span<const float> b);

}  // namespace ackgnn::pipeline
