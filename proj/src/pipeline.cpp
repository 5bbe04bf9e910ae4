#include "ackgnn/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <deque>
#include <exception>
#include <mutex>
#include <numeric>
#include <optional>
#include <random>
#include <thread>

#include <fmt/format.h>

#include "ackgnn/error.hpp"

namespace ackgnn::pipeline {

std::vector<VertexId> pick_targets(std::size_t num_vertices, std::size_t batch_size, std::uint64_t seed) {
  if (batch_size < 1) throw ConfigError("batch size must be >= 1");
  if (batch_size > num_vertices) {
    throw ConfigError(fmt::format("batch size {} exceeds vertex count {}", batch_size, num_vertices));
  }
  std::vector<VertexId> all(num_vertices);
  std::iota(all.begin(), all.end(), VertexId{0});
  std::mt19937_64 rng(seed);
  // Partial Fisher-Yates with explicit index draws, stable across standard libraries.
  for (std::size_t i = 0; i < batch_size; ++i) {
    const auto j = i + static_cast<std::size_t>(rng() % (num_vertices - i));
    std::swap(all[i], all[j]);
  }
  all.resize(batch_size);
  return all;
}

double relative_error(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) throw DimensionError("relative_error: length mismatch");
  double diff = 0, scale = 1;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i])));
    scale = std::max(scale, std::abs(static_cast<double>(b[i])));
  }
  return diff / scale;
}

namespace {

class SlotQueue {
 public:
  void push(std::size_t slot) {
    {
      std::lock_guard lock(mu_);
      items_.push_back(slot);
    }
    cv_.notify_one();
  }

  void close() {
    {
      std::lock_guard lock(mu_);
      closed_ = true;
    }
    cv_.notify_all();
  }

  std::optional<std::size_t> pop() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return closed_ || !items_.empty(); });
    if (items_.empty()) return std::nullopt;
    auto s = items_.front();
    items_.pop_front();
    return s;
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::size_t> items_;
  bool closed_ = false;
};

class FirstError {
 public:
  void capture() {
    std::lock_guard lock(mu_);
    if (!error_) error_ = std::current_exception();
    failed_ = true;
  }
  bool failed() const { return failed_.load(); }
  void rethrow() {
    if (error_) std::rethrow_exception(error_);
  }

 private:
  std::mutex mu_;
  std::exception_ptr error_;
  std::atomic<bool> failed_{false};
};

}  // namespace

InferOutput run_infer(const Workload& w, std::size_t ini_threads, std::size_t inference_threads) {
  if (w.targets.empty()) throw ConfigError("batch must contain at least one vertex");
  if (ini_threads < 1 || inference_threads < 1) throw ConfigError("thread counts must be >= 1");
  w.model.validate();
  w.ppr.validate();
  if (w.features.cols() != w.model.input_dim()) {
    throw DimensionError(fmt::format("features have {} columns but the model expects {}", w.features.cols(),
                                     w.model.input_dim()));
  }
  for (auto t : w.targets) {
    if (t >= w.graph.num_vertices()) throw DimensionError(fmt::format("target {} is not a vertex", t));
  }

  const auto c = w.targets.size();
  InferOutput out;
  out.embeddings = FeatureMatrix(c, w.model.output_dim());
  out.subgraphs.resize(c);
  out.ini_seconds.assign(c, 0.0);

  const auto t0 = std::chrono::steady_clock::now();
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> ini_running{ini_threads};
  SlotQueue ready;
  FirstError err;

  auto ini_worker = [&] {
    try {
      for (auto i = next++; i < c && !err.failed(); i = next++) {
        const auto s = std::chrono::steady_clock::now();
        out.subgraphs[i] =
            ini::build_receptive_field(w.graph, w.features, w.targets[i], w.model.receptive_field, w.ppr);
        out.ini_seconds[i] = std::chrono::duration<double>(std::chrono::steady_clock::now() - s).count();
        ready.push(i);
      }
    } catch (...) {
      err.capture();
    }
    if (--ini_running == 0) ready.close();
  };

  auto inference_worker = [&] {
    while (auto i = ready.pop()) {
      if (err.failed()) continue;
      try {
        auto emb = models::forward(out.subgraphs[*i], w.model);
        std::copy(emb.begin(), emb.end(), out.embeddings.row(*i).begin());
      } catch (...) {
        err.capture();
      }
    }
  };

  {
    std::vector<std::jthread> workers;
    for (std::size_t k = 0; k < ini_threads; ++k) workers.emplace_back(ini_worker);
    for (std::size_t k = 0; k < inference_threads; ++k) workers.emplace_back(inference_worker);
  }
  err.rethrow();
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

SimulateOutput run_simulate(const Workload& w, const ack::AcceleratorConfig& cfg, const sched::HostParams& host,
                            std::size_t threads) {
  cfg.validate();
  host.validate();
  SimulateOutput out;
  out.functional = run_infer(w, std::max<std::size_t>(threads, 1), std::max<std::size_t>(threads, 1));

  const auto c = w.targets.size();
  out.traces.resize(c);
  std::vector<double> errors(c, 0.0);
  std::atomic<std::size_t> next{0};
  FirstError err;
  auto sim_worker = [&] {
    try {
      for (auto i = next++; i < c && !err.failed(); i = next++) {
        auto pe = ack::run_pe(out.functional.subgraphs[i], w.model, cfg);
        errors[i] = relative_error(pe.embedding, out.functional.embeddings.row(i));
        out.traces[i] = std::move(pe.trace);
      }
    } catch (...) {
      err.capture();
    }
  };
  {
    std::vector<std::jthread> workers;
    for (std::size_t k = 0; k < std::max<std::size_t>(threads, 1); ++k) workers.emplace_back(sim_worker);
  }
  err.rethrow();
  out.max_relative_error = *std::max_element(errors.begin(), errors.end());

  out.work.resize(c);
  for (std::size_t i = 0; i < c; ++i) {
    const auto& sub = out.functional.subgraphs[i];
    out.work[i] = {w.targets[i], host.t_ini_per_vertex,
                   sched::t_load(sub.num_vertices(), sub.num_edges(), w.model.input_dim(), host),
                   ack::trace_seconds(out.traces[i], cfg), sched::t_return(w.model.output_dim(), host)};
  }
  out.timeline = sched::schedule_batch(out.work, host.ini_threads, cfg.num_pes);
  out.report = sched::latency_report(out.timeline, out.traces);
  return out;
}

}  // namespace ackgnn::pipeline
