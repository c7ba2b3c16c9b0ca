#pragma once

// Experiment orchestration. Each experiment maps a config to CSV tables and
// named checks; run() writes the tables and a manifest to an output
// directory. Scenarios are sharded over worker threads but results are
// always gathered in scenario order, so outputs do not depend on the worker
// count.

#include <atomic>
#include <exception>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "ebmlab/lab/config.hpp"
#include "ebmlab/lab/csv.hpp"
#include "ebmlab/lab/manifest.hpp"

namespace ebmlab::lab {

struct NamedTable {
  std::string file;
  Table table;
};

struct ExperimentOutput {
  std::vector<NamedTable> tables;
  std::vector<CheckResult> checks;
};

/// Module errors propagate as ebmlab::Error.
ExperimentOutput run_experiment(Experiment experiment, const ExperimentConfig& config,
                                int workers);

/// Runs `experiments` in order, writes every table plus manifest.json under
/// `out_dir`, and returns the manifest. A module error inside an experiment
/// becomes a failed "<experiment>/error" entry.
RunManifest run(const ExperimentConfig& config, std::span<const Experiment> experiments,
                const std::filesystem::path& out_dir, int workers);

/// LAB_WORKERS when set to a positive integer, else the hardware thread count.
int default_worker_count();

/// out[i] = fn(i) for i < count. If any call throws, the exception from the
/// lowest index is rethrown after all workers finish.
template <typename Fn>
auto parallel_map(std::size_t count, int workers, Fn fn)
    -> std::vector<decltype(fn(std::size_t{}))> {
  using Result = decltype(fn(std::size_t{}));
  std::vector<std::optional<Result>> slots(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        slots[i].emplace(fn(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads =
      std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, workers)));
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<Result> out;
  out.reserve(count);
  for (auto& slot : slots) out.push_back(std::move(*slot));
  return out;
}

}  // namespace ebmlab::lab
