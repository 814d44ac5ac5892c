#pragma once

#include <span>
#include <vector>

#include "hvacd/finetune.hpp"
#include "hvacd/ica.hpp"

namespace hvacd {

/// One hot day's ICA work item.
struct IcaDayTask {
  Matrix residuals;      // N x K
  Vector temps;          // 24 degC
  IcaOptions options;    // seed already derived for this day
};

struct IcaDayOutput {
  IcaModel model;
  HvacIcaEstimate estimate;
};

/// Runs ICA and HVAC-source selection for a single task.
IcaDayOutput extract_hvac(const IcaDayTask& task);

// Both namespaces produce identical results in identical order; the serial
// one is the reference used by tests and the benchmark. A failing item
// rethrows the exception of the lowest failing index.
namespace serial {
std::vector<IcaDayOutput> extract_hvac_batch(std::span<const IcaDayTask> tasks);
std::vector<DisaggregationResult> fine_tune_batch(std::span<const FineTuneProblem> problems,
                                                  const FineTuneConfig& cfg);
}  // namespace serial

namespace parallel {
std::vector<IcaDayOutput> extract_hvac_batch(std::span<const IcaDayTask> tasks, int workers);
std::vector<DisaggregationResult> fine_tune_batch(std::span<const FineTuneProblem> problems,
                                                  const FineTuneConfig& cfg, int workers);
}  // namespace parallel

/// True when the library was built with OpenMP.
bool openmp_enabled();

}  // namespace hvacd
