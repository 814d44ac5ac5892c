#include "hvacd/kernels.hpp"

#include <exception>

#ifdef HVACD_USE_OPENMP
#include <omp.h>
#endif

namespace hvacd {

namespace {

// Applies fn to every index in parallel. Items are independent and written
// to their own slot, so the output does not depend on the schedule.
template <class Out, class Fn>
std::vector<Out> map_indexed(std::size_t count, int workers, Fn&& fn) {
  std::vector<Out> out(count);
  std::vector<std::exception_ptr> errors(count);
  const long n = static_cast<long>(count);
#ifdef HVACD_USE_OPENMP
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers < 1 ? 1 : workers)
#else
  (void)workers;
#endif
  for (long i = 0; i < n; ++i) {
    try {
      out[i] = fn(static_cast<std::size_t>(i));
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace

IcaDayOutput extract_hvac(const IcaDayTask& task) {
  IcaDayOutput out;
  out.model = run_ica(task.residuals, task.options);
  const Vector mean = task.residuals.rowwise().mean();
  out.estimate = select_hvac(out.model, std::span<const double>(task.temps.data(), task.temps.size()), mean);
  return out;
}

namespace serial {

std::vector<IcaDayOutput> extract_hvac_batch(std::span<const IcaDayTask> tasks) {
  std::vector<IcaDayOutput> out;
  out.reserve(tasks.size());
  for (const IcaDayTask& t : tasks) out.push_back(extract_hvac(t));
  return out;
}

std::vector<DisaggregationResult> fine_tune_batch(std::span<const FineTuneProblem> problems,
                                                  const FineTuneConfig& cfg) {
  std::vector<DisaggregationResult> out;
  out.reserve(problems.size());
  for (const FineTuneProblem& p : problems) out.push_back(fine_tune(p, cfg));
  return out;
}

}  // namespace serial

namespace parallel {

std::vector<IcaDayOutput> extract_hvac_batch(std::span<const IcaDayTask> tasks, int workers) {
  return map_indexed<IcaDayOutput>(tasks.size(), workers, [&](std::size_t i) { return extract_hvac(tasks[i]); });
}

std::vector<DisaggregationResult> fine_tune_batch(std::span<const FineTuneProblem> problems,
                                                  const FineTuneConfig& cfg, int workers) {
  return map_indexed<DisaggregationResult>(problems.size(), workers,
                                           [&](std::size_t i) { return fine_tune(problems[i], cfg); });
}

}  // namespace parallel

bool openmp_enabled() {
#ifdef HVACD_USE_OPENMP
  return true;
#else
  return false;
#endif
}

}  // namespace hvacd
