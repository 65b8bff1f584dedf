#ifndef SBWALK_HARNESS_HPP
#define SBWALK_HARNESS_HPP

#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <type_traits>
#include <vector>

#include "sbwalk/errors.hpp"
#include "sbwalk/rng.hpp"

namespace sbwalk {

/// Runs fn(trial_index, trial_seed) for trials independent trials, fanning
/// out across up to `threads` workers. Results land in trial order, and each
/// trial's seed depends only on (master_seed, index), so the outcome is
/// independent of scheduling.
template <typename Fn>
auto run_trials(std::int64_t trials, std::uint64_t master_seed, int threads,
                Fn&& fn)
    -> std::vector<std::invoke_result_t<Fn&, std::int64_t, std::uint64_t>> {
  using Result = std::invoke_result_t<Fn&, std::int64_t, std::uint64_t>;
  static_assert(std::is_default_constructible_v<Result>,
                "trial results must be default-constructible");
  if (trials <= 0) throw ValidationError("run_trials: trials must be positive");
  std::vector<Result> results(static_cast<std::size_t>(trials));
  int workers = threads > 0
                    ? threads
                    : static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  workers = static_cast<int>(
      std::min<std::int64_t>(workers, trials));

  if (workers == 1) {
    for (std::int64_t i = 0; i < trials; ++i)
      results[static_cast<std::size_t>(i)] = fn(i, trial_seed(master_seed, i));
    return results;
  }

  std::atomic<std::int64_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    while (!stop.load(std::memory_order_relaxed)) {
      const std::int64_t i = next.fetch_add(1);
      if (i >= trials) break;
      try {
        results[static_cast<std::size_t>(i)] = fn(i, trial_seed(master_seed, i));
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        stop.store(true);
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& thread : pool) thread.join();
  if (error) std::rethrow_exception(error);
  return results;
}

}  // namespace sbwalk

#endif  // SBWALK_HARNESS_HPP
