#pragma once

#include <condition_variable>
#include <cstddef>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace minipic {

/// Persistent team of workers with a fork-join dispatch.
///
/// Worker 0 is the calling thread; workers 1..n-1 are pool threads. run()
/// hands every worker the same callable (tagged with its worker index) and
/// returns once all have finished, so callers can rely on a quiescence point
/// after each parallel phase.
class ThreadPool {
public:
  explicit ThreadPool(int workers);
  ~ThreadPool();

  ThreadPool(const ThreadPool&) = delete;
  ThreadPool& operator=(const ThreadPool&) = delete;

  int worker_count() const { return workers_; }

  /// Execute fn(worker) on every worker; blocks until all are done.
  /// Exceptions thrown by any worker are rethrown on the calling thread.
  void run(const std::function<void(int)>& fn);

  /// Static contiguous split of [0, total): worker w gets one range,
  /// fn(worker, begin, end). Ranges are ascending in worker index.
  void for_ranges(std::size_t total,
                  const std::function<void(int, std::size_t, std::size_t)>& fn);

  /// Range assigned to one worker under the static split used by for_ranges.
  static std::pair<std::size_t, std::size_t> range_of(std::size_t total,
                                                      int worker, int workers);

private:
  void worker_loop(int worker);

  int workers_;
  std::vector<std::thread> threads_;
  std::mutex mutex_;
  std::condition_variable start_cv_;
  std::condition_variable done_cv_;
  const std::function<void(int)>* job_ = nullptr;
  std::uint64_t generation_ = 0;
  int pending_ = 0;
  bool stop_ = false;
  std::exception_ptr first_error_;
};

}  // namespace minipic
