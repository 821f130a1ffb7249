#include "minipic/thread_pool.hpp"

#include <stdexcept>

namespace minipic {

ThreadPool::ThreadPool(int workers) : workers_(workers < 1 ? 1 : workers) {
  threads_.reserve(static_cast<std::size_t>(workers_ - 1));
  for (int w = 1; w < workers_; ++w) {
    threads_.emplace_back([this, w] { worker_loop(w); });
  }
}

ThreadPool::~ThreadPool() {
  {
    std::lock_guard<std::mutex> lock(mutex_);
    stop_ = true;
  }
  start_cv_.notify_all();
  for (auto& t : threads_) t.join();
}

void ThreadPool::worker_loop(int worker) {
  std::uint64_t seen = 0;
  for (;;) {
    const std::function<void(int)>* job = nullptr;
    {
      std::unique_lock<std::mutex> lock(mutex_);
      start_cv_.wait(lock, [&] { return stop_ || generation_ != seen; });
      if (stop_) return;
      seen = generation_;
      job = job_;
    }
    try {
      (*job)(worker);
    } catch (...) {
      std::lock_guard<std::mutex> lock(mutex_);
      if (!first_error_) first_error_ = std::current_exception();
    }
    {
      std::lock_guard<std::mutex> lock(mutex_);
      if (--pending_ == 0) done_cv_.notify_all();
    }
  }
}

void ThreadPool::run(const std::function<void(int)>& fn) {
  if (workers_ == 1) {
    fn(0);
    return;
  }
  {
    std::lock_guard<std::mutex> lock(mutex_);
    job_ = &fn;
    pending_ = workers_ - 1;
    first_error_ = nullptr;
    ++generation_;
  }
  start_cv_.notify_all();
  try {
    fn(0);
  } catch (...) {
    std::unique_lock<std::mutex> lock(mutex_);
    done_cv_.wait(lock, [&] { return pending_ == 0; });
    throw;
  }
  std::unique_lock<std::mutex> lock(mutex_);
  done_cv_.wait(lock, [&] { return pending_ == 0; });
  if (first_error_) std::rethrow_exception(first_error_);
}

std::pair<std::size_t, std::size_t> ThreadPool::range_of(std::size_t total,
                                                         int worker,
                                                         int workers) {
  const std::size_t w = static_cast<std::size_t>(worker);
  const std::size_t n = static_cast<std::size_t>(workers);
  const std::size_t base = total / n;
  const std::size_t rem = total % n;
  const std::size_t begin = w * base + (w < rem ? w : rem);
  const std::size_t len = base + (w < rem ? 1 : 0);
  return {begin, begin + len};
}

void ThreadPool::for_ranges(
    std::size_t total,
    const std::function<void(int, std::size_t, std::size_t)>& fn) {
  run([&](int w) {
    auto [begin, end] = range_of(total, w, workers_);
    if (begin < end) fn(w, begin, end);
  });
}

}  // namespace minipic
