#include "mkvldp/parallel.hpp"

#include <algorithm>

namespace mkvldp {

WorkerPool::WorkerPool(std::size_t threads) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  errors_.resize(threads);
  for (std::size_t i = 1; i < threads; ++i) {
    workers_.emplace_back([this, i] { worker_loop(i); });
  }
}

WorkerPool::~WorkerPool() {
  {
    std::lock_guard<std::mutex> lock(mutex_);
    stop_ = true;
  }
  start_cv_.notify_all();
  for (auto& t : workers_) t.join();
}

namespace {

std::pair<std::size_t, std::size_t> chunk(std::size_t n, std::size_t parts, std::size_t i) {
  return {n * i / parts, n * (i + 1) / parts};
}

}  // namespace

void WorkerPool::worker_loop(std::size_t index) {
  std::size_t seen = 0;
  for (;;) {
    const std::function<void(std::size_t, std::size_t)>* body = nullptr;
    std::size_t n = 0;
    {
      std::unique_lock<std::mutex> lock(mutex_);
      start_cv_.wait(lock, [&] { return stop_ || generation_ != seen; });
      if (stop_) return;
      seen = generation_;
      body = body_;
      n = n_;
    }
    const auto [b, e] = chunk(n, size(), index);
    try {
      if (b < e) (*body)(b, e);
    } catch (...) {
      errors_[index] = std::current_exception();
    }
    {
      std::lock_guard<std::mutex> lock(mutex_);
      if (--pending_ == 0) done_cv_.notify_one();
    }
  }
}

void WorkerPool::parallel_for(std::size_t n,
                              const std::function<void(std::size_t, std::size_t)>& body) {
  if (n == 0) return;
  bool expected = false;
  // nested or concurrent calls run inline on the calling thread
  if (workers_.empty() || n == 1 || !busy_.compare_exchange_strong(expected, true)) {
    body(0, n);
    return;
  }
  struct Release {
    std::atomic<bool>& flag;
    ~Release() { flag.store(false); }
  } release{busy_};
  std::fill(errors_.begin(), errors_.end(), nullptr);
  {
    std::lock_guard<std::mutex> lock(mutex_);
    body_ = &body;
    n_ = n;
    pending_ = workers_.size();
    ++generation_;
  }
  start_cv_.notify_all();
  const auto [b, e] = chunk(n, size(), 0);
  try {
    if (b < e) body(b, e);
  } catch (...) {
    errors_[0] = std::current_exception();
  }
  {
    std::unique_lock<std::mutex> lock(mutex_);
    done_cv_.wait(lock, [&] { return pending_ == 0; });
    body_ = nullptr;
  }
  for (auto& err : errors_) {
    if (err) std::rethrow_exception(err);
  }
}

void parallel_for(WorkerPool* pool, std::size_t n,
                  const std::function<void(std::size_t, std::size_t)>& body) {
  if (pool == nullptr) {
    if (n > 0) body(0, n);
    return;
  }
  pool->parallel_for(n, body);
}

}  // namespace mkvldp
