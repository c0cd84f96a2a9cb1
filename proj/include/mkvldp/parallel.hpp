#pragma once

#include <atomic>
#include <condition_variable>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace mkvldp {

/// Fixed-size pool of worker threads.
///
/// parallel_for splits [0, n) into contiguous chunks, one per worker, and
/// blocks until every chunk is done. Work assignment never changes results:
/// callers write to disjoint output slots and reduce in index order.
class WorkerPool {
 public:
  /// threads == 0 means std::thread::hardware_concurrency().
  explicit WorkerPool(std::size_t threads = 1);
  ~WorkerPool();

  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  std::size_t size() const noexcept { return workers_.size() + 1; }

  /// Calls body(begin, end) on disjoint subranges covering [0, n). Rethrows
  /// the exception of the lowest-indexed failing chunk. A call made while the
  /// pool is already busy runs inline.
  void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

 private:
  void worker_loop(std::size_t index);

  std::vector<std::thread> workers_;
  std::mutex mutex_;
  std::condition_variable start_cv_;
  std::condition_variable done_cv_;
  const std::function<void(std::size_t, std::size_t)>* body_ = nullptr;
  std::size_t n_ = 0;
  std::size_t generation_ = 0;
  std::size_t pending_ = 0;
  bool stop_ = false;
  std::atomic<bool> busy_{false};
  std::vector<std::exception_ptr> errors_;
};

/// Runs body over [0, n) on the pool, or inline when pool is null.
void parallel_for(WorkerPool* pool, std::size_t n,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace mkvldp
