#include "paradigms/worker_pool.hpp"

#include <stdexcept>

namespace paradigms {

WorkerPool::WorkerPool(std::size_t workers) {
  if (workers == 0) throw std::invalid_argument("worker pool needs at least one worker");
  threads_.reserve(workers - 1);
  for (std::size_t i = 1; i < workers; ++i) threads_.emplace_back([this] { worker_loop(); });
}

WorkerPool::~WorkerPool() {
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
  }
  wake_.notify_all();
  for (auto& t : threads_) t.join();
}

// Claims indices of the current job until none remain. Called with mutex_ held.
void WorkerPool::drain() {
  std::unique_lock lock(mutex_, std::adopt_lock);
  ++active_;
  while (next_ < job_size_) {
    const std::size_t i = next_++;
    const auto* fn = job_;
    lock.unlock();
    try {
      (*fn)(i);
    } catch (...) {
      lock.lock();
      if (!error_) error_ = std::current_exception();
      next_ = job_size_;
      continue;
    }
    lock.lock();
  }
  if (--active_ == 0) done_.notify_all();
  lock.release();
}

void WorkerPool::worker_loop() {
  std::size_t seen = 0;
  std::unique_lock lock(mutex_);
  for (;;) {
    wake_.wait(lock, [&] { return stopping_ || generation_ != seen; });
    if (stopping_) return;
    seen = generation_;
    lock.release();
    drain();
    lock = std::unique_lock(mutex_, std::adopt_lock);
  }
}

void WorkerPool::parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  if (threads_.empty()) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::unique_lock lock(mutex_);
  job_ = &fn;
  job_size_ = n;
  next_ = 0;
  error_ = nullptr;
  ++generation_;
  wake_.notify_all();
  lock.release();
  drain();
  lock = std::unique_lock(mutex_, std::adopt_lock);
  done_.wait(lock, [&] { return active_ == 0 && next_ >= job_size_; });
  job_ = nullptr;
  job_size_ = 0;
  if (error_) {
    auto err = error_;
    error_ = nullptr;
    std::rethrow_exception(err);
  }
}

}  // namespace paradigms
