#pragma once

#include <atomic>
#include <barrier>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace psz::detail {

/// Runs task(m) for every node m, spread over a fixed set of persistent
/// threads. Node m always runs on worker m % threads, and run() returns only
/// after every node finished, so results never depend on scheduling.
class NodeExecutor {
 public:
  NodeExecutor(std::size_t threads, std::size_t nodes)
      : threads_(threads < 1 ? 1 : (threads > nodes ? (nodes < 1 ? 1 : nodes) : threads)),
        nodes_(nodes),
        errors_(nodes),
        start_(static_cast<std::ptrdiff_t>(threads_)),
        done_(static_cast<std::ptrdiff_t>(threads_)) {
    for (std::size_t t = 1; t < threads_; ++t) {
      workers_.emplace_back([this, t] { worker(t); });
    }
  }

  ~NodeExecutor() {
    if (workers_.empty()) return;
    stop_.store(true);
    start_.arrive_and_wait();
    for (auto& w : workers_) w.join();
  }

  NodeExecutor(const NodeExecutor&) = delete;
  NodeExecutor& operator=(const NodeExecutor&) = delete;

  std::size_t threads() const noexcept { return threads_; }

  /// Rethrows the exception of the lowest-numbered failing node.
  void run(const std::function<void(std::size_t)>& task) {
    task_ = &task;
    if (threads_ > 1) start_.arrive_and_wait();
    slice(0);
    if (threads_ > 1) done_.arrive_and_wait();
    task_ = nullptr;
    for (auto& e : errors_) {
      if (e) {
        auto first = e;
        for (auto& clear : errors_) clear = nullptr;
        std::rethrow_exception(first);
      }
    }
  }

 private:
  void slice(std::size_t t) {
    for (std::size_t m = t; m < nodes_; m += threads_) {
      try {
        (*task_)(m);
      } catch (...) {
        errors_[m] = std::current_exception();
      }
    }
  }

  void worker(std::size_t t) {
    for (;;) {
      start_.arrive_and_wait();
      if (stop_.load()) return;
      slice(t);
      done_.arrive_and_wait();
    }
  }

  std::size_t threads_;
  std::size_t nodes_;
  std::vector<std::exception_ptr> errors_;
  const std::function<void(std::size_t)>* task_ = nullptr;
  std::atomic<bool> stop_{false};
  std::barrier<> start_;
  std::barrier<> done_;
  std::vector<std::thread> workers_;
};

}  // namespace psz::detail
