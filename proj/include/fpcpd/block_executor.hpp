#pragma once

// Intra-block parallel execution.
//
// A BlockExecutor owns (threads - 1) persistent workers; the calling thread
// acts as worker 0. run() hands every entry of one block to exactly one
// worker and returns once all of them have been applied. Updates must only
// touch the factor rows named by their entry; for an interchangeable block
// that makes the result independent of how entries are distributed.

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <type_traits>
#include <utility>
#include <vector>

#include "fpcpd/block_plan.hpp"

namespace fpcpd {

enum class Schedule {
  /// Contiguous chunk per worker, fixed by (block size, thread count).
  Static,
  /// Workers claim entries from a shared counter.
  Dynamic,
};

class BlockExecutor {
public:
  explicit BlockExecutor(std::size_t threads = 1, Schedule schedule = Schedule::Static)
      : threads_(threads == 0 ? 1 : threads), schedule_(schedule) {
    workers_.reserve(threads_ - 1);
    for (std::size_t w = 1; w < threads_; ++w) workers_.emplace_back([this, w] { worker_loop(w); });
  }

  ~BlockExecutor() {
    stop_.store(true, std::memory_order_relaxed);
    generation_.fetch_add(1, std::memory_order_release);
    generation_.notify_all();
    for (auto& t : workers_) t.join();
  }

  BlockExecutor(const BlockExecutor&) = delete;
  BlockExecutor& operator=(const BlockExecutor&) = delete;

  std::size_t threads() const { return threads_; }

  /// Applies update(entry) once for every entry of the block.
  template <class Update>
  void run(Block block, Update&& update) {
    using Fn = std::remove_reference_t<Update>;
    if (threads_ == 1 || block.size() <= 1) {
      for (const Entry& e : block) update(e);
      return;
    }
    job_.block = block;
    job_.ctx = const_cast<void*>(static_cast<const void*>(&update));
    job_.call = [](void* ctx, const Entry& e) { (*static_cast<Fn*>(ctx))(e); };
    next_.store(0, std::memory_order_relaxed);
    pending_.store(threads_ - 1, std::memory_order_relaxed);
    generation_.fetch_add(1, std::memory_order_release);
    generation_.notify_all();

    work(0);

    for (;;) {
      std::size_t left = pending_.load(std::memory_order_acquire);
      if (left == 0) break;
      for (int spin = 0; spin < 256 && left != 0; ++spin) left = pending_.load(std::memory_order_acquire);
      if (left == 0) break;
      pending_.wait(left, std::memory_order_acquire);
    }
    if (error_) {
      auto e = std::exchange(error_, nullptr);
      std::rethrow_exception(e);
    }
  }

private:
  struct Job {
    Block block;
    void* ctx = nullptr;
    void (*call)(void*, const Entry&) = nullptr;
  };

  void work(std::size_t w) {
    const Block block = job_.block;
    try {
      if (schedule_ == Schedule::Static) {
        const std::size_t n = block.size();
        const std::size_t lo = n * w / threads_, hi = n * (w + 1) / threads_;
        for (std::size_t e = lo; e < hi; ++e) job_.call(job_.ctx, block[e]);
      } else {
        for (std::size_t e = next_.fetch_add(1, std::memory_order_relaxed); e < block.size();
             e = next_.fetch_add(1, std::memory_order_relaxed))
          job_.call(job_.ctx, block[e]);
      }
    } catch (...) {
      std::lock_guard lock(error_mutex_);
      if (!error_) error_ = std::current_exception();
    }
  }

  void worker_loop(std::size_t w) {
    std::uint64_t seen = 0;
    for (;;) {
      std::uint64_t g = generation_.load(std::memory_order_acquire);
      for (int spin = 0; spin < 256 && g == seen; ++spin) g = generation_.load(std::memory_order_acquire);
      while (g == seen) {
        generation_.wait(seen, std::memory_order_acquire);
        g = generation_.load(std::memory_order_acquire);
      }
      seen = g;
      if (stop_.load(std::memory_order_relaxed)) return;
      work(w);
      if (pending_.fetch_sub(1, std::memory_order_acq_rel) == 1) pending_.notify_one();
    }
  }

  std::size_t threads_;
  Schedule schedule_;
  Job job_;
  std::vector<std::thread> workers_;
  std::atomic<std::uint64_t> generation_{0};
  std::atomic<std::size_t> pending_{0};
  std::atomic<std::size_t> next_{0};
  std::atomic<bool> stop_{false};
  std::mutex error_mutex_;
  std::exception_ptr error_;
};

/// Applies update to every entry of one block on the executor's workers.
template <class Update>
void run_block_parallel(BlockExecutor& executor, Block block, Update&& update) {
  executor.run(block, std::forward<Update>(update));
}

}  // namespace fpcpd
