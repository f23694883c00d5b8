#pragma once

#include <condition_variable>
#include <cstdint>
#include <memory>
#include <mutex>
#include <type_traits>
#include <utility>

#include "incdsi/index.hpp"

namespace incdsi {

/// Mutex that grants the lock in arrival order.
class FifoMutex {
 public:
  void lock();
  void unlock();

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::uint64_t next_ticket_ = 0;
  std::uint64_t serving_ = 0;
};

/// Single-writer, multi-reader wrapper around an IndexState.
///
/// Writers are serialized in FIFO order through `update`; each successful update publishes a
/// new IndexView atomically. Readers call `snapshot()` and never wait on an
/// in-flight optimization, only on the pointer swap itself.
class LiveIndex {
 public:
  explicit LiveIndex(IndexState state);

  LiveIndex(const LiveIndex&) = delete;
  LiveIndex& operator=(const LiveIndex&) = delete;

  /// Last committed view.
  IndexView snapshot() const;

  /// Runs fn(IndexState&) under the writer lock, then publishes the result.
  /// If fn throws, whatever rows it managed to append stay unpublished until
  /// the next successful update.
  template <class Fn>
  decltype(auto) update(Fn&& fn) {
    std::lock_guard lock(write_mu_);
    if constexpr (std::is_void_v<decltype(fn(state_))>) {
      fn(state_);
      publish();
    } else {
      decltype(auto) result = fn(state_);
      publish();
      return result;
    }
  }

  /// Deep copy of the writer-side state, taken under the writer lock.
  IndexState copy_state() const;

 private:
  void publish();

  mutable FifoMutex write_mu_;
  IndexState state_;
  std::shared_ptr<const IndexView> published_;
};

}  // namespace incdsi
