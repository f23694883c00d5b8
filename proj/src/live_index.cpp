#include "incdsi/live_index.hpp"

#include <atomic>

namespace incdsi {

void FifoMutex::lock() {
  std::unique_lock lock(mu_);
  const std::uint64_t ticket = next_ticket_++;
  cv_.wait(lock, [&] { return serving_ == ticket; });
}

void FifoMutex::unlock() {
  {
    std::lock_guard lock(mu_);
    ++serving_;
  }
  cv_.notify_all();
}

LiveIndex::LiveIndex(IndexState state)
    : state_(std::move(state)), published_(std::make_shared<const IndexView>(state_.view())) {}

IndexView LiveIndex::snapshot() const { return *std::atomic_load(&published_); }

IndexState LiveIndex::copy_state() const {
  std::lock_guard lock(write_mu_);
  return state_;
}

void LiveIndex::publish() {
  std::atomic_store(&published_, std::make_shared<const IndexView>(state_.view()));
}

}  // namespace incdsi
