#include "patchpnp/memory.hpp"

#include <stdexcept>
#include <utility>

namespace patchpnp {

void MemoryLedger::track(const std::string& label, std::size_t bytes, Direction direction) {
  std::lock_guard lock(mutex_);
  const auto amount = static_cast<std::int64_t>(bytes);
  if (direction == Direction::Acquire) {
    live_ += amount;
    if (live_ > peak_) peak_ = live_;
  } else {
    live_ -= amount;
    if (live_ < 0) {
      throw std::logic_error("memory ledger went negative releasing '" + label + "'");
    }
  }
  if (log_events_) events_.push_back({label, bytes, direction});
}

std::int64_t MemoryLedger::live() const {
  std::lock_guard lock(mutex_);
  return live_;
}

std::int64_t MemoryLedger::peak() const {
  std::lock_guard lock(mutex_);
  return peak_;
}

std::vector<LedgerEvent> MemoryLedger::events() const {
  std::lock_guard lock(mutex_);
  return events_;
}

void MemoryLedger::set_event_logging(bool on) {
  std::lock_guard lock(mutex_);
  log_events_ = on;
}

BufferHold::BufferHold(MemoryLedger* ledger, std::string label, std::size_t bytes)
    : ledger_(ledger), label_(std::move(label)), bytes_(bytes) {
  if (ledger_) ledger_->track(label_, bytes_, Direction::Acquire);
}

BufferHold::BufferHold(BufferHold&& other) noexcept
    : ledger_(std::exchange(other.ledger_, nullptr)),
      label_(std::move(other.label_)),
      bytes_(other.bytes_) {}

BufferHold& BufferHold::operator=(BufferHold&& other) noexcept {
  if (this != &other) {
    release();
    ledger_ = std::exchange(other.ledger_, nullptr);
    label_ = std::move(other.label_);
    bytes_ = other.bytes_;
  }
  return *this;
}

BufferHold::~BufferHold() { release(); }

void BufferHold::release() {
  if (ledger_) {
    ledger_->track(label_, bytes_, Direction::Release);
    ledger_ = nullptr;
  }
}

}  // namespace patchpnp
