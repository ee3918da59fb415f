#pragma once

#include <cstddef>
#include <cstdint>
#include <mutex>
#include <string>
#include <vector>

namespace patchpnp {

enum class Direction { Acquire, Release };

struct LedgerEvent {
  std::string label;
  std::size_t bytes;
  Direction direction;
};

/// Logical byte accounting for declared working buffers. Counts what the
/// algorithm holds, not what the allocator hands out, so peaks are exact and
/// reproducible.
class MemoryLedger {
 public:
  MemoryLedger() = default;
  MemoryLedger(const MemoryLedger&) = delete;
  MemoryLedger& operator=(const MemoryLedger&) = delete;

  void track(const std::string& label, std::size_t bytes, Direction direction);

  std::int64_t live() const;
  std::int64_t peak() const;
  std::vector<LedgerEvent> events() const;
  void set_event_logging(bool on);

 private:
  mutable std::mutex mutex_;
  std::int64_t live_ = 0;
  std::int64_t peak_ = 0;
  bool log_events_ = true;
  std::vector<LedgerEvent> events_;
};

/// RAII registration of one buffer; a null ledger makes it a no-op.
class BufferHold {
 public:
  BufferHold() = default;
  BufferHold(MemoryLedger* ledger, std::string label, std::size_t bytes);
  BufferHold(BufferHold&& other) noexcept;
  BufferHold& operator=(BufferHold&& other) noexcept;
  BufferHold(const BufferHold&) = delete;
  BufferHold& operator=(const BufferHold&) = delete;
  ~BufferHold();

  void release();

 private:
  MemoryLedger* ledger_ = nullptr;
  std::string label_;
  std::size_t bytes_ = 0;
};

inline std::size_t image_bytes(int height, int width) {
  return static_cast<std::size_t>(height) * static_cast<std::size_t>(width) * sizeof(double);
}

}  // namespace patchpnp
