#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "objlog/term.hpp"
#include "objlog/term_ops.hpp"

namespace objlog {

struct FrameId {
  std::uint64_t value = 0;
  friend bool operator==(FrameId, FrameId) = default;
};

// Frame-scoped handle to a live term (the foreign-interface term reference).
struct TermRef {
  FrameId frame;
  std::uint32_t index = 0;
  friend bool operator==(TermRef, TermRef) = default;
};

// Stack of foreign-call frames. A TermRef is valid only while its frame is
// open; using it afterwards raises StaleReferenceError.
class FrameStack {
 public:
  FrameId open();
  // Frames close strictly LIFO; anything else raises FrameOrderError.
  void close(FrameId frame);

  TermRef put(Term t);  // into the innermost frame
  TermRef put(FrameId frame, Term t);
  const Term& get(TermRef ref) const;
  bool valid(TermRef ref) const noexcept;
  bool is_open(FrameId frame) const noexcept;

  FrameId top() const;
  std::size_t depth() const noexcept { return frames_.size(); }

 private:
  struct Frame {
    FrameId id;
    std::vector<Term> refs;
  };
  const Frame* find(FrameId id) const noexcept;
  Frame* find(FrameId id) noexcept;

  std::vector<Frame> frames_;
  std::uint64_t next_id_ = 1;
};

// RAII frame for one foreign call.
class FrameGuard {
 public:
  explicit FrameGuard(FrameStack& stack) : stack_(stack), id_(stack.open()) {}
  ~FrameGuard() { stack_.close(id_); }
  FrameGuard(const FrameGuard&) = delete;
  FrameGuard& operator=(const FrameGuard&) = delete;
  FrameId id() const noexcept { return id_; }

 private:
  FrameStack& stack_;
  FrameId id_;
};

struct RecordId {
  std::uint64_t value = 0;
  friend bool operator==(RecordId, RecordId) = default;
};

// Permanent heap: frame-independent copies of terms.
class RecordStore {
 public:
  explicit RecordStore(std::size_t node_limit = 1'000'000) : node_limit_(node_limit) {}

  // Copies t (variables renamed, sharing preserved). Cyclic terms raise
  // CyclicTermError, oversized ones ResourceError.
  RecordId record(const Term& t);
  // Fresh copy of the payload with new variables.
  Term replay(RecordId id) const;
  // The stored payload itself; clients must not bind its variables.
  const Term& payload(RecordId id) const;
  void erase(RecordId id);
  bool live(RecordId id) const noexcept { return records_.count(id.value) != 0; }

  std::size_t live_count() const noexcept { return records_.size(); }
  std::uint64_t created_total() const noexcept { return created_; }
  std::uint64_t destroyed_total() const noexcept { return destroyed_; }

  std::size_t node_limit() const noexcept { return node_limit_; }
  void set_node_limit(std::size_t n) noexcept { node_limit_ = n; }

 private:
  std::unordered_map<std::uint64_t, Term> records_;
  std::uint64_t next_id_ = 1;
  std::uint64_t created_ = 0;
  std::uint64_t destroyed_ = 0;
  std::size_t node_limit_;
};

// copy_to_record / record_to_term expressed over term references.
RecordId copy_to_record(RecordStore& records, const FrameStack& frames, TermRef ref);
TermRef record_to_term(const RecordStore& records, RecordId id, FrameStack& frames, FrameId frame);

}  // namespace objlog
