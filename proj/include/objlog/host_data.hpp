#pragma once

// Logic terms passed through the object kernel. A term handed to a
// prolog-typed parameter is wrapped in a prolog_term instance that refers
// to the caller's live term; when a call returns, wrappers that something
// else still references are copied to the permanent record store.

#include <cstdint>
#include <vector>

#include "objlog/kernel.hpp"
#include "objlog/store.hpp"
#include "objlog/term.hpp"

namespace objlog {

struct HostTermState {
  enum class Mode : std::uint8_t { Live, Recorded };
  Mode mode = Mode::Live;
  TermRef ref;      // Live
  RecordId record;  // Recorded
};

// Wrappers created while converting the arguments of one bridge call.
struct Ledger {
  std::vector<ObjectId> wrappers;
};

struct HostMetrics {
  std::size_t records_live = 0;
  std::size_t wrappers_live = 0;
  std::uint64_t wrappers_created_total = 0;
  std::uint64_t wrappers_recorded_total = 0;
  std::uint64_t wrappers_discarded_total = 0;
  std::uint64_t records_created_total = 0;
  std::uint64_t records_destroyed_total = 0;
};

class HostData {
 public:
  static const Symbol kHostData;   // host_data
  static const Symbol kPrologTerm;  // prolog_term

  // Defines classes host_data and prolog_term in the kernel.
  HostData(Kernel& kernel, FrameStack& frames, RecordStore& records);
  ~HostData();
  HostData(const HostData&) = delete;
  HostData& operator=(const HostData&) = delete;

  // Live wrapper for t in the innermost open frame, holding one transient
  // hold in the innermost kernel scope; registered on ledger.
  ObjectId wrap(const Term& t, Ledger& ledger);
  // Wrapper that is recorded immediately (no frame involved).
  ObjectId wrap_recorded(const Term& t);

  bool is_host_term(ObjectId id) const noexcept;
  // The term a wrapper stands for: the original term while live (bindings
  // shared), a fresh copy of the record once recorded.
  Term read(ObjectId id) const;
  const HostTermState& state(ObjectId id) const;

  // Runs after a bridge call: wrappers only held by the call are
  // destroyed, the rest are recorded. Empties the ledger.
  void post_call(Ledger& ledger);

  HostMetrics metrics() const;
  // Number of wrappers still in Live state (0 at every quiescent point).
  std::size_t live_wrappers() const;

 private:
  Kernel& kernel_;
  FrameStack& frames_;
  RecordStore& records_;
  Class* term_class_ = nullptr;
  std::size_t wrappers_live_ = 0;
  std::uint64_t created_ = 0, recorded_ = 0, discarded_ = 0;
};

}  // namespace objlog
