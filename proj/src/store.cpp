#include "objlog/store.hpp"

#include <string>

#include "objlog/errors.hpp"

namespace objlog {

FrameId FrameStack::open() {
  FrameId id{next_id_++};
  frames_.push_back(Frame{id, {}});
  return id;
}

void FrameStack::close(FrameId frame) {
  if (frames_.empty() || frames_.back().id != frame) {
    throw FrameOrderError("frame " + std::to_string(frame.value) +
                          " is not the innermost open frame");
  }
  frames_.pop_back();
}

const FrameStack::Frame* FrameStack::find(FrameId id) const noexcept {
  for (auto it = frames_.rbegin(); it != frames_.rend(); ++it) {
    if (it->id == id) return &*it;
    if (it->id.value < id.value) break;  // ids increase towards the top
  }
  return nullptr;
}

FrameStack::Frame* FrameStack::find(FrameId id) noexcept {
  return const_cast<Frame*>(static_cast<const FrameStack*>(this)->find(id));
}

bool FrameStack::is_open(FrameId frame) const noexcept { return find(frame) != nullptr; }

FrameId FrameStack::top() const {
  if (frames_.empty()) throw FrameOrderError("no open frame");
  return frames_.back().id;
}

TermRef FrameStack::put(Term t) { return put(top(), std::move(t)); }

TermRef FrameStack::put(FrameId frame, Term t) {
  Frame* f = find(frame);
  if (!f) throw StaleReferenceError("frame " + std::to_string(frame.value) + " is closed");
  f->refs.push_back(std::move(t));
  return TermRef{frame, static_cast<std::uint32_t>(f->refs.size() - 1)};
}

bool FrameStack::valid(TermRef ref) const noexcept {
  const Frame* f = find(ref.frame);
  return f && ref.index < f->refs.size();
}

const Term& FrameStack::get(TermRef ref) const {
  const Frame* f = find(ref.frame);
  if (!f || ref.index >= f->refs.size())
    throw StaleReferenceError("term reference used after its frame was closed");
  return f->refs[ref.index];
}

RecordId RecordStore::record(const Term& t) {
  CopyOptions opts;
  opts.node_limit = node_limit_;
  Term copy = copy_term(t, opts);
  RecordId id{next_id_++};
  records_.emplace(id.value, std::move(copy));
  ++created_;
  return id;
}

const Term& RecordStore::payload(RecordId id) const {
  auto it = records_.find(id.value);
  if (it == records_.end()) throw DeadRecordError("record has been destroyed");
  return it->second;
}

Term RecordStore::replay(RecordId id) const { return copy_term(payload(id)); }

void RecordStore::erase(RecordId id) {
  if (records_.erase(id.value) != 0) ++destroyed_;
}

RecordId copy_to_record(RecordStore& records, const FrameStack& frames, TermRef ref) {
  return records.record(frames.get(ref));
}

TermRef record_to_term(const RecordStore& records, RecordId id, FrameStack& frames, FrameId frame) {
  return frames.put(frame, records.replay(id));
}

}  // namespace objlog
