#include "objlog/host_data.hpp"

namespace objlog {

const Symbol HostData::kHostData("host_data");
const Symbol HostData::kPrologTerm("prolog_term");

HostData::HostData(Kernel& kernel, FrameStack& frames, RecordStore& records)
    : kernel_(kernel), frames_(frames), records_(records) {
  Class& host = kernel_.define_class(kHostData, atoms::object);
  host.doc = "Opaque handle to data of the host language";
  Class& term = kernel_.define_class(kPrologTerm, kHostData);
  term.doc = "A logic term passed through the object system";
  term.on_destroy = [this](Kernel& k, ObjectId id) {
    Object& o = k.get(id);
    if (auto* st = std::any_cast<HostTermState>(&o.native)) {
      if (st->mode == HostTermState::Mode::Recorded && records_.live(st->record)) records_.erase(st->record);
    }
    --wrappers_live_;
  };
  term_class_ = &term;
}

HostData::~HostData() {
  if (term_class_) term_class_->on_destroy = nullptr;
}

ObjectId HostData::wrap(const Term& t, Ledger& ledger) {
  ObjectId id = kernel_.allocate(*term_class_);
  HostTermState st;
  st.mode = HostTermState::Mode::Live;
  st.ref = frames_.put(t);
  kernel_.get(id).native = st;
  ++wrappers_live_;
  ++created_;
  ledger.wrappers.push_back(id);
  return id;
}

ObjectId HostData::wrap_recorded(const Term& t) {
  RecordId rec = records_.record(t);
  ObjectId id = kernel_.allocate(*term_class_);
  HostTermState st;
  st.mode = HostTermState::Mode::Recorded;
  st.record = rec;
  kernel_.get(id).native = st;
  ++wrappers_live_;
  ++created_;
  ++recorded_;
  return id;
}

bool HostData::is_host_term(ObjectId id) const noexcept {
  return kernel_.is_instance(id, kPrologTerm);
}

const HostTermState& HostData::state(ObjectId id) const {
  Object& o = kernel_.need_live(id);
  if (const auto* st = std::any_cast<HostTermState>(&o.native)) return *st;
  throw ObjectError(ObjectError::Kind::type_mismatch, "@" + std::to_string(id) + " is not a prolog_term");
}

Term HostData::read(ObjectId id) const {
  const HostTermState& st = state(id);
  if (st.mode == HostTermState::Mode::Live) {
    // A live wrapper outliving its frame would be a protocol bug; the frame
    // stack reports it as a stale reference.
    return frames_.get(st.ref);
  }
  return records_.replay(st.record);
}

void HostData::post_call(Ledger& ledger) {
  std::vector<ObjectId> pending = std::move(ledger.wrappers);
  ledger.wrappers.clear();
  std::exception_ptr failure;
  for (ObjectId id : pending) {
    Object* o = kernel_.find(id);
    if (!o || o->freed) continue;
    auto* st = std::any_cast<HostTermState>(&o->native);
    if (!st || st->mode != HostTermState::Mode::Live) continue;
    if (o->refcount <= 1) {
      // Only the transient hold refers to it.
      kernel_.destroy(id);
      ++discarded_;
      continue;
    }
    try {
      RecordId rec = copy_to_record(records_, frames_, st->ref);
      st->mode = HostTermState::Mode::Recorded;
      st->record = rec;
      st->ref = TermRef{};
      ++recorded_;
    } catch (...) {
      // Cannot keep the term (cyclic or too large): drop the wrapper so no
      // stale live reference survives, then report.
      kernel_.destroy(id);
      ++discarded_;
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

HostMetrics HostData::metrics() const {
  HostMetrics m;
  m.records_live = records_.live_count();
  m.wrappers_live = wrappers_live_;
  m.wrappers_created_total = created_;
  m.wrappers_recorded_total = recorded_;
  m.wrappers_discarded_total = discarded_;
  m.records_created_total = records_.created_total();
  m.records_destroyed_total = records_.destroyed_total();
  return m;
}

std::size_t HostData::live_wrappers() const {
  std::size_t n = 0;
  for (ObjectId id : kernel_.object_ids()) {
    Object* o = kernel_.find(id);
    if (!o || o->freed) continue;
    if (auto* st = std::any_cast<HostTermState>(&o->native))
      if (st->mode == HostTermState::Mode::Live) ++n;
  }
  return n;
}

}  // namespace objlog
