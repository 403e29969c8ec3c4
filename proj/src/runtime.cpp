#include "objlog/runtime.hpp"

#include <sstream>

namespace objlog {

Runtime::Runtime(RuntimeOptions options)
    : host_(kernel_, frames_, records_),
      bridge_(engine_, kernel_, host_, frames_),
      compiler_(engine_, kernel_),
      pump_(kernel_) {
  engine_.flags().occurs_check = options.occurs_check;
  engine_.flags().trace = options.trace;
  define_toolkit(kernel_);
  bridge_.install();
  compiler_.install();
  compiler_.set_eager(options.eager);
  pump_.install(engine_, [this](const Term& t) { return bridge_.object_of(t); });
}

Runtime::~Runtime() = default;

LoadReport Runtime::load_demo(const std::string& name) {
  auto it = demos().find(name);
  if (it == demos().end()) {
    LoadReport r;
    r.errors.push_back("no bundled example named " + name);
    return r;
  }
  return engine_.consult_string(it->second, name + ".pl");
}

std::string Runtime::stats_text() const {
  const HostMetrics h = host_.metrics();
  const KernelStats& k = kernel_.stats();
  const BridgeStats& b = bridge_.stats();
  std::ostringstream os;
  os << "objects-live: " << kernel_.live_count() << '\n'
     << "tombstones: " << kernel_.tombstone_count() << '\n'
     << "records-live: " << h.records_live << '\n'
     << "wrappers-live: " << h.wrappers_live << '\n'
     << "wrappers-created-total: " << h.wrappers_created_total << '\n'
     << "wrappers-recorded-total: " << h.wrappers_recorded_total << '\n'
     << "wrappers-discarded-total: " << h.wrappers_discarded_total << '\n'
     << "records-created-total: " << h.records_created_total << '\n'
     << "records-destroyed-total: " << h.records_destroyed_total << '\n'
     << "objects-created-total: " << k.created << '\n'
     << "objects-destroyed-total: " << k.destroyed << '\n'
     << "sends: " << k.sends << '\n'
     << "gets: " << k.gets << '\n'
     << "bridge-calls: " << b.calls << '\n'
     << "logic-dispatches: " << b.logic_dispatches << '\n'
     << "callbacks: " << b.callbacks << '\n';
  return os.str();
}

std::string Runtime::classes_text() const {
  std::ostringstream os;
  for (const Class* c : kernel_.classes()) {
    os << c->name().name();
    if (c->super()) os << " < " << c->super()->name().name();
    os << "  slots=" << c->own_slots().size() << " send=" << c->own_methods(MethodKind::send).size()
       << " get=" << c->own_methods(MethodKind::get).size() << '\n';
  }
  return os.str();
}

}  // namespace objlog
