// Classes every kernel provides: lifetime methods on object, message
// objects and events.

#include "objlog/kernel.hpp"

namespace objlog {

namespace {

Method native(std::string_view selector, MethodKind kind, std::vector<TypeSpec> args, NativeFn fn) {
  Method m;
  m.selector = Symbol(selector);
  m.kind = kind;
  m.arg_types = std::move(args);
  m.native = std::move(fn);
  return m;
}

SlotDef slot_def(std::string_view name, TypeSpec type, Access access, std::string doc) {
  SlotDef s;
  s.name = Symbol(name);
  s.type = std::move(type);
  s.access = access;
  s.doc = std::move(doc);
  return s;
}

const TypeSpec kAtom = TypeSpec::of(TypeSpec::Kind::Atom);
const TypeSpec kInt = TypeSpec::of(TypeSpec::Kind::Int);

}  // namespace

void Kernel::define_core_classes() {
  Class& object = *find_class(atoms::object);
  define_method(object, native("lock", MethodKind::send, {}, [](Invocation& i) {
                  i.kernel.lock(i.self);
                  return true;
                }));
  define_method(object, native("unlock", MethodKind::send, {}, [](Invocation& i) {
                  i.kernel.unlock(i.self);
                  return true;
                }));
  define_method(object, native("free", MethodKind::send, {}, [](Invocation& i) {
                  i.kernel.destroy(i.self);
                  return true;
                }));
  define_method(object, native("class_name", MethodKind::get, {}, [](Invocation& i) {
                  *i.result = Value::atom(i.kernel.get(i.self).cls->name());
                  return true;
                }));
  define_method(object, native("references", MethodKind::get, {}, [](Invocation& i) {
                  // The invocation itself retains the receiver.
                  *i.result = Value::integer(static_cast<std::int64_t>(i.kernel.get(i.self).refcount) - 1);
                  return true;
                }));

  // message(Receiver, Selector, Arg...): a stored send.
  Class& message = define_class(Symbol("message"), atoms::object);
  message.doc = "Executable (receiver, selector, arguments) triple";
  const SlotDef& receiver = define_slot(message, slot_def("receiver", TypeSpec::any(), Access::get, "Receiver"));
  const SlotDef& selector = define_slot(message, slot_def("selector", kAtom, Access::get, "Selector"));
  std::size_t ri = receiver.index, si = selector.index;
  Method init = native("initialise", MethodKind::send, {TypeSpec::any(), kAtom}, [ri, si](Invocation& i) {
    Object& o = i.kernel.get(i.self);
    i.kernel.set_slot_raw(o, ri, i.args[0]);
    i.kernel.set_slot_raw(o, si, i.args[1]);
    for (std::size_t a = 2; a < i.args.size(); ++a) i.kernel.append_member(i.self, i.args[a]);
    return true;
  });
  init.variadic = true;
  define_method(message, std::move(init));
  define_method(message, native("execute", MethodKind::send, {}, [ri, si](Invocation& i) {
                  Object& o = i.kernel.get(i.self);
                  Value recv = o.slots[ri];
                  Symbol sel = o.slots[si].atom_value();
                  std::vector<Value> args = o.members;
                  if (!recv.is_object()) {
                    ObjectError e(ObjectError::Kind::type_mismatch,
                                  "message receiver " + to_string(recv) + " is not an object");
                    e.expected = TypeSpec::instance(atoms::object);
                    e.culprit = recv;
                    throw e;
                  }
                  return i.kernel.send(recv.object_id(), sel, std::move(args));
                }));

  // event(Kind, X, Y)
  Class& event = define_class(Symbol("event"), atoms::object);
  event.doc = "Input event drawn from a fixed taxonomy";
  const SlotDef& kind = define_slot(event, slot_def("kind", kAtom, Access::get, "Event kind"));
  const SlotDef& x = define_slot(event, slot_def("x", kInt, Access::get, "X position"));
  const SlotDef& y = define_slot(event, slot_def("y", kInt, Access::get, "Y position"));
  std::size_t ki = kind.index, xi = x.index, yi = y.index;
  define_method(event, native("initialise", MethodKind::send,
                              {kAtom, TypeSpec::nil_or(kInt), TypeSpec::nil_or(kInt)},
                              [ki, xi, yi](Invocation& i) {
                                Symbol k = i.args[0].atom_value();
                                if (!known_event(k)) {
                                  ObjectError e(ObjectError::Kind::type_mismatch,
                                                "unknown event kind " + k.str());
                                  e.expected = TypeSpec::instance(Symbol("event_kind"));
                                  e.culprit = i.args[0];
                                  e.arg_position = 1;
                                  throw e;
                                }
                                Object& o = i.kernel.get(i.self);
                                auto coord = [](const Value& v) { return v.is_nil() ? Value::integer(0) : v; };
                                i.kernel.set_slot_raw(o, ki, i.args[0]);
                                i.kernel.set_slot_raw(o, xi, coord(i.args[1]));
                                i.kernel.set_slot_raw(o, yi, coord(i.args[2]));
                                return true;
                              }));
  define_method(event, native("is_a", MethodKind::send, {kAtom}, [ki](Invocation& i) {
                  return event_is_a(i.kernel.get(i.self).slots[ki].atom_value(), i.args[0].atom_value());
                }));
}

}  // namespace objlog
