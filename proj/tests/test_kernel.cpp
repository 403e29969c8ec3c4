#include "doctest.h"
#include "objlog/kernel.hpp"

using namespace objlog;

namespace {

Method native(std::string_view sel, MethodKind kind, std::vector<TypeSpec> args, NativeFn fn) {
  Method m;
  m.selector = Symbol(sel);
  m.kind = kind;
  m.arg_types = std::move(args);
  m.native = std::move(fn);
  return m;
}

SlotDef slot(std::string_view name, TypeSpec type, Access access = Access::both) {
  SlotDef s;
  s.name = Symbol(name);
  s.type = std::move(type);
  s.access = access;
  return s;
}

const TypeSpec kInt = TypeSpec::of(TypeSpec::Kind::Int);
const TypeSpec kFloat = TypeSpec::of(TypeSpec::Kind::Float);
const TypeSpec kAtom = TypeSpec::of(TypeSpec::Kind::Atom);

ObjectError::Kind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const ObjectError& e) {
    return e.kind();
  }
  FAIL("no ObjectError raised");
  return ObjectError::Kind::duplicate;
}

// counter(Start:int): value slot, inc send, value get, holder slot.
struct Fixture {
  Kernel k;
  Class* counter;
  Class* sub;
  Fixture() {
    counter = &k.define_class(Symbol("counter"), atoms::object);
    k.define_slot(*counter, slot("value", kInt));
    k.define_slot(*counter, slot("other", TypeSpec::nil_or(TypeSpec::instance(Symbol("counter")))));
    k.define_method(*counter, native("initialise", MethodKind::send, {kInt}, [](Invocation& i) {
                      i.kernel.set_slot(i.self, Symbol("value"), i.args[0]);
                      return true;
                    }));
    k.define_method(*counter, native("inc", MethodKind::send, {TypeSpec::nil_or(kInt)}, [](Invocation& i) {
                      std::int64_t by = i.args[0].is_nil() ? 1 : i.args[0].int_value();
                      auto v = i.kernel.slot(i.self, Symbol("value")).int_value();
                      i.kernel.set_slot(i.self, Symbol("value"), Value::integer(v + by));
                      return true;
                    }));
    k.define_method(*counter, native("twice", MethodKind::get, {}, [](Invocation& i) {
                      *i.result = Value::integer(2 * i.kernel.slot(i.self, Symbol("value")).int_value());
                      return true;
                    }));
    sub = &k.define_class(Symbol("sub_counter"), Symbol("counter"));
    k.define_method(*sub, native("twice", MethodKind::get, {}, [](Invocation& i) {
                      *i.result = Value::integer(-1);
                      return true;
                    }));
  }
  ObjectId make(std::int64_t v, std::string_view cls = "counter") {
    return *k.create(Symbol(cls), {Value::integer(v)});
  }
};

}  // namespace

TEST_CASE_FIXTURE(Fixture, "create runs initialise and slots hold values") {
  ObjectId c = make(5);
  CHECK(k.slot(c, Symbol("value")).int_value() == 5);
  CHECK(k.send(c, Symbol("inc"), {}));
  CHECK(k.send(c, Symbol("inc"), {Value::integer(10)}));
  CHECK(k.get(c, Symbol("twice"), {})->int_value() == 32);
  CHECK(k.get(c, Symbol("value"), {})->int_value() == 16);  // slot accessor
  CHECK(k.send(c, Symbol("value"), {Value::integer(1)}));
  CHECK(k.get(c, Symbol("value"), {})->int_value() == 1);
  CHECK(k.get(c, Symbol("class_name"), {})->atom_value() == Symbol("counter"));
}

TEST_CASE_FIXTURE(Fixture, "methods resolve along the super chain") {
  ObjectId s = make(3, "sub_counter");
  CHECK(k.get(s, Symbol("twice"), {})->int_value() == -1);
  CHECK(k.get_class(s, Symbol("counter"), Symbol("twice"), {})->int_value() == 6);
  CHECK(k.is_instance(s, Symbol("counter")));
  CHECK_FALSE(k.is_instance(make(1), Symbol("sub_counter")));
  CHECK(kind_of([&] { k.send_class(make(1), Symbol("sub_counter"), Symbol("inc"), {}); }) ==
        ObjectError::Kind::declaration);
}

TEST_CASE_FIXTURE(Fixture, "argument checking") {
  ObjectId c = make(1);
  CHECK(kind_of([&] { k.send(c, Symbol("inc"), {Value::atom(Symbol("x"))}); }) ==
        ObjectError::Kind::type_mismatch);
  CHECK(kind_of([&] { k.send(c, Symbol("inc"), {Value::integer(1), Value::integer(2)}); }) ==
        ObjectError::Kind::arity);
  CHECK(kind_of([&] { k.send(c, Symbol("nope"), {}); }) == ObjectError::Kind::unknown_method);
  CHECK(kind_of([&] { k.create(Symbol("no_class"), {}); }) == ObjectError::Kind::unknown_class);
  CHECK(kind_of([&] { k.send(c, Symbol("other"), {Value::integer(3)}); }) ==
        ObjectError::Kind::type_mismatch);
  CHECK(k.send(c, Symbol("other"), {Value::object(make(2, "sub_counter"))}));
  CHECK(k.send(c, Symbol("other"), {Value::nil()}));
}

TEST_CASE_FIXTURE(Fixture, "type specs") {
  CHECK(k.type_check(Value::integer(2), kFloat) == Value::real(2.0));
  CHECK(k.admits(Value::nil(), TypeSpec::nil_or(kInt)));
  CHECK_FALSE(k.admits(Value::nil(), kInt));
  CHECK(k.admits(Value::atom(Symbol("a")), TypeSpec::any()));
  CHECK(TypeSpec::parse("[int]") == TypeSpec::nil_or(kInt));
  CHECK(TypeSpec::parse("point") == TypeSpec::instance(Symbol("point")));
  CHECK(TypeSpec::parse("[point]").str() == "[point]");
}

TEST_CASE_FIXTURE(Fixture, "duplicate definitions are rejected") {
  CHECK(kind_of([&] { k.define_class(Symbol("counter"), atoms::object); }) == ObjectError::Kind::duplicate);
  CHECK(kind_of([&] { k.define_slot(*counter, slot("value", kInt)); }) == ObjectError::Kind::duplicate);
}

TEST_CASE_FIXTURE(Fixture, "objects die when their last hold goes") {
  std::size_t base = k.live_count();
  auto depth = k.open_scope();
  ObjectId a = make(1);
  ObjectId b = make(2);
  k.send(a, Symbol("other"), {Value::object(b)});
  CHECK(k.get(b, Symbol("references"), {})->int_value() == 2);  // hold + slot
  k.close_scope(depth);
  CHECK(k.live_count() == base);
  CHECK_FALSE(k.is_live(a));
  CHECK_FALSE(k.is_live(b));
  CHECK(k.audit().ok());
}

TEST_CASE_FIXTURE(Fixture, "locked objects survive their scope") {
  auto depth = k.open_scope();
  ObjectId a = make(1);
  k.lock(a);
  k.close_scope(depth);
  CHECK(k.is_live(a));
  k.unlock(a);
  CHECK_FALSE(k.is_live(a));
}

TEST_CASE_FIXTURE(Fixture, "hold_outer keeps results for the caller") {
  auto outer = k.open_scope();
  auto inner = k.open_scope();
  ObjectId a = make(1);
  k.hold_outer(a);
  k.close_scope(inner);
  CHECK(k.is_live(a));
  CHECK(k.holds_in_scope(a) == 1);
  k.close_scope(outer);
  CHECK_FALSE(k.is_live(a));
}

TEST_CASE_FIXTURE(Fixture, "freeing a referenced object leaves a tombstone") {
  auto depth = k.open_scope();
  ObjectId a = make(1), b = make(2);
  k.send(a, Symbol("other"), {Value::object(b)});
  k.send(b, Symbol("free"), {});
  CHECK(k.tombstone_count() == 1);
  CHECK(kind_of([&] { k.send(b, Symbol("inc"), {}); }) == ObjectError::Kind::freed_object);
  CHECK(k.audit().ok());
  k.send(a, Symbol("other"), {Value::nil()});
  k.close_scope(depth);
  CHECK(k.tombstone_count() == 0);
  CHECK(k.find(b) == nullptr);
}

TEST_CASE_FIXTURE(Fixture, "destroy hooks run before slots are released") {
  int calls = 0;
  bool saw_other = false;
  counter->on_destroy = [&](Kernel& kk, ObjectId id) {
    ++calls;
    saw_other = saw_other || !kk.find(id)->slots.at(1).is_nil();
  };
  auto depth = k.open_scope();
  ObjectId a = make(1), b = make(2);
  k.send(a, Symbol("other"), {Value::object(b)});
  k.close_scope(depth);
  CHECK(calls == 2);
  CHECK(saw_other);
  counter->on_destroy = nullptr;
}

TEST_CASE_FIXTURE(Fixture, "audit finds unreachable cycles") {
  auto depth = k.open_scope();
  ObjectId a = make(1), b = make(2);
  k.send(a, Symbol("other"), {Value::object(b)});
  k.send(b, Symbol("other"), {Value::object(a)});
  k.close_scope(depth);
  AuditReport r = k.audit();
  CHECK(r.ok());
  CHECK(r.cyclic.size() == 2);
}

TEST_CASE_FIXTURE(Fixture, "@nil is permanent") {
  ObjectId nil = k.nil_id();
  CHECK(k.named(Symbol("nil")) == nil);
  CHECK(kind_of([&] { k.send(nil, Symbol("free"), {}); }) == ObjectError::Kind::permission);
  CHECK(k.is_live(nil));
}

TEST_CASE_FIXTURE(Fixture, "catch-all methods receive unknown selectors") {
  Class& any = k.define_class(Symbol("sink"), atoms::object);
  Symbol seen;
  Method m = native("$any", MethodKind::send, {}, [&](Invocation& i) {
    seen = i.selector;
    return i.args.size() == 2;
  });
  m.variadic = true;
  k.set_catch_all(any, m);
  ObjectId s = *k.create(Symbol("sink"), {});
  CHECK(k.send(s, Symbol("whatever"), {Value::integer(1), Value::integer(2)}));
  CHECK(seen == Symbol("whatever"));
  CHECK_FALSE(k.send(s, Symbol("other"), {}));
}

TEST_CASE_FIXTURE(Fixture, "messages execute stored sends") {
  ObjectId c = make(1);
  ObjectId m = *k.create(Symbol("message"), {Value::object(c), Value::atom(Symbol("inc")), Value::integer(4)});
  CHECK(k.send(m, Symbol("execute"), {}));
  CHECK(k.slot(c, Symbol("value")).int_value() == 5);
  CHECK(k.get(m, Symbol("selector"), {})->atom_value() == Symbol("inc"));
  ObjectId bad = *k.create(Symbol("message"), {Value::integer(3), Value::atom(Symbol("inc"))});
  CHECK(kind_of([&] { k.send(bad, Symbol("execute"), {}); }) == ObjectError::Kind::type_mismatch);
}

TEST_CASE_FIXTURE(Fixture, "events and their taxonomy") {
  CHECK(Kernel::event_is_a(Symbol("area_enter"), Symbol("area")));
  CHECK(Kernel::event_is_a(Symbol("area_enter"), Symbol("any")));
  CHECK(Kernel::event_is_a(Symbol("button_down"), Symbol("button_down")));
  CHECK_FALSE(Kernel::event_is_a(Symbol("keyboard"), Symbol("area")));
  CHECK_FALSE(Kernel::known_event(Symbol("teleport")));
  ObjectId e = *k.create(Symbol("event"), {Value::atom(Symbol("area_exit")), Value::integer(3)});
  CHECK(k.send(e, Symbol("is_a"), {Value::atom(Symbol("area"))}));
  CHECK_FALSE(k.send(e, Symbol("is_a"), {Value::atom(Symbol("button"))}));
  CHECK(k.get(e, Symbol("x"), {})->int_value() == 3);
  CHECK(k.get(e, Symbol("y"), {})->int_value() == 0);
  CHECK_THROWS_AS(k.create(Symbol("event"), {Value::atom(Symbol("teleport"))}), ObjectError);
}
