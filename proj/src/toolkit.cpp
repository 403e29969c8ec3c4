#include "objlog/toolkit.hpp"

#include <algorithm>
#include <sstream>

namespace objlog {

namespace {

using K = TypeSpec::Kind;

const TypeSpec kInt = TypeSpec::of(K::Int);
const TypeSpec kAtom = TypeSpec::of(K::Atom);
const TypeSpec kOptInt = TypeSpec::nil_or(TypeSpec::of(K::Int));

const Symbol kPoint("point");
const Symbol kColour("colour");
const Symbol kArea("area");
const Symbol kGraphical("graphical");
const Symbol kBox("box");
const Symbol kText("text");
const Symbol kPicture("picture");
const Symbol kNode("node");
const Symbol kButton("button");
const Symbol kEvent("event");
const Symbol kMessage("message");
const Symbol kPosition("position");
const Symbol kFill("fill_pattern");
const Symbol kName("name");
const Symbol kKind("kind");
const Symbol kExecute("execute");
const Symbol kButtonDown("button_down");

Method method(std::string_view selector, MethodKind kind, std::vector<TypeSpec> args, NativeFn fn,
              std::string doc = {}) {
  Method m;
  m.selector = Symbol(selector);
  m.kind = kind;
  m.arg_types = std::move(args);
  m.native = std::move(fn);
  m.doc = std::move(doc);
  return m;
}

std::size_t slot(Kernel& k, Class& cls, std::string_view name, TypeSpec type, std::string doc,
                 Access access = Access::both) {
  SlotDef s;
  s.name = Symbol(name);
  s.type = std::move(type);
  s.access = access;
  s.doc = std::move(doc);
  return k.define_slot(cls, std::move(s)).index;
}

Value or_zero(const Value& v) { return v.is_nil() ? Value::integer(0) : v; }

std::int64_t int_slot(Kernel& k, ObjectId id, Symbol name) {
  const Value& v = k.slot(id, name);
  return v.is_int() ? v.int_value() : 0;
}

// Creates an instance that ends up owned by the slot it is stored in.
void store_new(Kernel& k, ObjectId owner, std::size_t index, Symbol cls, std::vector<Value> args) {
  HoldScope scope(k);
  std::optional<ObjectId> id = k.create(cls, std::move(args));
  if (!id) throw ObjectError(ObjectError::Kind::declaration, "cannot create " + cls.str());
  k.set_slot_raw(k.get(owner), index, Value::object(*id));
}

void require_non_negative(const Value& v, std::size_t position, Symbol selector) {
  if (v.int_value() >= 0) return;
  ObjectError e(ObjectError::Kind::type_mismatch, "expected a non-negative size, found " + to_string(v));
  e.expected = TypeSpec::of(K::Int);
  e.culprit = v;
  e.arg_position = position;
  e.selector = selector;
  throw e;
}

}  // namespace

void define_toolkit(Kernel& k) {
  // point(X, Y)
  Class& point = k.define_class(kPoint, atoms::object);
  point.doc = "Integer coordinate pair";
  std::size_t px = slot(k, point, "x", kInt, "X coordinate");
  std::size_t py = slot(k, point, "y", kInt, "Y coordinate");
  k.define_method(point, method("initialise", MethodKind::send, {kOptInt, kOptInt}, [px, py](Invocation& i) {
                    Object& o = i.kernel.get(i.self);
                    i.kernel.set_slot_raw(o, px, or_zero(i.args[0]));
                    i.kernel.set_slot_raw(o, py, or_zero(i.args[1]));
                    return true;
                  }));

  // colour(Name): compared by name only.
  Class& colour = k.define_class(kColour, atoms::object);
  colour.doc = "Named colour";
  std::size_t cn = slot(k, colour, "name", kAtom, "Colour name");
  k.define_method(colour, method("initialise", MethodKind::send, {kAtom}, [cn](Invocation& i) {
                    i.kernel.set_slot_raw(i.kernel.get(i.self), cn, i.args[0]);
                    return true;
                  }));

  // area(X, Y, W, H)
  Class& area = k.define_class(kArea, atoms::object);
  area.doc = "Rectangular region";
  std::size_t ax = slot(k, area, "x", kInt, "Left edge");
  std::size_t ay = slot(k, area, "y", kInt, "Top edge");
  std::size_t aw = slot(k, area, "width", kInt, "Width, negative before normalise");
  std::size_t ah = slot(k, area, "height", kInt, "Height, negative before normalise");
  k.define_method(area, method("initialise", MethodKind::send, {kOptInt, kOptInt, kOptInt, kOptInt},
                               [ax, ay, aw, ah](Invocation& i) {
                                 Object& o = i.kernel.get(i.self);
                                 std::size_t idx[] = {ax, ay, aw, ah};
                                 for (std::size_t n = 0; n < 4; ++n)
                                   i.kernel.set_slot_raw(o, idx[n], or_zero(i.args[n]));
                                 return true;
                               }));
  k.define_method(area, method(
                            "normalise", MethodKind::send, {},
                            [ax, ay, aw, ah](Invocation& i) {
                              Object& o = i.kernel.get(i.self);
                              auto fix = [&](std::size_t pos, std::size_t size) {
                                std::int64_t p = o.slots[pos].int_value(), s = o.slots[size].int_value();
                                if (s >= 0) return;
                                o.slots[pos] = Value::integer(p + s);
                                o.slots[size] = Value::integer(-s);
                              };
                              fix(ax, aw);
                              fix(ay, ah);
                              return true;
                            },
                            "Make width and height non-negative"));

  // graphical: anything that can be displayed.
  Class& graphical = k.define_class(kGraphical, atoms::object);
  graphical.doc = "Displayable object";
  std::size_t gpos = slot(k, graphical, "position", TypeSpec::instance(kPoint), "Origin");
  auto init_graphical = [gpos](Kernel& kernel, ObjectId self) {
    store_new(kernel, self, gpos, kPoint, {Value::integer(0), Value::integer(0)});
  };
  k.define_method(graphical, method("initialise", MethodKind::send, {}, [init_graphical](Invocation& i) {
                    init_graphical(i.kernel, i.self);
                    return true;
                  }));
  k.define_method(graphical,
                  method(
                      "event", MethodKind::send, {TypeSpec::instance(kEvent)}, [](Invocation&) { return true; },
                      "Default event handling: accept without change"));

  // box(W, H)
  Class& box = k.define_class(kBox, kGraphical);
  box.doc = "Rectangle";
  std::size_t bw = slot(k, box, "width", kInt, "Width", Access::get);
  std::size_t bh = slot(k, box, "height", kInt, "Height", Access::get);
  for (auto [name, index] : {std::pair{"width", bw}, std::pair{"height", bh}}) {
    Symbol sel(name);
    k.define_method(box, method(name, MethodKind::send, {kInt}, [sel, index](Invocation& i) {
                      require_non_negative(i.args[0], 1, sel);
                      i.kernel.set_slot_raw(i.kernel.get(i.self), index, i.args[0]);
                      return true;
                    }));
  }
  slot(k, box, "fill_pattern", TypeSpec::nil_or(TypeSpec::instance(kColour)), "Fill colour or @nil");
  k.define_method(box, method("initialise", MethodKind::send, {kOptInt, kOptInt},
                              [init_graphical, bw, bh](Invocation& i) {
                                Value w = or_zero(i.args[0]), h = or_zero(i.args[1]);
                                require_non_negative(w, 1, atoms::initialise);
                                require_non_negative(h, 2, atoms::initialise);
                                init_graphical(i.kernel, i.self);
                                Object& o = i.kernel.get(i.self);
                                i.kernel.set_slot_raw(o, bw, w);
                                i.kernel.set_slot_raw(o, bh, h);
                                return true;
                              }));

  // text(String)
  Class& text = k.define_class(kText, kGraphical);
  text.doc = "Text label";
  std::size_t ts = slot(k, text, "string", kAtom, "Contents");
  k.define_method(text, method("initialise", MethodKind::send, {TypeSpec::nil_or(kAtom)},
                               [init_graphical, ts](Invocation& i) {
                                 init_graphical(i.kernel, i.self);
                                 Value s = i.args[0].is_nil() ? Value::atom(Symbol("")) : i.args[0];
                                 i.kernel.set_slot_raw(i.kernel.get(i.self), ts, s);
                                 return true;
                               }));

  // picture(Label): a window; displayed graphicals are its members.
  Class& picture = k.define_class(kPicture, atoms::object);
  picture.doc = "Window holding displayed graphicals";
  std::size_t pv = slot(k, picture, "visible", TypeSpec::instance(kArea), "Visible region", Access::get);
  std::size_t pl = slot(k, picture, "label", kAtom, "Window label");
  k.define_method(picture, method("initialise", MethodKind::send, {TypeSpec::nil_or(kAtom)},
                                  [pv, pl](Invocation& i) {
                                    Value label = i.args[0].is_nil() ? Value::atom(Symbol("picture")) : i.args[0];
                                    i.kernel.set_slot_raw(i.kernel.get(i.self), pl, label);
                                    store_new(i.kernel, i.self, pv, kArea,
                                              {Value::integer(0), Value::integer(0), Value::integer(400),
                                               Value::integer(300)});
                                    return true;
                                  }));
  k.define_method(picture, method(
                               "display", MethodKind::send,
                               {TypeSpec::instance(kGraphical), TypeSpec::nil_or(TypeSpec::instance(kPoint))},
                               [](Invocation& i) {
                                 Kernel& kk = i.kernel;
                                 ObjectId g = i.args[0].object_id();
                                 if (!i.args[1].is_nil()) {
                                   ObjectId at = i.args[1].object_id();
                                   ObjectId pos = kk.slot(g, kPosition).object_id();
                                   kk.set_slot(pos, Symbol("x"), Value::integer(int_slot(kk, at, Symbol("x"))));
                                   kk.set_slot(pos, Symbol("y"), Value::integer(int_slot(kk, at, Symbol("y"))));
                                 }
                                 const auto& members = kk.need_live(i.self).members;
                                 if (std::find(members.begin(), members.end(), i.args[0]) == members.end())
                                   kk.append_member(i.self, i.args[0]);
                                 return true;
                               },
                               "Show a graphical, optionally at a position; displaying again repositions"));
  k.define_method(picture, method("erase", MethodKind::send, {TypeSpec::instance(kGraphical)},
                                  [](Invocation& i) { return i.kernel.remove_member(i.self, i.args[0]); }));
  k.define_method(picture, method("count", MethodKind::get, {}, [](Invocation& i) {
                    *i.result = Value::integer(std::int64_t(i.kernel.need_live(i.self).members.size()));
                    return true;
                  }));

  // node(Label): tree node; sons are members.
  Class& node = k.define_class(kNode, atoms::object);
  node.doc = "Tree node with ordered sons";
  std::size_t nl = slot(k, node, "label", TypeSpec::instance(kText), "Label");
  k.define_method(node, method("initialise", MethodKind::send, {TypeSpec::instance(kText)}, [nl](Invocation& i) {
                    i.kernel.set_slot_raw(i.kernel.get(i.self), nl, i.args[0]);
                    return true;
                  }));
  k.define_method(node, method("son", MethodKind::send, {TypeSpec::instance(kNode)}, [](Invocation& i) {
                    i.kernel.append_member(i.self, i.args[0]);
                    return true;
                  }));
  k.define_method(node, method("son_count", MethodKind::get, {}, [](Invocation& i) {
                    *i.result = Value::integer(std::int64_t(i.kernel.need_live(i.self).members.size()));
                    return true;
                  }));
  k.define_method(node, method("son", MethodKind::get, {kInt}, [](Invocation& i) {
                    const auto& sons = i.kernel.need_live(i.self).members;
                    std::int64_t n = i.args[0].int_value();
                    if (n < 1 || n > std::int64_t(sons.size())) return false;
                    *i.result = sons[std::size_t(n - 1)];
                    return true;
                  }));

  // button(Label, Message): fires its message on button_down.
  Class& button = k.define_class(kButton, kGraphical);
  button.doc = "Push button";
  std::size_t bl = slot(k, button, "label", kAtom, "Label");
  std::size_t bm = slot(k, button, "message", TypeSpec::nil_or(TypeSpec::instance(kMessage)), "Action");
  k.define_method(button, method("initialise", MethodKind::send,
                                 {kAtom, TypeSpec::nil_or(TypeSpec::instance(kMessage))},
                                 [init_graphical, bl, bm](Invocation& i) {
                                   init_graphical(i.kernel, i.self);
                                   Object& o = i.kernel.get(i.self);
                                   i.kernel.set_slot_raw(o, bl, i.args[0]);
                                   i.kernel.set_slot_raw(o, bm, i.args[1]);
                                   return true;
                                 }));
  k.define_method(button, method("event", MethodKind::send, {TypeSpec::instance(kEvent)}, [bm](Invocation& i) {
                    Symbol kind = i.kernel.slot(i.args[0].object_id(), kKind).atom_value();
                    if (!Kernel::event_is_a(kind, kButtonDown)) return true;
                    Value msg = i.kernel.get(i.self).slots[bm];
                    if (msg.is_nil()) return true;
                    return i.kernel.send(msg.object_id(), kExecute, {});
                  }));
}

std::string scene_dump(Kernel& k, ObjectId picture) {
  std::ostringstream os;
  std::vector<Value> members = k.need_live(picture).members;
  for (const Value& v : members) {
    if (!v.is_object()) continue;
    Object& g = k.get(v.object_id());
    os << g.cls->name().name() << '@' << g.id;
    if (g.freed) {
      os << " freed\n";
      continue;
    }
    std::int64_t x = 0, y = 0;
    if (g.cls->find_slot(kPosition)) {
      const Value& pos = k.slot(g.id, kPosition);
      if (pos.is_object()) {
        x = int_slot(k, pos.object_id(), Symbol("x"));
        y = int_slot(k, pos.object_id(), Symbol("y"));
      }
    }
    std::string fill = "nil";
    if (g.cls->find_slot(kFill)) {
      const Value& f = k.slot(g.id, kFill);
      if (f.is_object()) fill = k.slot(f.object_id(), kName).atom_value().str();
    }
    os << " pos=(" << x << ',' << y << ") fill=" << fill << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Event pump

void EventPump::post(ObjectId target, Symbol kind, std::int64_t x, std::int64_t y) {
  if (!Kernel::known_event(kind)) {
    ObjectError e(ObjectError::Kind::type_mismatch, "unknown event kind " + kind.str());
    e.expected = TypeSpec::instance(Symbol("event_kind"));
    e.culprit = Value::atom(kind);
    throw e;
  }
  kernel_.need_live(target);
  queue_.push_back({target, kind, x, y});
}

bool EventPump::deliver(ObjectId target, Symbol kind, std::int64_t x, std::int64_t y) {
  HoldScope scope(kernel_);
  std::optional<ObjectId> ev =
      kernel_.create(kEvent, {Value::atom(kind), Value::integer(x), Value::integer(y)});
  if (!ev) return false;
  return kernel_.send(target, kEvent, {Value::object(*ev)});
}

std::size_t EventPump::run() {
  std::size_t ok = 0;
  while (!queue_.empty()) {
    Pending p = queue_.front();
    queue_.pop_front();
    if (deliver(p.target, p.kind, p.x, p.y)) ++ok;
  }
  return ok;
}

void EventPump::install(Engine& engine, const std::function<ObjectId(const Term&)>& object_of) {
  auto kind_of = [](const Term& t) {
    const Term& d = t.deref();
    if (d.is_var()) err::raise(err::instantiation());
    if (!d.is_atom()) err::raise(err::type("atom", d));
    return d.symbol();
  };
  auto int_of = [](const Term& t) {
    const Term& d = t.deref();
    if (d.is_var()) err::raise(err::instantiation());
    if (!d.is_int()) err::raise(err::type("integer", d));
    return d.int_value();
  };
  for (std::uint32_t n : {2u, 4u}) {
    engine.register_builtin("pump_event", n, [this, object_of, kind_of, int_of](CallContext& c) {
      std::int64_t x = c.arity() == 4 ? int_of(c.arg(2)) : 0, y = c.arity() == 4 ? int_of(c.arg(3)) : 0;
      ObjectId target = object_of(c.arg(0));
      Symbol kind = kind_of(c.arg(1));
      post(target, kind, x, y);  // validates
      queue_.pop_back();
      return deliver(target, kind, x, y);
    });
    engine.register_builtin("post_event", n, [this, object_of, kind_of, int_of](CallContext& c) {
      std::int64_t x = c.arity() == 4 ? int_of(c.arg(2)) : 0, y = c.arity() == 4 ? int_of(c.arg(3)) : 0;
      post(object_of(c.arg(0)), kind_of(c.arg(1)), x, y);
      return true;
    });
  }
  engine.register_builtin("dispatch_events", 1, [this](CallContext& c) {
    return c.unify(c.arg(0), Term::integer(std::int64_t(run())));
  });
  engine.register_builtin("scene_dump", 1, [this, object_of](CallContext& c) {
    c.engine.out() << scene_dump(kernel_, object_of(c.arg(0)));
    return true;
  });
}

}  // namespace objlog
