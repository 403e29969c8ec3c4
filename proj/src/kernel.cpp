#include "objlog/kernel.hpp"

#include <algorithm>
#include <cassert>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace objlog {

namespace {

const Symbol kConstant("constant");
const Symbol kNil("nil");

ObjectError make_error(ObjectError::Kind k, std::string what) { return ObjectError(k, std::move(what)); }

std::string describe(const Value& v) { return to_string(v); }

// Event taxonomy: child -> parent.
const std::unordered_map<std::string_view, std::string_view>& taxonomy() {
  static const std::unordered_map<std::string_view, std::string_view> t = {
      {"area", "any"},          {"area_enter", "area"}, {"area_exit", "area"},
      {"button", "any"},        {"button_down", "button"}, {"button_up", "button"},
      {"keyboard", "any"},      {"any", ""},
  };
  return t;
}

}  // namespace

std::string to_string(const Value& v) {
  if (v.is_nil()) return "@nil";
  if (v.is_int()) return std::to_string(v.int_value());
  if (v.is_float()) {
    std::ostringstream os;
    os << v.float_value();
    return os.str();
  }
  if (v.is_atom()) return v.atom_value().str();
  return "@" + std::to_string(v.object_id());
}

// ---------------------------------------------------------------------------
// TypeSpec

TypeSpec TypeSpec::parse(std::string_view text) {
  if (text.size() >= 2 && text.front() == '[' && text.back() == ']')
    return nil_or(parse(text.substr(1, text.size() - 2)));
  if (text == "int" || text == "integer") return of(Kind::Int);
  if (text == "float" || text == "real") return of(Kind::Float);
  if (text == "atom" || text == "name") return of(Kind::Atom);
  if (text == "any" || text == "unchecked") return of(Kind::Any);
  if (text == "prolog") return of(Kind::Prolog);
  if (text.empty()) throw make_error(ObjectError::Kind::declaration, "empty type specifier");
  return instance(Symbol(text));
}

std::string TypeSpec::str() const {
  switch (kind) {
    case Kind::Int:
      return "int";
    case Kind::Float:
      return "float";
    case Kind::Atom:
      return "atom";
    case Kind::Any:
      return "any";
    case Kind::Prolog:
      return "prolog";
    case Kind::Instance:
      return class_name.str();
    case Kind::NilOr:
      return "[" + inner->str() + "]";
  }
  return "any";
}

bool operator==(const TypeSpec& a, const TypeSpec& b) {
  if (a.kind != b.kind) return false;
  if (a.kind == TypeSpec::Kind::Instance) return a.class_name == b.class_name;
  if (a.kind == TypeSpec::Kind::NilOr) return *a.inner == *b.inner;
  return true;
}

Access parse_access(std::string_view s) {
  if (s == "both") return Access::both;
  if (s == "get") return Access::get;
  if (s == "send") return Access::send;
  if (s == "none") return Access::none;
  throw make_error(ObjectError::Kind::declaration, "unknown slot access mode: " + std::string(s));
}

std::string_view access_name(Access a) {
  switch (a) {
    case Access::both:
      return "both";
    case Access::get:
      return "get";
    case Access::send:
      return "send";
    case Access::none:
      return "none";
  }
  return "none";
}

std::size_t Method::min_args() const {
  std::size_t n = arg_types.size();
  while (n > 0 && arg_types[n - 1].kind == TypeSpec::Kind::NilOr) --n;
  return n;
}

// ---------------------------------------------------------------------------
// Class

bool Class::is_a(const Class* other) const noexcept {
  for (const Class* c = this; c; c = c->super_)
    if (c == other) return true;
  return false;
}

const SlotDef* Class::find_slot(Symbol name) const noexcept {
  for (const Class* c = this; c; c = c->super_)
    for (const SlotDef& s : c->slots_)
      if (s.name == name) return &s;
  return nullptr;
}

const Method* Class::own_method(Symbol selector, MethodKind kind) const noexcept {
  const auto& table = own_methods(kind);
  auto it = table.find(selector);
  return it == table.end() ? nullptr : it->second.get();
}

const Method* Class::catch_all() const noexcept {
  for (const Class* c = this; c; c = c->super_)
    if (c->catch_all_) return c->catch_all_.get();
  return nullptr;
}

// ---------------------------------------------------------------------------
// Kernel: classes

Kernel::Kernel() {
  scopes_.emplace_back();  // base scope, never closed

  auto root = std::make_unique<Class>();
  root->name_ = atoms::object;
  root->doc = "Root of the class hierarchy";
  Class& object = *root;
  classes_.emplace(atoms::object, std::move(root));

  Method init;
  init.selector = atoms::initialise;
  init.native = [](Invocation&) { return true; };
  define_method(object, std::move(init));

  Class& constant = define_class(kConstant, atoms::object);
  constant.doc = "Well-known constant objects";
  nil_ = allocate_named(constant, kNil);
  define_core_classes();
}

ObjectId Kernel::allocate_named(Class& cls, Symbol name) {
  ObjectId id = allocate(cls);
  // allocate() left a hold in the innermost scope; permanence replaces it.
  auto& scope = scopes_.back();
  scope.erase(std::find(scope.begin(), scope.end(), id));
  Object& o = get(id);
  o.holds = 0;
  o.refcount = 0;
  name_object(id, name);
  return id;
}

std::size_t Kernel::holds_in_scope(ObjectId id) const {
  return static_cast<std::size_t>(std::count(scopes_.back().begin(), scopes_.back().end(), id));
}

Kernel::~Kernel() {
  // Tear down without running hooks into subsystems that may already be
  // gone; the owner clears hooks first when it needs them suppressed.
  objects_.clear();
}

Class& Kernel::define_class(Symbol name, Symbol super) {
  if (name == super)
    throw make_error(ObjectError::Kind::declaration, "class " + name.str() + " cannot be its own super");
  if (classes_.count(name)) {
    auto e = make_error(ObjectError::Kind::duplicate, "class " + name.str() + " already exists");
    e.name = name;
    throw e;
  }
  Class* sup = resolve_class(super);
  if (!sup) {
    auto e = make_error(ObjectError::Kind::unknown_class, "unknown super class " + super.str());
    e.name = super;
    throw e;
  }
  auto cls = std::make_unique<Class>();
  cls->name_ = name;
  cls->super_ = sup;
  cls->slot_base_ = sup->slot_count();
  ++sup->subclasses_;
  Class& ref = *cls;
  classes_.emplace(name, std::move(cls));
  return ref;
}

Class* Kernel::find_class(Symbol name) const noexcept {
  auto it = classes_.find(name);
  return it == classes_.end() ? nullptr : it->second.get();
}

Class* Kernel::resolve_class(Symbol name) {
  if (Class* c = find_class(name)) return c;
  if (resolver_) return resolver_(name);
  return nullptr;
}

Class& Kernel::need_class(Symbol name) {
  if (Class* c = resolve_class(name)) return *c;
  auto e = make_error(ObjectError::Kind::unknown_class, "unknown class " + name.str());
  e.name = name;
  throw e;
}

std::vector<const Class*> Kernel::classes() const {
  std::vector<const Class*> out;
  for (const auto& [_, c] : classes_) out.push_back(c.get());
  std::sort(out.begin(), out.end(),
            [](const Class* a, const Class* b) { return a->name().name() < b->name().name(); });
  return out;
}

const SlotDef& Kernel::define_slot(Class& cls, SlotDef slot) {
  if (cls.find_slot(slot.name)) {
    auto e = make_error(ObjectError::Kind::duplicate,
                        "slot " + slot.name.str() + " already defined for class " + cls.name().str());
    e.name = slot.name;
    throw e;
  }
  if (cls.subclasses_ || cls.instances_)
    throw make_error(ObjectError::Kind::declaration,
                     "cannot add slot " + slot.name.str() + " to class " + cls.name().str() +
                         " once it has instances or subclasses");
  slot.index = cls.slot_count();
  cls.slots_.push_back(slot);
  const SlotDef& def = cls.slots_.back();

  auto accessor = [&](MethodKind kind) {
    Method m;
    m.selector = def.name;
    m.kind = kind;
    m.impl = Method::Impl::SlotAccessor;
    m.slot = def.name;
    m.doc = def.doc;
    if (kind == MethodKind::send)
      m.arg_types = {def.type};
    else
      m.return_type = def.type;
    define_method(cls, std::move(m));
  };
  if (def.access == Access::both || def.access == Access::send) accessor(MethodKind::send);
  if (def.access == Access::both || def.access == Access::get) accessor(MethodKind::get);
  return def;
}

Method& Kernel::define_method(Class& cls, Method m) {
  auto& table = m.kind == MethodKind::send ? cls.send_ : cls.get_;
  auto it = table.find(m.selector);
  if (it != table.end() && it->second->impl != Method::Impl::SlotAccessor) {
    auto e = make_error(ObjectError::Kind::duplicate,
                        std::string(m.kind == MethodKind::send ? "send" : "get") + " method " +
                            m.selector.str() + " already defined for class " + cls.name().str());
    e.selector = m.selector;
    throw e;
  }
  if (m.pure && m.impl != Method::Impl::Logic) {
    auto e = make_error(ObjectError::Kind::declaration,
                        "method " + m.selector.str() + " of class " + cls.name().str() +
                            " is not implemented in logic code and cannot be declared pure");
    e.selector = m.selector;
    throw e;
  }
  m.owner = cls.name();
  auto ptr = std::make_shared<Method>(std::move(m));
  Method& ref = *ptr;
  table[ref.selector] = std::move(ptr);
  return ref;
}

Method& Kernel::replace_method(Class& cls, Method m) {
  auto& table = m.kind == MethodKind::send ? cls.send_ : cls.get_;
  m.owner = cls.name();
  auto ptr = std::make_shared<Method>(std::move(m));
  Method& ref = *ptr;
  table[ref.selector] = std::move(ptr);
  return ref;
}

void Kernel::remove_method(Class& cls, Symbol selector, MethodKind kind) {
  (kind == MethodKind::send ? cls.send_ : cls.get_).erase(selector);
}

void Kernel::set_catch_all(Class& cls, Method m) {
  m.owner = cls.name();
  cls.catch_all_ = std::make_shared<Method>(std::move(m));
}

const Method* Kernel::resolve_method(const Class& cls, Symbol selector, MethodKind kind) const {
  for (const Class* c = &cls; c; c = c->super_)
    if (const Method* m = c->own_method(selector, kind)) return m;
  if (kind == MethodKind::send) return cls.catch_all();
  return nullptr;
}

// ---------------------------------------------------------------------------
// Type checking

bool Kernel::admits(const Value& v, const TypeSpec& spec) const {
  switch (spec.kind) {
    case TypeSpec::Kind::Any:
    case TypeSpec::Kind::Prolog:
      return true;
    case TypeSpec::Kind::NilOr:
      return v.is_nil() || admits(v, *spec.inner);
    case TypeSpec::Kind::Int:
      return v.is_int();
    case TypeSpec::Kind::Float:
      return v.is_float() || v.is_int();
    case TypeSpec::Kind::Atom:
      return v.is_atom();
    case TypeSpec::Kind::Instance: {
      if (!v.is_object()) return false;
      auto it = objects_.find(v.object_id());
      if (it == objects_.end() || it->second->freed) return false;
      auto cit = classes_.find(spec.class_name);
      return cit != classes_.end() && it->second->cls->is_a(cit->second.get());
    }
  }
  return false;
}

Value Kernel::type_check(const Value& v, const TypeSpec& spec, std::size_t position) const {
  if (v.is_object()) {
    auto it = objects_.find(v.object_id());
    if (it == objects_.end() || it->second->freed) {
      auto e = make_error(ObjectError::Kind::freed_object, "object " + describe(v) + " has been freed");
      e.object = v.object_id();
      throw e;
    }
  }
  if (admits(v, spec)) {
    if (spec.base().kind == TypeSpec::Kind::Float && v.is_int()) return Value::real(double(v.int_value()));
    return v;
  }
  auto e = make_error(ObjectError::Kind::type_mismatch,
                      "expected " + spec.str() + ", found " + describe(v));
  e.expected = spec;
  e.culprit = v;
  e.arg_position = position;
  throw e;
}

// ---------------------------------------------------------------------------
// Instances

ObjectId Kernel::allocate(Class& cls) {
  auto obj = std::make_unique<Object>();
  obj->id = next_id_++;
  obj->cls = &cls;
  obj->slots.resize(cls.slot_count());
  ObjectId id = obj->id;
  objects_.emplace(id, std::move(obj));
  ++cls.instances_;
  ++stats_.created;
  hold(id);
  return id;
}

std::optional<ObjectId> Kernel::create(Symbol class_name, std::vector<Value> args) {
  Class& cls = need_class(class_name);
  const Method* init = resolve_method(cls, atoms::initialise, MethodKind::send);
  if (!init) {
    auto e = make_error(ObjectError::Kind::unknown_method, "class " + cls.name().str() + " has no initialise");
    e.selector = atoms::initialise;
    throw e;
  }
  // Reject bad arguments before anything is allocated.
  check_args(*init, atoms::initialise, args);
  ObjectId id = allocate(cls);
  auto abandon = [&] {
    Object* o = find(id);
    if (o && !o->freed) destroy(id);
    // Drop the creation hold.
    auto& scope = scopes_.back();
    auto it = std::find(scope.rbegin(), scope.rend(), id);
    if (it != scope.rend()) {
      scope.erase(std::next(it).base());
      if (Object* t = find(id)) --t->holds;
      release(id);
    }
  };
  try {
    if (!invoke(id, *init, atoms::initialise, args, nullptr)) {
      abandon();
      return std::nullopt;
    }
  } catch (...) {
    abandon();
    throw;
  }
  return id;
}

Object* Kernel::find(ObjectId id) noexcept {
  auto it = objects_.find(id);
  return it == objects_.end() ? nullptr : it->second.get();
}

Object& Kernel::get(ObjectId id) {
  if (Object* o = find(id)) return *o;
  auto e = make_error(ObjectError::Kind::freed_object,
                      id < next_id_ ? "object @" + std::to_string(id) + " has been freed"
                                    : "no object @" + std::to_string(id));
  e.object = id;
  throw e;
}

void Kernel::check_not_freed(const Object& o) const {
  if (!o.freed) return;
  auto e = make_error(ObjectError::Kind::freed_object, "object @" + std::to_string(o.id) + " has been freed");
  e.object = o.id;
  throw e;
}

Object& Kernel::need_live(ObjectId id) {
  Object& o = get(id);
  check_not_freed(o);
  return o;
}

bool Kernel::is_live(ObjectId id) const noexcept {
  auto it = objects_.find(id);
  return it != objects_.end() && !it->second->freed;
}

bool Kernel::is_instance(ObjectId id, Symbol class_name) const noexcept {
  auto it = objects_.find(id);
  auto cit = classes_.find(class_name);
  return it != objects_.end() && !it->second->freed && cit != classes_.end() &&
         it->second->cls->is_a(cit->second.get());
}

// ---------------------------------------------------------------------------
// Invocation

void Kernel::check_arity(const Method& m, Symbol selector, std::size_t n) {
  if (n >= m.min_args() && (m.variadic || n <= m.arg_types.size())) return;
  auto e = make_error(ObjectError::Kind::arity,
                      "method " + selector.str() + " expects " + std::to_string(m.arg_types.size()) +
                          " argument(s), got " + std::to_string(n));
  e.selector = selector;
  e.expected_arity = m.arg_types.size();
  e.actual_arity = n;
  throw e;
}

void Kernel::check_args(const Method& m, Symbol selector, std::vector<Value>& args) const {
  std::size_t n = args.size();
  check_arity(m, selector, n);
  if (n < m.arg_types.size()) args.resize(m.arg_types.size());
  for (std::size_t i = 0; i < args.size(); ++i) {
    const TypeSpec& spec = i < m.arg_types.size() ? m.arg_types[i] : m.rest_type;
    try {
      args[i] = type_check(args[i], spec, i + 1);
    } catch (ObjectError& e) {
      e.selector = selector;
      throw;
    }
  }
}

bool Kernel::invoke(ObjectId receiver, const Method& m, Symbol selector, std::vector<Value>& args,
                    Value* result) {
  need_live(receiver);
  check_args(m, selector, args);
  if (m.kind == MethodKind::send)
    ++stats_.sends;
  else
    ++stats_.gets;

  // Keep the receiver (possibly as a tombstone) for the duration of the call.
  retain(receiver);
  struct Guard {
    Kernel& k;
    ObjectId id;
    ~Guard() { k.release(id); }
  } guard{*this, receiver};

  Invocation inv{*this, receiver, m, selector, args, result};
  switch (m.impl) {
    case Method::Impl::Native:
      return m.native(inv);
    case Method::Impl::SlotAccessor:
      if (m.kind == MethodKind::send) {
        set_slot(receiver, m.slot, args.at(0));
      } else {
        *result = slot(receiver, m.slot);
      }
      return true;
    case Method::Impl::Logic:
      if (!logic_)
        throw make_error(ObjectError::Kind::declaration, "no logic dispatcher for " + m.method_id.str());
      return logic_(inv);
  }
  return false;
}

bool Kernel::send(ObjectId receiver, Symbol selector, std::vector<Value> args) {
  Object& o = need_live(receiver);
  const Method* m = resolve_method(*o.cls, selector, MethodKind::send);
  if (!m) {
    auto e = make_error(ObjectError::Kind::unknown_method,
                        "no send method " + selector.str() + " for class " + o.cls->name().str());
    e.selector = selector;
    e.object = receiver;
    e.name = o.cls->name();
    throw e;
  }
  return invoke(receiver, *m, selector, args, nullptr);
}

std::optional<Value> Kernel::get(ObjectId receiver, Symbol selector, std::vector<Value> args) {
  Object& o = need_live(receiver);
  const Method* m = resolve_method(*o.cls, selector, MethodKind::get);
  if (!m) {
    auto e = make_error(ObjectError::Kind::unknown_method,
                        "no get method " + selector.str() + " for class " + o.cls->name().str());
    e.selector = selector;
    e.object = receiver;
    e.name = o.cls->name();
    throw e;
  }
  Value result;
  if (!invoke(receiver, *m, selector, args, &result)) return std::nullopt;
  return result;
}

namespace {
const Class& start_class(Kernel& k, ObjectId receiver, Symbol start) {
  Object& o = k.need_live(receiver);
  Class& s = k.need_class(start);
  if (!o.cls->is_a(&s)) {
    auto e = ObjectError(ObjectError::Kind::declaration,
                         "class " + start.str() + " is not an ancestor of " + o.cls->name().str());
    e.name = start;
    e.object = receiver;
    throw e;
  }
  return s;
}
}  // namespace

bool Kernel::send_class(ObjectId receiver, Symbol start, Symbol selector, std::vector<Value> args) {
  const Class& s = start_class(*this, receiver, start);
  const Method* m = resolve_method(s, selector, MethodKind::send);
  if (!m) {
    auto e = make_error(ObjectError::Kind::unknown_method,
                        "no send method " + selector.str() + " from class " + start.str());
    e.selector = selector;
    e.name = start;
    throw e;
  }
  return invoke(receiver, *m, selector, args, nullptr);
}

std::optional<Value> Kernel::get_class(ObjectId receiver, Symbol start, Symbol selector,
                                       std::vector<Value> args) {
  const Class& s = start_class(*this, receiver, start);
  const Method* m = resolve_method(s, selector, MethodKind::get);
  if (!m) {
    auto e = make_error(ObjectError::Kind::unknown_method,
                        "no get method " + selector.str() + " from class " + start.str());
    e.selector = selector;
    e.name = start;
    throw e;
  }
  Value result;
  if (!invoke(receiver, *m, selector, args, &result)) return std::nullopt;
  return result;
}

// ---------------------------------------------------------------------------
// Slots and members

namespace {
const SlotDef& need_slot(const Object& o, Symbol name) {
  if (const SlotDef* d = o.cls->find_slot(name)) return *d;
  auto e = ObjectError(ObjectError::Kind::unknown_method,
                       "class " + o.cls->name().str() + " has no slot " + name.str());
  e.selector = name;
  e.object = o.id;
  throw e;
}
}  // namespace

const Value& Kernel::slot(ObjectId id, Symbol name) {
  Object& o = need_live(id);
  return o.slots[need_slot(o, name).index];
}

void Kernel::set_slot(ObjectId id, Symbol name, Value v) {
  Object& o = need_live(id);
  const SlotDef& d = need_slot(o, name);
  Value checked = type_check(v, d.type, 1);
  set_slot_raw(o, d.index, std::move(checked));
}

void Kernel::set_slot_raw(Object& o, std::size_t index, Value v) {
  retain_value(v);
  Value old = std::exchange(o.slots.at(index), std::move(v));
  release_value(old);
}

void Kernel::append_member(ObjectId owner, Value v) {
  Object& o = need_live(owner);
  retain_value(v);
  o.members.push_back(std::move(v));
}

bool Kernel::remove_member(ObjectId owner, const Value& v) {
  Object& o = need_live(owner);
  auto it = std::find(o.members.begin(), o.members.end(), v);
  if (it == o.members.end()) return false;
  Value old = *it;
  o.members.erase(it);
  release_value(old);
  return true;
}

void Kernel::clear_members(ObjectId owner) {
  Object& o = need_live(owner);
  std::vector<Value> old = std::move(o.members);
  o.members.clear();
  for (const Value& v : old) release_value(v);
}

// ---------------------------------------------------------------------------
// Lifetime

void Kernel::retain_value(const Value& v) {
  if (v.is_object()) retain(v.object_id());
}

void Kernel::release_value(const Value& v) {
  if (v.is_object()) release(v.object_id());
}

void Kernel::retain(ObjectId id) { ++get(id).refcount; }

void Kernel::release(ObjectId id) {
  Object* o = find(id);
  if (!o) return;
  if (o->refcount == 0) throw std::logic_error("refcount underflow on @" + std::to_string(id));
  if (--o->refcount > 0 || o->locked || o->permanent) return;
  if (o->freed) {
    objects_.erase(id);
    --tombstones_;
    return;
  }
  destroy_now(id);
}

void Kernel::lock(ObjectId id) {
  Object& o = need_live(id);
  if (o.locked) return;
  o.locked = true;
  ++o.refcount;
}

void Kernel::unlock(ObjectId id) {
  Object& o = get(id);
  if (!o.locked || o.permanent) return;
  o.locked = false;
  release(id);
}

void Kernel::destroy(ObjectId id) {
  Object& o = get(id);
  if (o.permanent) {
    auto e = make_error(ObjectError::Kind::permission,
                        "object " + (o.ref_name ? "@" + o.ref_name->str() : "@" + std::to_string(id)) +
                            " cannot be freed");
    e.object = id;
    throw e;
  }
  check_not_freed(o);
  destroy_now(id);
}

void Kernel::destroy_now(ObjectId id) {
  pending_.push_back(id);
  if (draining_) return;
  draining_ = true;
  struct Reset {
    bool& flag;
    ~Reset() { flag = false; }
  } reset{draining_};
  while (!pending_.empty()) {
    ObjectId next = pending_.back();
    pending_.pop_back();
    Object* o = find(next);
    if (!o || o->freed) continue;
    o->freed = true;
    ++stats_.destroyed;
    --o->cls->instances_;
    for (Class* c = o->cls; c; c = c->super_) {
      if (!c->on_destroy) continue;
      try {
        c->on_destroy(*this, next);
      } catch (...) {
        // Destruction must complete; hook failures are dropped.
      }
    }
    o = find(next);
    std::vector<Value> slots = std::move(o->slots);
    std::vector<Value> members = std::move(o->members);
    o->slots.clear();
    o->members.clear();
    o->native.reset();
    if (o->locked) {
      o->locked = false;
      --o->refcount;
    }
    if (o->refcount == 0)
      objects_.erase(next);
    else
      ++tombstones_;
    for (const Value& v : slots) release_value(v);
    for (const Value& v : members) release_value(v);
  }
}

// ---------------------------------------------------------------------------
// Hold scopes

std::size_t Kernel::open_scope() {
  scopes_.emplace_back();
  return scopes_.size();
}

void Kernel::close_scope(std::size_t depth) {
  while (scopes_.size() >= depth && scopes_.size() > 1) {
    std::vector<ObjectId> held = std::move(scopes_.back());
    scopes_.pop_back();
    for (ObjectId id : held) {
      if (Object* o = find(id)) --o->holds;
      release(id);
    }
  }
}

void Kernel::hold(ObjectId id) {
  Object& o = get(id);
  ++o.refcount;
  ++o.holds;
  scopes_.back().push_back(id);
}

void Kernel::hold_outer(ObjectId id) {
  Object& o = get(id);
  ++o.refcount;
  ++o.holds;
  (scopes_.size() > 1 ? scopes_[scopes_.size() - 2] : scopes_.back()).push_back(id);
}

// ---------------------------------------------------------------------------
// Names

void Kernel::name_object(ObjectId id, Symbol name) {
  Object& o = need_live(id);
  if (names_.count(name)) throw make_error(ObjectError::Kind::duplicate, "@" + name.str() + " already exists");
  o.ref_name = name;
  o.permanent = true;
  if (!o.locked) {
    o.locked = true;
    ++o.refcount;
  }
  names_[name] = id;
}

std::optional<ObjectId> Kernel::named(Symbol name) const {
  auto it = names_.find(name);
  if (it == names_.end()) return std::nullopt;
  return it->second;
}

// ---------------------------------------------------------------------------
// Introspection

std::size_t Kernel::live_count() const noexcept { return objects_.size() - tombstones_; }
std::size_t Kernel::tombstone_count() const noexcept { return tombstones_; }

std::size_t Kernel::instance_count(Symbol class_name) const {
  auto it = classes_.find(class_name);
  if (it == classes_.end()) return 0;
  std::size_t n = 0;
  for (const auto& [_, o] : objects_)
    if (!o->freed && o->cls->is_a(it->second.get())) ++n;
  return n;
}

std::vector<ObjectId> Kernel::object_ids() const {
  std::vector<ObjectId> ids;
  ids.reserve(objects_.size());
  for (const auto& [id, _] : objects_) ids.push_back(id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

AuditReport Kernel::audit() const {
  std::unordered_map<ObjectId, std::uint32_t> expected;
  for (const auto& [id, o] : objects_) expected[id] = o->locked ? 1 : 0;
  for (const auto& scope : scopes_)
    for (ObjectId id : scope) ++expected[id];
  auto edges = [](const Object& o, auto&& f) {
    for (const Value& v : o.slots)
      if (v.is_object()) f(v.object_id());
    for (const Value& v : o.members)
      if (v.is_object()) f(v.object_id());
  };
  for (const auto& [id, o] : objects_) {
    if (o->freed) continue;
    edges(*o, [&](ObjectId target) { ++expected[target]; });
  }

  AuditReport report;
  for (const auto& [id, o] : objects_) {
    std::uint32_t want = expected[id];
    if (want != o->refcount) report.mismatches.push_back({id, o->refcount, want});
  }
  for (const auto& [id, n] : expected)
    if (!objects_.count(id)) report.mismatches.push_back({id, 0, n});

  // Reachability from holds and locks; anything else alive sits on a cycle.
  std::unordered_set<ObjectId> seen;
  std::vector<ObjectId> stack;
  for (const auto& [id, o] : objects_)
    if (o->locked || o->holds > 0) stack.push_back(id);
  while (!stack.empty()) {
    ObjectId id = stack.back();
    stack.pop_back();
    if (!seen.insert(id).second) continue;
    auto it = objects_.find(id);
    if (it == objects_.end() || it->second->freed) continue;
    edges(*it->second, [&](ObjectId t) { stack.push_back(t); });
  }
  for (const auto& [id, o] : objects_)
    if (!seen.count(id)) report.cyclic.push_back(id);
  std::sort(report.mismatches.begin(), report.mismatches.end(),
            [](const AuditEntry& a, const AuditEntry& b) { return a.id < b.id; });
  std::sort(report.cyclic.begin(), report.cyclic.end());
  return report;
}

std::string Kernel::dump_objects() const {
  std::ostringstream os;
  for (ObjectId id : object_ids()) {
    const Object& o = *objects_.at(id);
    os << '@' << (o.ref_name ? o.ref_name->str() : std::to_string(id)) << " class=" << o.cls->name().name()
       << " refcount=" << o.refcount << " locked=" << (o.locked ? "true" : "false");
    if (o.freed) os << " freed=true";
    os << '\n';
  }
  return os.str();
}

bool Kernel::known_event(Symbol kind) { return taxonomy().count(kind.name()) != 0; }

bool Kernel::event_is_a(Symbol kind, Symbol ancestor) {
  const auto& t = taxonomy();
  std::string_view k = kind.name();
  std::string_view target = ancestor.name();
  while (!k.empty()) {
    if (k == target) return true;
    auto it = t.find(k);
    if (it == t.end()) return false;
    k = it->second;
  }
  return false;
}

}  // namespace objlog
