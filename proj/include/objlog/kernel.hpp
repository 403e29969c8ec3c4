#pragma once

// The embedded object system: classes with single inheritance, soft-typed
// methods and slots, reference-counted instances and hold scopes.

#include <any>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "objlog/errors.hpp"
#include "objlog/symbol.hpp"

namespace objlog {

using ObjectId = std::int64_t;

struct ObjectRef {
  ObjectId id = 0;
  friend bool operator==(ObjectRef, ObjectRef) = default;
};

struct NilValue {
  friend bool operator==(NilValue, NilValue) = default;
};

// A kernel datum. Object values name kernel objects, including host-term
// wrappers; @nil is represented as NilValue.
class Value {
 public:
  Value() = default;
  static Value nil() { return Value(); }
  static Value integer(std::int64_t v) { return Value(Rep(v)); }
  static Value real(double v) { return Value(Rep(v)); }
  static Value atom(Symbol s) { return Value(Rep(s)); }
  static Value object(ObjectId id) { return Value(Rep(ObjectRef{id})); }

  bool is_nil() const noexcept { return std::holds_alternative<NilValue>(rep_); }
  bool is_int() const noexcept { return std::holds_alternative<std::int64_t>(rep_); }
  bool is_float() const noexcept { return std::holds_alternative<double>(rep_); }
  bool is_atom() const noexcept { return std::holds_alternative<Symbol>(rep_); }
  bool is_object() const noexcept { return std::holds_alternative<ObjectRef>(rep_); }

  std::int64_t int_value() const { return std::get<std::int64_t>(rep_); }
  double float_value() const { return std::get<double>(rep_); }
  Symbol atom_value() const { return std::get<Symbol>(rep_); }
  ObjectId object_id() const { return std::get<ObjectRef>(rep_).id; }

  friend bool operator==(const Value&, const Value&) = default;

 private:
  using Rep = std::variant<NilValue, std::int64_t, double, Symbol, ObjectRef>;
  explicit Value(Rep r) : rep_(r) {}
  Rep rep_;
};

std::string to_string(const Value& v);

// Soft type of a slot, argument or result.
struct TypeSpec {
  enum class Kind : std::uint8_t { Int, Float, Atom, Any, Prolog, Instance, NilOr };
  Kind kind = Kind::Any;
  Symbol class_name;                   // Instance
  std::shared_ptr<const TypeSpec> inner;  // NilOr

  static TypeSpec any() { return {}; }
  static TypeSpec of(Kind k) {
    TypeSpec t;
    t.kind = k;
    return t;
  }
  static TypeSpec instance(Symbol cls) {
    TypeSpec t;
    t.kind = Kind::Instance;
    t.class_name = cls;
    return t;
  }
  static TypeSpec nil_or(TypeSpec in) {
    TypeSpec t;
    t.kind = Kind::NilOr;
    t.inner = std::make_shared<const TypeSpec>(std::move(in));
    return t;
  }
  // Parses int, float, atom, any, prolog, [T] or a class name.
  static TypeSpec parse(std::string_view text);

  // This type with any nil-or layers removed.
  const TypeSpec& base() const noexcept { return kind == Kind::NilOr ? inner->base() : *this; }
  bool admits_nil() const noexcept { return kind == Kind::NilOr || kind == Kind::Any; }
  std::string str() const;
  friend bool operator==(const TypeSpec& a, const TypeSpec& b);
};

enum class Access : std::uint8_t { both, get, send, none };
Access parse_access(std::string_view s);
std::string_view access_name(Access a);

enum class MethodKind : std::uint8_t { send, get };

struct SlotDef {
  Symbol name;
  TypeSpec type;
  Access access = Access::both;
  std::string doc;
  std::size_t index = 0;  // position in the instance slot vector
};

class Kernel;
struct Method;

// One method activation.
struct Invocation {
  Kernel& kernel;
  ObjectId self;
  const Method& method;
  Symbol selector;           // differs from method.selector for catch-all methods
  std::vector<Value>& args;  // type-checked
  Value* result;             // get methods only
};

using NativeFn = std::function<bool(Invocation&)>;

struct Method {
  enum class Impl : std::uint8_t { Native, Logic, SlotAccessor };
  Symbol selector;
  MethodKind kind = MethodKind::send;
  std::vector<TypeSpec> arg_types;
  // Trailing arguments beyond arg_types, typed rest_type, when variadic.
  bool variadic = false;
  TypeSpec rest_type;
  TypeSpec return_type;
  Impl impl = Impl::Native;
  NativeFn native;
  Symbol method_id;  // Logic: 'Class->sel' or 'Class<-sel'
  Symbol slot;       // SlotAccessor
  bool pure = false;  // Logic only: dispatched in-engine, keeps choicepoints
  Symbol owner;
  std::string doc;

  // Lowest accepted argument count: trailing nil-or arguments may be left
  // out and arrive as nil.
  std::size_t min_args() const;
};

class Class {
 public:
  Symbol name() const noexcept { return name_; }
  Class* super() const noexcept { return super_; }
  bool is_a(const Class* other) const noexcept;

  const std::vector<SlotDef>& own_slots() const noexcept { return slots_; }
  std::size_t slot_count() const noexcept { return slot_base_ + slots_.size(); }
  const SlotDef* find_slot(Symbol name) const noexcept;

  const Method* own_method(Symbol selector, MethodKind kind) const noexcept;
  const std::map<Symbol, std::shared_ptr<Method>>& own_methods(MethodKind kind) const noexcept {
    return kind == MethodKind::send ? send_ : get_;
  }

  // Catch-all send method used when no selector matches (the @prolog proxy).
  const Method* catch_all() const noexcept;

  // Runs on destruction, before slot values are released; subclass first.
  std::function<void(Kernel&, ObjectId)> on_destroy;

  std::string doc;

 private:
  friend class Kernel;
  Symbol name_;
  Class* super_ = nullptr;
  std::size_t slot_base_ = 0;
  std::vector<SlotDef> slots_;
  std::map<Symbol, std::shared_ptr<Method>> send_, get_;
  std::shared_ptr<Method> catch_all_;
  std::size_t subclasses_ = 0;
  std::size_t instances_ = 0;
};

struct Object {
  ObjectId id = 0;
  Class* cls = nullptr;
  std::vector<Value> slots;
  std::vector<Value> members;  // ordered contents (picture contents, node sons, message args)
  std::uint32_t refcount = 0;
  std::uint32_t holds = 0;
  bool locked = false;
  bool freed = false;
  bool permanent = false;  // well-known objects (@nil, @prolog)
  std::optional<Symbol> ref_name;  // named references such as @nil
  std::any native;         // class-specific host data
};

// Raised by kernel operations; the bridge maps these to error terms.
class ObjectError : public Error {
 public:
  enum class Kind {
    unknown_class,
    unknown_method,
    type_mismatch,
    freed_object,
    permission,
    arity,
    declaration,
    instantiation,
    duplicate,
  };
  ObjectError(Kind k, std::string what) : Error(std::move(what)), kind_(k) {}
  Kind kind() const noexcept { return kind_; }

  // Context, filled where known.
  Symbol selector;
  ObjectId object = 0;
  TypeSpec expected;
  std::optional<Value> culprit;
  std::size_t arg_position = 0;  // 1-based, 0 when not applicable
  std::size_t expected_arity = 0, actual_arity = 0;
  Symbol name;  // class or object name

 private:
  Kind kind_;
};

struct KernelStats {
  std::uint64_t created = 0;
  std::uint64_t destroyed = 0;
  std::uint64_t sends = 0;
  std::uint64_t gets = 0;
};

// Refcount audit result for one object.
struct AuditEntry {
  ObjectId id;
  std::uint32_t stored;
  std::uint32_t expected;
};

struct AuditReport {
  std::vector<AuditEntry> mismatches;
  // Objects kept alive only by reference cycles among unheld objects.
  std::vector<ObjectId> cyclic;
  bool ok() const noexcept { return mismatches.empty(); }
};

// Dispatches Logic methods; installed by the bridge.
using LogicDispatcher =
    std::function<bool(Invocation&)>;
// Realizes a class on demand (JIT); returns nullptr when it cannot.
using ClassResolver = std::function<Class*(Symbol)>;

class Kernel {
 public:
  Kernel();
  ~Kernel();
  Kernel(const Kernel&) = delete;
  Kernel& operator=(const Kernel&) = delete;

  // Classes
  Class& define_class(Symbol name, Symbol super);
  // Lookup without realization.
  Class* find_class(Symbol name) const noexcept;
  // Lookup that realizes unknown classes through the resolver.
  Class* resolve_class(Symbol name);
  Class& need_class(Symbol name);
  void set_class_resolver(ClassResolver r) { resolver_ = std::move(r); }
  std::vector<const Class*> classes() const;

  const SlotDef& define_slot(Class& cls, SlotDef slot);
  Method& define_method(Class& cls, Method m);
  // Replaces an own method in place (reconsult); signature must match.
  Method& replace_method(Class& cls, Method m);
  void remove_method(Class& cls, Symbol selector, MethodKind kind);
  void set_catch_all(Class& cls, Method m);

  // Nearest method along the super chain (catch-all last), or nullptr.
  const Method* resolve_method(const Class& cls, Symbol selector, MethodKind kind) const;

  // Type checking; int widens to float. Throws ObjectError(type_mismatch).
  Value type_check(const Value& v, const TypeSpec& spec, std::size_t position = 0) const;
  bool admits(const Value& v, const TypeSpec& spec) const;

  // Instances. create() runs initialise; the new object carries one hold in
  // the innermost hold scope. Failure of initialise destroys the object and
  // returns nullopt.
  std::optional<ObjectId> create(Symbol class_name, std::vector<Value> args);
  // Allocates without initialise; one hold in the innermost scope.
  ObjectId allocate(Class& cls);
  // Allocates a permanent, locked object known as @name (no hold).
  ObjectId allocate_named(Class& cls, Symbol name);

  Object& get(ObjectId id);  // live or tombstone; ObjectError when unknown
  Object& need_live(ObjectId id);
  Object* find(ObjectId id) noexcept;
  bool is_live(ObjectId id) const noexcept;
  bool is_instance(ObjectId id, Symbol class_name) const noexcept;

  // Invocation. Arguments are type-checked against the method signature.
  bool send(ObjectId receiver, Symbol selector, std::vector<Value> args);
  std::optional<Value> get(ObjectId receiver, Symbol selector, std::vector<Value> args);
  // Starts the method search at class start (send_super / send_class).
  bool send_class(ObjectId receiver, Symbol start, Symbol selector, std::vector<Value> args);
  std::optional<Value> get_class(ObjectId receiver, Symbol start, Symbol selector,
                                 std::vector<Value> args);
  // Runs an already resolved method; args are checked and coerced in place.
  bool invoke(ObjectId receiver, const Method& m, Symbol selector, std::vector<Value>& args,
              Value* result);
  // Checks arity and argument types; coerces in place.
  void check_args(const Method& m, Symbol selector, std::vector<Value>& args) const;

  void set_logic_dispatcher(LogicDispatcher d) { logic_ = std::move(d); }

  // Slots
  const Value& slot(ObjectId id, Symbol name);
  void set_slot(ObjectId id, Symbol name, Value v);  // type-checked
  void set_slot_raw(Object& o, std::size_t index, Value v);

  // Members (ordered contents)
  void append_member(ObjectId owner, Value v);
  bool remove_member(ObjectId owner, const Value& v);
  void clear_members(ObjectId owner);

  // Lifetime
  void retain(ObjectId id);
  void release(ObjectId id);
  void lock(ObjectId id);
  void unlock(ObjectId id);
  // Frees regardless of refcount; a still-referenced object stays behind
  // as a tombstone that rejects all use.
  void destroy(ObjectId id);

  // Hold scopes. Objects created by create()/allocate() and explicit
  // hold() calls are held until the innermost scope closes.
  std::size_t open_scope();
  void close_scope(std::size_t depth);
  void hold(ObjectId id);
  // Holds in the scope below the innermost one (results that outlive the
  // call creating them).
  void hold_outer(ObjectId id);
  std::size_t scope_depth() const noexcept { return scopes_.size(); }
  // Holds on id in the innermost scope.
  std::size_t holds_in_scope(ObjectId id) const;

  // Well-known objects
  ObjectId nil_id() const noexcept { return nil_; }
  void name_object(ObjectId id, Symbol name);  // permanent named reference
  std::optional<ObjectId> named(Symbol name) const;

  // Introspection
  std::size_t live_count() const noexcept;
  std::size_t tombstone_count() const noexcept;
  std::size_t instance_count(Symbol class_name) const;
  std::vector<ObjectId> object_ids() const;  // ascending
  const KernelStats& stats() const noexcept { return stats_; }
  // Full-heap sweep comparing stored refcounts with incoming references,
  // locks and holds.
  AuditReport audit() const;
  // One line per object: "@N class=... refcount=... locked=..."
  std::string dump_objects() const;

  // Throws ObjectError(arity) unless n arguments suit m.
  static void check_arity(const Method& m, Symbol selector, std::size_t n);

  // Event taxonomy: kind is_a ancestor.
  static bool event_is_a(Symbol kind, Symbol ancestor);
  static bool known_event(Symbol kind);

 private:
  void define_core_classes();
  void destroy_now(ObjectId id);
  void release_value(const Value& v);
  void retain_value(const Value& v);
  void check_not_freed(const Object& o) const;

  std::unordered_map<Symbol, std::unique_ptr<Class>> classes_;
  std::unordered_map<ObjectId, std::unique_ptr<Object>> objects_;
  std::unordered_map<Symbol, ObjectId> names_;
  std::vector<std::vector<ObjectId>> scopes_;
  std::vector<ObjectId> pending_;  // destruction work list
  bool draining_ = false;
  ObjectId next_id_ = 1;
  ObjectId nil_ = 0;
  ClassResolver resolver_;
  LogicDispatcher logic_;
  KernelStats stats_;
  std::size_t tombstones_ = 0;
};

// Holds a scope open for the lifetime of the guard.
class HoldScope {
 public:
  explicit HoldScope(Kernel& k) : kernel_(k), depth_(k.open_scope()) {}
  ~HoldScope() { kernel_.close_scope(depth_); }
  HoldScope(const HoldScope&) = delete;
  HoldScope& operator=(const HoldScope&) = delete;

 private:
  Kernel& kernel_;
  std::size_t depth_;
};

}  // namespace objlog
