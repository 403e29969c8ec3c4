#include "objlog/bridge.hpp"

namespace objlog {

const Symbol Bridge::kPrologClass("prolog");

// Frame, hold scope and wrapper ledger of one bridge call. The post-call
// protocol runs exactly once, also when the call unwinds by an exception.
struct CallScope {
  explicit CallScope(Bridge& b) : bridge(b), frame(b.frames_), holds(b.kernel_) {}
  ~CallScope() {
    if (done) return;
    try {
      bridge.host_.post_call(ledger);
    } catch (...) {
      // Already unwinding; the original error wins.
    }
  }
  void finish() {
    done = true;
    bridge.host_.post_call(ledger);
  }

  Bridge& bridge;
  FrameGuard frame;
  HoldScope holds;
  Ledger ledger;
  bool done = false;
};

namespace {

const Symbol kUninstantiation("uninstantiation_error");
const Symbol kObjectAtom("object");
const Symbol kSystemError("system_error");
const Symbol kArityError("arity_error");
const Symbol kDeclarationError("declaration_error");
const Symbol kStale("stale_reference");

Term at(Term inner) { return Term::compound(atoms::at, {std::move(inner)}); }

// Selector and arguments of a message term.
struct Message {
  Symbol selector;
  std::span<const Term> args;
};

Message split_message(const Term& msg) {
  const Term& m = msg.deref();
  if (m.is_atom()) return {m.symbol(), {}};
  if (m.is_compound()) return {m.symbol(), m.args()};
  if (m.is_var()) err::raise(err::instantiation());
  err::raise(err::type("callable", m));
}

// send(R, Sel, A1, ..., An) is read as send(R, Sel(A1, ..., An)).
Term spread_message(const Term& selector, std::span<const Term> args) {
  const Term& s = selector.deref();
  if (s.is_var()) err::raise(err::instantiation());
  if (!s.is_atom()) err::raise(err::type("atom", s));
  if (args.empty()) return s;
  return Term::compound(s.symbol(), args);
}

const Class& start_class(Kernel& k, const Object& o, Symbol start) {
  Class& s = k.need_class(start);
  if (!o.cls->is_a(&s)) {
    ObjectError e(ObjectError::Kind::declaration,
                  "class " + start.str() + " is not an ancestor of " + o.cls->name().str());
    e.name = start;
    e.object = o.id;
    throw e;
  }
  return s;
}

const Method& need_method(Kernel& k, const Class& cls, Symbol selector, MethodKind kind, ObjectId self) {
  if (const Method* m = k.resolve_method(cls, selector, kind)) return *m;
  ObjectError e(ObjectError::Kind::unknown_method,
                std::string("no ") + (kind == MethodKind::send ? "send" : "get") + " method " +
                    selector.str() + " for class " + cls.name().str());
  e.selector = selector;
  e.object = self;
  e.name = cls.name();
  throw e;
}

bool is_pure_logic(const Method& m) { return m.impl == Method::Impl::Logic && m.pure; }

}  // namespace

Bridge::Bridge(Engine& engine, Kernel& kernel, HostData& host, FrameStack& frames)
    : engine_(engine), kernel_(kernel), host_(host), frames_(frames) {}

// ---------------------------------------------------------------------------
// Conversion

Term Bridge::object_term(ObjectId id) const {
  if (id == kernel_.nil_id()) return at(Term::atom(Symbol("nil")));
  if (Object* o = kernel_.find(id); o && o->ref_name) return at(Term::atom(*o->ref_name));
  return Term::object(id);
}

ObjectId Bridge::object_of(const Term& ref) {
  const Term& r = ref.deref();
  if (r.is_object()) return r.object_id();
  if (r.is_var()) err::raise(err::instantiation());
  if (r.is_compound(atoms::at, 1)) {
    const Term& name = r.arg(0).deref();
    if (name.is_int()) return name.int_value();
    if (name.is_atom()) {
      if (auto id = kernel_.named(name.symbol())) return *id;
      err::raise(err::existence("object", r));
    }
    if (name.is_var()) err::raise(err::instantiation());
  }
  err::raise(err::type("object", r));
}

std::optional<Value> Bridge::to_value(const Term& term, const TypeSpec& spec, Ledger& ledger) {
  const Term& t = term.deref();
  const TypeSpec& base = spec.base();
  switch (t.tag()) {
    case Tag::Int:
      return Value::integer(t.int_value());
    case Tag::Float:
      return Value::real(t.float_value());
    case Tag::Atom:
      return Value::atom(t.symbol());
    case Tag::Obj:
      return Value::object(t.object_id());
    case Tag::Var:
      if (base.kind == TypeSpec::Kind::Prolog) return Value::object(host_.wrap(t, ledger));
      err::raise(err::instantiation());
    case Tag::Compound:
      break;
    default:
      err::raise(err::type("term", t));
  }
  if (t.is_compound(atoms::at, 1)) {
    ObjectId id = object_of(t);
    if (id == kernel_.nil_id()) return Value::nil();
    return Value::object(id);
  }
  switch (base.kind) {
    case TypeSpec::Kind::Prolog:
      return Value::object(host_.wrap(t, ledger));
    case TypeSpec::Kind::Int:
    case TypeSpec::Kind::Float:
    case TypeSpec::Kind::Atom:
      err::raise(err::type(base.str(), t));
    default:
      break;
  }
  std::optional<ObjectId> id = instantiate(t, ledger);
  if (!id) return std::nullopt;
  return Value::object(*id);
}

Term Bridge::to_term(const Value& v) {
  if (v.is_nil()) return object_term(kernel_.nil_id());
  if (v.is_int()) return Term::integer(v.int_value());
  if (v.is_float()) return Term::real(v.float_value());
  if (v.is_atom()) return Term::atom(v.atom_value());
  ObjectId id = v.object_id();
  if (host_.is_host_term(id)) return host_.read(id);
  return object_term(id);
}

std::optional<ObjectId> Bridge::instantiate(const Term& spec, Ledger& ledger) {
  const Term& s = spec.deref();
  if (s.is_var()) err::raise(err::instantiation());
  if (!s.is_callable()) err::raise(err::type("callable", s));
  Symbol name = s.symbol();
  Class& cls = kernel_.need_class(name);
  const Method* init = kernel_.resolve_method(cls, atoms::initialise, MethodKind::send);
  std::vector<Value> args;
  if (init) {
    std::span<const Term> targs = s.is_compound() ? s.args() : std::span<const Term>{};
    Kernel::check_arity(*init, atoms::initialise, targs.size());
    args.reserve(targs.size());
    for (std::size_t i = 0; i < targs.size(); ++i) {
      const TypeSpec& t = i < init->arg_types.size() ? init->arg_types[i] : init->rest_type;
      std::optional<Value> v = to_value(targs[i], t, ledger);
      if (!v) return std::nullopt;
      args.push_back(std::move(*v));
    }
  }
  return kernel_.create(name, std::move(args));
}

std::optional<Value> Bridge::result_value(const Term& term, const TypeSpec& spec) {
  const Term& t = term.deref();
  const TypeSpec& base = spec.base();
  if (t.is_var() && base.kind != TypeSpec::Kind::Prolog) err::raise(err::instantiation());
  if (t.is_atomic() || t.is_compound(atoms::at, 1)) {
    Ledger unused;
    return kernel_.type_check(*to_value(t, spec, unused), spec);
  }
  if (base.kind == TypeSpec::Kind::Prolog) return Value::object(host_.wrap_recorded(t));
  FrameGuard frame(frames_);
  Ledger ledger;
  std::optional<Value> v;
  try {
    v = to_value(t, spec, ledger);
  } catch (...) {
    host_.post_call(ledger);
    throw;
  }
  host_.post_call(ledger);
  if (v) return kernel_.type_check(*v, spec);
  return v;
}

// ---------------------------------------------------------------------------
// Bridge predicates

bool Bridge::pl_new(CallContext& c) {
  ++stats_.calls;
  const Term& ref = c.arg(0);
  if (!ref.is_var()) err::raise(Term::compound(kUninstantiation, {ref}));
  std::optional<ObjectId> id;
  {
    CallScope scope(*this);
    id = instantiate(c.arg(1), scope.ledger);
    if (id) kernel_.hold_outer(*id);
    scope.finish();
  }
  if (!id) return false;
  return c.unify(ref, object_term(*id));
}

bool Bridge::pl_send(CallContext& c, const Term& receiver, const Term& message,
                     std::optional<Symbol> start) {
  ++stats_.calls;
  ObjectId self = object_of(receiver);
  Message msg = split_message(message);
  Object& o = kernel_.need_live(self);
  const Class& cls = start ? start_class(kernel_, o, *start) : *o.cls;
  const Method& m = need_method(kernel_, cls, msg.selector, MethodKind::send, self);
  if (is_pure_logic(m)) {
    ++stats_.logic_dispatches;
    c.continue_with(Term::compound(atoms::send_implementation,
                                   {Term::atom(m.method_id), message.deref(), object_term(self)}),
                    atoms::pce_principal);
    return true;
  }
  Kernel::check_arity(m, msg.selector, msg.args.size());
  CallScope scope(*this);
  std::vector<Value> args;
  args.reserve(msg.args.size());
  for (std::size_t i = 0; i < msg.args.size(); ++i) {
    const TypeSpec& t = i < m.arg_types.size() ? m.arg_types[i] : m.rest_type;
    std::optional<Value> v = to_value(msg.args[i], t, scope.ledger);
    if (!v) return false;
    args.push_back(std::move(*v));
  }
  bool ok = kernel_.invoke(self, m, msg.selector, args, nullptr);
  scope.finish();
  return ok;
}

bool Bridge::pl_get(CallContext& c, const Term& receiver, const Term& message, const Term& result,
                    std::optional<Symbol> start) {
  ++stats_.calls;
  ObjectId self = object_of(receiver);
  Message msg = split_message(message);
  Object& o = kernel_.need_live(self);
  const Class& cls = start ? start_class(kernel_, o, *start) : *o.cls;
  const Method& m = need_method(kernel_, cls, msg.selector, MethodKind::get, self);
  if (is_pure_logic(m)) {
    ++stats_.logic_dispatches;
    c.continue_with(Term::compound(atoms::get_implementation, {Term::atom(m.method_id), message.deref(),
                                                               object_term(self), result}),
                    atoms::pce_principal);
    return true;
  }
  Kernel::check_arity(m, msg.selector, msg.args.size());
  Term out;
  {
    CallScope scope(*this);
    std::vector<Value> args;
    args.reserve(msg.args.size());
    for (std::size_t i = 0; i < msg.args.size(); ++i) {
      const TypeSpec& t = i < m.arg_types.size() ? m.arg_types[i] : m.rest_type;
      std::optional<Value> v = to_value(msg.args[i], t, scope.ledger);
      if (!v) return false;
      args.push_back(std::move(*v));
    }
    Value value;
    if (!kernel_.invoke(self, m, msg.selector, args, &value)) return false;
    out = to_term(value);
    // A result only this call holds would die with the call.
    if (value.is_object() && !host_.is_host_term(value.object_id())) {
      ObjectId id = value.object_id();
      Object* r = kernel_.find(id);
      if (r && !r->freed && r->refcount <= kernel_.holds_in_scope(id)) kernel_.hold_outer(id);
    }
    scope.finish();
  }
  return c.unify(result, out);
}

bool Bridge::pl_free(CallContext& c) {
  ++stats_.calls;
  kernel_.destroy(object_of(c.arg(0)));
  return true;
}

// ---------------------------------------------------------------------------
// Methods implemented in logic code and callbacks

bool Bridge::dispatch_logic(Invocation& inv) {
  ++stats_.logic_dispatches;
  const Method& m = inv.method;
  Term msg;
  if (inv.args.empty()) {
    msg = Term::atom(inv.selector);
  } else {
    std::vector<Term> args;
    args.reserve(inv.args.size());
    for (const Value& v : inv.args) args.push_back(to_term(v));
    msg = Term::compound(inv.selector, std::move(args));
  }
  Term id = Term::atom(m.method_id);
  Term self = object_term(inv.self);
  if (m.kind == MethodKind::send) {
    Query q(engine_, Term::compound(atoms::send_implementation, {id, msg, self}), atoms::pce_principal);
    if (!q.next()) return false;
    q.cut();
    return true;
  }
  Term result = Term::fresh_var();
  Query q(engine_, Term::compound(atoms::get_implementation, {id, msg, self, result}), atoms::pce_principal);
  if (!q.next()) return false;
  q.cut();
  std::optional<Value> v = result_value(result, m.return_type);
  if (!v) return false;
  *inv.result = std::move(*v);
  return true;
}

bool Bridge::callback(Invocation& inv, Symbol predicate, std::size_t first_arg) {
  ++stats_.callbacks;
  Term goal;
  if (inv.args.size() <= first_arg) {
    goal = Term::atom(predicate);
  } else {
    std::vector<Term> args;
    args.reserve(inv.args.size() - first_arg);
    for (std::size_t i = first_arg; i < inv.args.size(); ++i) args.push_back(to_term(inv.args[i]));
    goal = Term::compound(predicate, std::move(args));
  }
  Query q(engine_, goal, atoms::user);
  if (!q.next()) return false;
  q.cut();
  return true;
}

// ---------------------------------------------------------------------------
// Errors

Term Bridge::error_term(const Error& e) const {
  Term context = Term::compound(atoms::context, {Term::fresh_var(), Term::atom(e.what())});
  auto value_term = [this](const Value& v) -> Term {
    if (v.is_nil()) return object_term(kernel_.nil_id());
    if (v.is_int()) return Term::integer(v.int_value());
    if (v.is_float()) return Term::real(v.float_value());
    if (v.is_atom()) return Term::atom(v.atom_value());
    return object_term(v.object_id());
  };
  Term formal;
  if (const auto* oe = dynamic_cast<const ObjectError*>(&e)) {
    switch (oe->kind()) {
      case ObjectError::Kind::unknown_class:
        formal = Term::compound(atoms::existence_error, {Term::atom("class"), Term::atom(oe->name)});
        break;
      case ObjectError::Kind::unknown_method:
        formal = Term::compound(atoms::existence_error,
                                {Term::atom("method"),
                                 Term::compound(atoms::arrow, {Term::atom(oe->name), Term::atom(oe->selector)})});
        break;
      case ObjectError::Kind::type_mismatch:
        formal = Term::compound(atoms::type_error,
                                {Term::atom(oe->expected.str()),
                                 oe->culprit ? value_term(*oe->culprit) : Term::fresh_var()});
        break;
      case ObjectError::Kind::freed_object:
        formal = Term::compound(atoms::existence_error, {Term::atom(kObjectAtom), Term::object(oe->object)});
        break;
      case ObjectError::Kind::permission:
        formal = Term::compound(atoms::permission_error,
                                {Term::atom("free"), Term::atom(kObjectAtom), object_term(oe->object)});
        break;
      case ObjectError::Kind::arity:
        formal = Term::compound(kArityError, {Term::atom(oe->selector),
                                              Term::integer(std::int64_t(oe->expected_arity)),
                                              Term::integer(std::int64_t(oe->actual_arity))});
        break;
      case ObjectError::Kind::declaration:
        formal = Term::compound(kDeclarationError, {Term::atom(e.what())});
        break;
      case ObjectError::Kind::instantiation:
        formal = Term::atom(atoms::instantiation_error);
        break;
      case ObjectError::Kind::duplicate:
        formal = Term::compound(atoms::permission_error,
                                {Term::atom("redefine"), Term::atom(kObjectAtom), Term::atom(oe->name)});
        break;
    }
  } else if (dynamic_cast<const StaleReferenceError*>(&e)) {
    formal = Term::atom(kStale);
  } else if (const auto* re = dynamic_cast<const ResourceError*>(&e)) {
    formal = Term::compound(atoms::resource_error, {Term::atom(re->resource())});
  } else {
    formal = Term::compound(kSystemError, {Term::atom(e.what())});
  }
  return Term::compound(atoms::error, {formal, context});
}

// ---------------------------------------------------------------------------
// Installation

void Bridge::install() {
  Class& cls = kernel_.define_class(kPrologClass, atoms::object);
  cls.doc = "Proxy that turns messages into logic calls";
  Method forward;
  forward.selector = Symbol("$call_predicate");
  forward.variadic = true;
  forward.rest_type = TypeSpec::of(TypeSpec::Kind::Prolog);
  forward.native = [this](Invocation& i) { return callback(i, i.selector, 0); };
  forward.doc = "Call the predicate named by the selector";
  kernel_.set_catch_all(cls, std::move(forward));
  Method call;
  call.selector = atoms::call;
  call.arg_types = {TypeSpec::of(TypeSpec::Kind::Atom)};
  call.variadic = true;
  call.rest_type = TypeSpec::of(TypeSpec::Kind::Prolog);
  call.native = [this](Invocation& i) { return callback(i, i.args[0].atom_value(), 1); };
  call.doc = "call(Predicate, Arg...)";
  kernel_.define_method(cls, std::move(call));
  prolog_ = kernel_.allocate_named(cls, atoms::prolog);

  kernel_.set_logic_dispatcher([this](Invocation& i) { return dispatch_logic(i); });
  engine_.set_error_translator([this](const Error& e) { return error_term(e); });

  engine_.register_builtin("new", 2, [this](CallContext& c) { return pl_new(c); });
  engine_.register_builtin("free", 1, [this](CallContext& c) { return pl_free(c); });
  engine_.register_builtin("send", 2, [this](CallContext& c) {
    return pl_send(c, c.arg(0), c.arg(1), std::nullopt);
  });
  engine_.register_builtin("get", 3, [this](CallContext& c) {
    return pl_get(c, c.arg(0), c.arg(1), c.arg(2), std::nullopt);
  });
  for (std::uint32_t n = 3; n <= 8; ++n) {
    engine_.register_builtin("send", n, [this](CallContext& c) {
      Term msg = spread_message(c.arg(1), c.args().subspan(2));
      return pl_send(c, c.arg(0), msg, std::nullopt);
    });
  }
  for (std::uint32_t n = 4; n <= 8; ++n) {
    engine_.register_builtin("get", n, [this](CallContext& c) {
      std::size_t last = c.arity() - 1;
      Term msg = spread_message(c.arg(1), c.args().subspan(2, last - 2));
      return pl_get(c, c.arg(0), msg, c.arg(last), std::nullopt);
    });
  }
  auto class_arg = [](const Term& t) {
    const Term& d = t.deref();
    if (d.is_var()) err::raise(err::instantiation());
    if (!d.is_atom()) err::raise(err::type("atom", d));
    return d.symbol();
  };
  engine_.register_builtin("send_class", 3, [this, class_arg](CallContext& c) {
    return pl_send(c, c.arg(0), c.arg(2), class_arg(c.arg(1)));
  });
  engine_.register_builtin("get_class", 4, [this, class_arg](CallContext& c) {
    return pl_get(c, c.arg(0), c.arg(2), c.arg(3), class_arg(c.arg(1)));
  });
  engine_.register_builtin("object", 1, [this](CallContext& c) {
    const Term& r = c.arg(0);
    if (r.is_object()) return kernel_.is_live(r.object_id());
    if (r.is_compound(atoms::at, 1) && r.arg(0).deref().is_atom())
      return kernel_.named(r.arg(0).deref().symbol()).has_value();
    return false;
  });
}

}  // namespace objlog
