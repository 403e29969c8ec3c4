#include "objlog/class_compiler.hpp"

#include <algorithm>

namespace objlog {

namespace {

const Symbol kBeginClass("pce_begin_class");
const Symbol kEndClass("pce_end_class");
const Symbol kVariable("variable");
const Symbol kPure("pce_pure");
const Symbol kClassFact("pce_class");
const Symbol kVariableFact("pce_variable");
const Symbol kMethodFact("pce_method");
const Symbol kPureFact("pce_pure");
const Symbol kRealize("pce_realize_class");
const Symbol kDeclarationError("declaration_error");
const Symbol kPatch("$pce_patch_class");

[[noreturn]] void syntax(const std::string& message) {
  err::raise(Term::compound(atoms::syntax_error, {Term::atom(message)}));
}

[[noreturn]] void declaration(const std::string& message) {
  throw ObjectError(ObjectError::Kind::declaration, message);
}

Symbol atom_arg(const Term& t, const char* what) {
  const Term& d = t.deref();
  if (!d.is_atom()) syntax(std::string(what) + " must be an atom");
  return d.symbol();
}

Term qualify(Symbol module, Term t) { return Term::compound(atoms::colon, {Term::atom(module), std::move(t)}); }

Term principal_fact(Symbol name, std::initializer_list<Term> args) {
  return qualify(atoms::pce_principal, Term::compound(name, args));
}

Term directive(Term goal) { return Term::compound(atoms::neck, {std::move(goal)}); }

// Folds Sel, A1, ..., An into Sel(A1, ..., An).
Term fold(const Term& selector, std::span<const Term> args) {
  if (args.empty()) return selector;
  return Term::compound(selector.deref().symbol(), args);
}

std::string type_text(const Term& t) {
  const Term& d = t.deref();
  if (d.is_atom()) return d.symbol().str();
  std::vector<Term> items;
  if (list_to_vector(d, items) && items.size() == 1) return "[" + type_text(items[0]) + "]";
  syntax("malformed type " + term_to_string(d));
}

}  // namespace

ClassCompiler::ClassCompiler(Engine& engine, Kernel& kernel) : engine_(engine), kernel_(kernel) {}

TypeSpec ClassCompiler::type_of(const Term& type) { return TypeSpec::parse(type_text(type)); }

// ---------------------------------------------------------------------------
// Translation

Term ClassCompiler::rewrite_body(const Term& body, Symbol super) {
  const Term& g = body.deref();
  if (!g.is_compound()) return g;
  Symbol f = g.symbol();
  std::uint32_t n = g.arity();
  auto rebuild = [&](std::initializer_list<std::uint32_t> goal_args) {
    std::vector<Term> args(g.args().begin(), g.args().end());
    for (std::uint32_t i : goal_args) args[i] = rewrite_body(args[i], super);
    return Term::compound(f, std::move(args));
  };
  if (n == 2 && (f == atoms::comma || f == atoms::semicolon || f == atoms::arrow || f == atoms::soft_arrow ||
                 f == atoms::forall))
    return rebuild({0, 1});
  if (n == 1 && (f == atoms::not_provable || f == atoms::call || f == atoms::once || f == atoms::ignore ||
                 f == atoms::not_))
    return rebuild({0});
  if (n == 2 && f == atoms::colon) return rebuild({1});
  if (f == atoms::findall && (n == 3 || n == 4)) return rebuild({1});
  if (f == atoms::catch_ && n == 3) return rebuild({0, 2});
  if (f == Symbol("aggregate_all") && n == 3) return rebuild({1});

  std::span<const Term> a = g.args();
  Term super_atom = Term::atom(super);
  if (f == atoms::send_super && n >= 2) {
    Term msg = n == 2 ? a[1] : fold(a[1], a.subspan(2));
    return Term::compound(atoms::send_class, {a[0], super_atom, msg});
  }
  if (f == atoms::get_super && n >= 3) {
    Term msg = n == 3 ? a[1] : fold(a[1], a.subspan(2, n - 3));
    return Term::compound(atoms::get_class, {a[0], super_atom, msg, a[n - 1]});
  }
  if (f == atoms::send && n >= 3 && a[1].deref().is_atom())
    return Term::compound(atoms::send, {a[0], fold(a[1], a.subspan(2))});
  if (f == atoms::get && n >= 4 && a[1].deref().is_atom())
    return Term::compound(atoms::get, {a[0], fold(a[1], a.subspan(2, n - 3)), a[n - 1]});
  return g;
}

ClassCompiler::Translation ClassCompiler::translate(const Term& method_clause, Symbol cls, Symbol super) {
  const Term& mc = method_clause.deref();
  bool is_send = mc.is_compound(atoms::send_arrow, 2);
  if (!is_send && !mc.is_compound(atoms::get_arrow, 2)) syntax("not a method clause");
  const Term& head = mc.arg(0).deref();
  Term body = mc.arg(1).deref();

  if (!head.is_compound()) syntax("method head needs a receiver argument");
  Symbol selector = head.symbol();
  std::span<const Term> params = head.args();
  if (!params[0].deref().is_var()) syntax("receiver of " + selector.str() + " must be a variable");
  Term receiver = params[0].deref();
  params = params.subspan(1);

  auto split = [&](const Term& p) -> std::pair<Term, Term> {
    const Term& d = p.deref();
    if (d.is_var()) return {d, Term::atom(atoms::any)};
    if (d.is_compound(atoms::colon, 2) && d.arg(0).deref().is_var()) {
      type_of(d.arg(1));  // validates
      return {d.arg(0).deref(), d.arg(1).deref()};
    }
    syntax("malformed parameter " + term_to_string(d) + " of " + selector.str());
  };

  Term result, return_type = Term::atom(atoms::any);
  if (!is_send) {
    if (params.empty()) syntax("get method " + selector.str() + " needs a result argument");
    std::tie(result, return_type) = split(params.back());
    params = params.subspan(0, params.size() - 1);
  }
  std::vector<Term> vars, types;
  for (const Term& p : params) {
    auto [v, t] = split(p);
    vars.push_back(v);
    types.push_back(t);
  }

  Term doc = Term::atom("");
  if (body.is_compound(atoms::doc_sep, 2) && body.arg(0).deref().is_atom()) {
    doc = body.arg(0).deref();
    body = body.arg(1).deref();
  }

  std::string id_text = cls.str() + (is_send ? "->" : "<-") + selector.str();
  Term id = Term::atom(id_text);
  Term msg = vars.empty() ? Term::atom(selector) : Term::compound(selector, std::move(vars));
  Term impl_head = is_send ? Term::compound(atoms::send_implementation, {id, msg, receiver})
                           : Term::compound(atoms::get_implementation, {id, msg, receiver, result});
  Term clause = qualify(atoms::pce_principal,
                        Term::compound(atoms::neck, {impl_head, qualify(atoms::user, rewrite_body(body, super))}));
  Term fact = principal_fact(kMethodFact, {Term::atom(cls), Term::atom(selector),
                                           Term::atom(is_send ? atoms::send : atoms::get),
                                           make_list(types), return_type, id, doc});
  return {clause, fact};
}

// ---------------------------------------------------------------------------
// Consult-time expansion

std::optional<std::vector<Term>> ClassCompiler::expand(const Term& term) {
  const Term& t = term.deref();
  if (t.is_compound(atoms::neck, 1)) {
    const Term& d = t.arg(0).deref();
    if (d.is_compound(kBeginClass, 2) || d.is_compound(kBeginClass, 3)) {
      if (region_) syntax("pce_begin_class inside the region of class " + region_->name.str());
      Symbol name = atom_arg(d.arg(0), "class name");
      Symbol super = atom_arg(d.arg(1), "super class name");
      region_ = Region{name, super};
      std::vector<Term> out{principal_fact(kClassFact, {Term::atom(name), Term::atom(super)})};
      return out;
    }
    if (d.is_compound(kEndClass, 1) || d.is_atom(kEndClass)) {
      if (!region_) syntax("pce_end_class without pce_begin_class");
      if (d.is_compound() && atom_arg(d.arg(0), "class name") != region_->name)
        syntax("pce_end_class(" + term_to_string(d.arg(0).deref()) + ") closes class " + region_->name.str());
      Region region = std::move(*region_);
      region_.reset();
      for (Symbol sel : region.pure)
        if (!region.logic_selectors.count(sel))
          err::raise(Term::compound(kDeclarationError,
                                    {Term::atom("pce_pure(" + sel.str() + "): class " + region.name.str() +
                                                " defines no method " + sel.str() + " in logic code")}));
      std::vector<Term> out;
      if (kernel_.find_class(region.name))
        out.push_back(directive(Term::compound(kPatch, {Term::atom(region.name)})));
      else if (eager_ && (kernel_.find_class(region.super) || has_facts(region.super)))
        out.push_back(directive(Term::compound(kRealize, {Term::atom(region.name)})));
      else if (eager_)
        deferred_.push_back(region.name);  // super defined further on
      return out;
    }
    if (d.is_compound(kPure, 1)) {
      if (!region_) syntax("pce_pure/1 outside a class region");
      Symbol sel = atom_arg(d.arg(0), "selector");
      region_->pure.insert(sel);
      std::vector<Term> out{principal_fact(kPureFact, {Term::atom(region_->name), Term::atom(sel)})};
      return out;
    }
    return std::nullopt;
  }
  if (t.is_compound(atoms::send_arrow, 2) || t.is_compound(atoms::get_arrow, 2)) {
    if (!region_) syntax("method clause outside a class region");
    Translation tr = translate(t, region_->name, region_->super);
    const Term& fact = tr.fact.deref();
    const Term& row = fact.is_compound(atoms::colon, 2) ? fact.arg(1).deref() : fact;
    region_->logic_selectors.insert(row.arg(1).deref().symbol());
    std::vector<Term> out{tr.fact, tr.clause};
    return out;
  }
  if (region_ && t.is_compound() && t.symbol() == kVariable && t.arity() >= 2 && t.arity() <= 4) {
    Symbol name = atom_arg(t.arg(0), "variable name");
    type_of(t.arg(1));
    Term access = t.arity() >= 3 ? t.arg(2).deref() : Term::atom(atoms::both);
    parse_access(atom_arg(access, "access").name());
    Term doc = t.arity() >= 4 ? t.arg(3).deref() : Term::atom("");
    std::vector<Term> out{principal_fact(
        kVariableFact, {Term::atom(region_->name), Term::atom(name), t.arg(1).deref(), access, doc})};
    return out;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Realization

std::vector<std::vector<Term>> ClassCompiler::facts(std::string_view name, std::vector<Term> pattern) {
  std::vector<std::vector<Term>> rows;
  Symbol functor(name);
  if (!engine_.is_defined(atoms::pce_principal, functor, std::uint32_t(pattern.size()))) return rows;
  Term goal = Term::compound(functor, std::span<const Term>(pattern));
  Query q(engine_, goal, atoms::pce_principal);
  while (q.next()) {
    std::vector<Term> row;
    for (const Term& p : pattern) row.push_back(resolve_bindings(p));
    rows.push_back(std::move(row));
  }
  return rows;
}

bool ClassCompiler::has_facts(Symbol name) {
  return !facts("pce_class", {Term::atom(name), Term::fresh_var()}).empty();
}

std::vector<Symbol> ClassCompiler::compiled_classes() {
  std::vector<Symbol> out;
  for (auto& row : facts("pce_class", {Term::fresh_var(), Term::fresh_var()}))
    out.push_back(row[0].deref().symbol());
  return out;
}

std::vector<Method> ClassCompiler::method_facts(Symbol name) {
  std::set<Symbol> pure;
  for (auto& row : facts("pce_pure", {Term::atom(name), Term::fresh_var()})) pure.insert(row[1].symbol());
  std::vector<Method> methods;
  std::vector<Term> pattern{Term::atom(name)};
  for (int i = 0; i < 6; ++i) pattern.push_back(Term::fresh_var());
  for (auto& row : facts("pce_method", pattern)) {
    Method m;
    m.selector = row[1].symbol();
    m.kind = row[2].is_atom(atoms::send) ? MethodKind::send : MethodKind::get;
    std::vector<Term> types;
    list_to_vector(row[3], types);
    for (const Term& ty : types) m.arg_types.push_back(type_of(ty));
    m.return_type = type_of(row[4]);
    m.impl = Method::Impl::Logic;
    m.method_id = row[5].symbol();
    m.doc = row[6].is_atom() ? row[6].symbol().str() : "";
    m.pure = pure.count(m.selector) != 0;
    methods.push_back(std::move(m));
  }
  for (Symbol sel : pure) {
    bool found = std::any_of(methods.begin(), methods.end(), [&](const Method& m) { return m.selector == sel; });
    if (!found)
      declaration("pce_pure(" + sel.str() + "): class " + name.str() + " defines no logic method " + sel.str());
  }
  return methods;
}

Class* ClassCompiler::realize(Symbol name) {
  if (Class* c = kernel_.find_class(name)) return c;
  auto cls_rows = facts("pce_class", {Term::atom(name), Term::fresh_var()});
  if (cls_rows.empty()) return nullptr;
  if (realizing_.count(name)) declaration("class " + name.str() + " inherits from itself");
  realizing_.insert(name);
  struct Done {
    std::set<Symbol>& s;
    Symbol n;
    ~Done() { s.erase(n); }
  } done{realizing_, name};

  Symbol super = cls_rows[0][1].symbol();
  kernel_.need_class(super);
  std::vector<Method> methods = method_facts(name);
  Class& cls = kernel_.define_class(name, super);
  for (auto& row : facts("pce_variable", {Term::atom(name), Term::fresh_var(), Term::fresh_var(),
                                          Term::fresh_var(), Term::fresh_var()})) {
    SlotDef s;
    s.name = row[1].symbol();
    s.type = type_of(row[2]);
    s.access = parse_access(row[3].symbol().name());
    s.doc = row[4].is_atom() ? row[4].symbol().str() : "";
    kernel_.define_slot(cls, std::move(s));
  }
  for (Method& m : methods) kernel_.define_method(cls, std::move(m));
  return &cls;
}

void ClassCompiler::realize_all() {
  for (Symbol name : compiled_classes()) realize(name);
}

void ClassCompiler::patch(Symbol name) {
  Class* cls = kernel_.find_class(name);
  if (!cls) return;
  std::vector<Method> methods = method_facts(name);
  for (auto& row : facts("pce_variable", {Term::atom(name), Term::fresh_var(), Term::fresh_var(),
                                          Term::fresh_var(), Term::fresh_var()})) {
    const SlotDef* s = cls->find_slot(row[1].symbol());
    if (!s || !(s->type == type_of(row[2])))
      declaration("slot " + row[1].symbol().str() + " of realized class " + name.str() +
                  " changed; the class must be realized again");
  }
  for (MethodKind kind : {MethodKind::send, MethodKind::get}) {
    std::vector<Symbol> stale;
    for (const auto& [sel, m] : cls->own_methods(kind)) {
      if (m->impl != Method::Impl::Logic) continue;
      bool kept = std::any_of(methods.begin(), methods.end(),
                              [&](const Method& n) { return n.selector == sel && n.kind == kind; });
      if (!kept) stale.push_back(sel);
    }
    for (Symbol sel : stale) kernel_.remove_method(*cls, sel, kind);
  }
  for (Method& m : methods) {
    if (cls->own_method(m.selector, m.kind))
      kernel_.replace_method(*cls, std::move(m));
    else
      kernel_.define_method(*cls, std::move(m));
  }
}

// ---------------------------------------------------------------------------
// Installation

void ClassCompiler::install() {
  engine_.declare_multifile(atoms::pce_principal, atoms::send_implementation, 3);
  engine_.declare_multifile(atoms::pce_principal, atoms::get_implementation, 4);
  engine_.declare_dynamic(atoms::pce_principal, kClassFact, 2);
  engine_.declare_dynamic(atoms::pce_principal, kVariableFact, 5);
  engine_.declare_dynamic(atoms::pce_principal, kMethodFact, 7);
  engine_.declare_dynamic(atoms::pce_principal, kPureFact, 2);
  engine_.register_expansion_hook([this](const Term& t) { return expand(t); });
  engine_.register_load_finish_hook([this](LoadReport& report) {
    auto fail = [&](const std::string& message) {
      report.errors.push_back(engine_.current_source() + ": " + message);
      engine_.diagnostics() << "Error: " << report.errors.back() << "\n";
    };
    if (region_) {
      fail("class " + region_->name.str() + " has no pce_end_class");
      region_.reset();
    }
    std::vector<Symbol> deferred = std::move(deferred_);
    deferred_.clear();
    for (Symbol name : deferred) {
      try {
        realize(name);
      } catch (const Error& e) {
        fail("class " + name.str() + ": " + e.what());
      }
    }
  });
  kernel_.set_class_resolver([this](Symbol name) { return realize(name); });
  engine_.register_builtin(kRealize.name(), 1, [this](CallContext& c) {
    Symbol name = atom_arg(c.arg(0), "class name");
    if (!realize(name)) kernel_.need_class(name);
    return true;
  });
  engine_.register_builtin(kPatch.name(), 1, [this](CallContext& c) {
    patch(atom_arg(c.arg(0), "class name"));
    return true;
  });
}

}  // namespace objlog
