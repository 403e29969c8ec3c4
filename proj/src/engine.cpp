#include "objlog/engine.hpp"

#include <fstream>
#include <iostream>
#include <new>
#include <sstream>
#include <unordered_set>

#include "engine_impl.hpp"
#include "objlog/term_ops.hpp"

namespace objlog {

namespace {
constexpr std::uint32_t kCatchReactivate = 1;

const Symbol kDynamic("dynamic");
const Symbol kMultifile("multifile");
const Symbol kDiscontiguous("discontiguous");
const Symbol kInitialization("initialization");
const Symbol kTermExpansion("term_expansion");
const Symbol kSoftCut("*->");
}  // namespace

// ---------------------------------------------------------------------------
// Errors

PrologThrow::PrologThrow(Term ball) : ball_(std::move(ball)) {
  text_ = "unhandled exception: " + quoted(ball_);
}

namespace err {
Term make(Term formal, Term context) {
  return Term::compound(atoms::error, {std::move(formal), std::move(context)});
}
void raise(Term formal, Term context) {
  throw PrologThrow(make(std::move(formal), std::move(context)));
}
Term instantiation() { return Term::atom(atoms::instantiation_error); }
Term type(std::string_view type, const Term& culprit) {
  return Term::compound(atoms::type_error, {Term::atom(type), culprit});
}
Term domain(std::string_view domain, const Term& culprit) {
  return Term::compound("domain_error", {Term::atom(domain), culprit});
}
Term existence(std::string_view kind, const Term& what) {
  return Term::compound(atoms::existence_error, {Term::atom(kind), what});
}
Term permission(std::string_view action, std::string_view type, const Term& culprit) {
  return Term::compound(atoms::permission_error, {Term::atom(action), Term::atom(type), culprit});
}
Term evaluation(std::string_view what) {
  return Term::compound(atoms::evaluation_error, {Term::atom(what)});
}
Term resource(std::string_view what) {
  return Term::compound(atoms::resource_error, {Term::atom(what)});
}
Term representation(std::string_view what) {
  return Term::compound(atoms::representation_error, {Term::atom(what)});
}
}  // namespace err

Term indicator(Symbol name, std::uint32_t arity) {
  return Term::compound(atoms::slash, {Term::atom(name), Term::integer(arity)});
}

Symbol need_atom(const Term& t) {
  const Term& d = t.deref();
  if (d.is_var()) err::raise(err::instantiation());
  if (!d.is_atom()) err::raise(err::type("atom", d));
  return d.symbol();
}

std::int64_t need_int(const Term& t) {
  const Term& d = t.deref();
  if (d.is_var()) err::raise(err::instantiation());
  if (!d.is_int()) err::raise(err::type("integer", d));
  return d.int_value();
}

const Term& need_callable(const Term& t) {
  const Term& d = t.deref();
  if (d.is_var()) err::raise(err::instantiation());
  if (!d.is_callable()) err::raise(err::type("callable", d));
  return d;
}

// ---------------------------------------------------------------------------
// Env / Cont

Ref<Env> Env::make(std::uint32_t n) {
  void* mem = ::operator new(sizeof(Env) + sizeof(Term) * n);
  Env* env = new (mem) Env(n);
  Term* s = env->slots();
  for (std::uint32_t i = 0; i < n; ++i) new (s + i) Term();
  return Ref<Env>(env);
}

Env::~Env() {
  Term* s = slots();
  for (std::uint32_t i = 0; i < size_; ++i) s[i].~Term();
}

void Env::dispose() noexcept {
  this->~Env();
  ::operator delete(static_cast<void*>(this));
}

Ref<Cont> make_goal(Term goal, Ref<Env> env, Symbol module, std::size_t cut_barrier,
                    Ref<Cont> next) {
  auto c = make_ref<Cont>();
  c->goal = std::move(goal);
  c->env = std::move(env);
  c->module = module;
  c->cut_barrier = cut_barrier;
  c->depth = next ? next->depth + 1 : 1;
  c->next = std::move(next);
  return c;
}

namespace {
Ref<Cont> make_marker(ContKind kind, std::size_t barrier, std::uint64_t serial, Ref<Cont> next) {
  auto c = make_ref<Cont>();
  c->kind = kind;
  c->cut_barrier = barrier;
  c->serial = serial;
  c->depth = next ? next->depth + 1 : 1;
  c->next = std::move(next);
  return c;
}
}  // namespace

// ---------------------------------------------------------------------------
// Templates

namespace {

// Iterative rebuild of a term. view() maps a cell to the cell to inspect
// (for example following bindings); leaf() maps non-compound cells;
// keep() says a compound may be shared unchanged.
template <class View, class Leaf, class Keep>
Term rebuild(const Term& root, View&& view, Leaf&& leaf, Keep&& keep) {
  const Term& r = view(root);
  if (!r.is_compound()) return leaf(r);
  if (keep(r)) return r;
  struct Frame {
    const Term* src;
    std::uint32_t next;
    std::size_t base;
  };
  std::vector<Frame> stack;
  std::vector<Term> vals;
  stack.push_back({&r, 0, 0});
  for (;;) {
    Frame& f = stack.back();
    if (f.next < f.src->arity()) {
      const Term& x = view(f.src->arg(f.next++));
      if (!x.is_compound())
        vals.push_back(leaf(x));
      else if (keep(x))
        vals.push_back(x);
      else
        stack.push_back({&x, 0, vals.size()});
      continue;
    }
    Term built = Term::compound(f.src->symbol(),
                                std::span<const Term>(vals.data() + f.base, vals.size() - f.base));
    vals.resize(f.base);
    stack.pop_back();
    if (stack.empty()) return built;
    vals.push_back(std::move(built));
  }
}

const Term& identity(const Term& t) { return t; }
const Term& follow(const Term& t) { return t.deref(); }

Term& env_cell(Env* env, std::uint32_t i) { return env->slots()[i]; }

Term slot_value(Env* env, std::uint32_t i) {
  Term& cell = env_cell(env, i);
  if (cell.empty()) cell = Term::fresh_var();
  return cell;
}

}  // namespace

Term instantiate(const Term& tmpl, Env* env) {
  if (tmpl.is_slot()) return slot_value(env, tmpl.slot_index());
  if (!tmpl.is_compound() || !tmpl.compound_node()->has_slot()) return tmpl;
  return rebuild(
      tmpl, identity,
      [env](const Term& x) { return x.is_slot() ? slot_value(env, x.slot_index()) : x; },
      [](const Term& x) { return !x.compound_node()->has_slot(); });
}

Term resolve_bindings(const Term& t) {
  return rebuild(
      t, follow, [](const Term& x) { return x; },
      [](const Term& x) { return x.compound_node()->ground(); });
}

IndexKey index_key(const Term& t) {
  IndexKey k;
  k.tag = static_cast<std::uint8_t>(t.tag());
  switch (t.tag()) {
    case Tag::Atom:
      k.a = t.symbol().id();
      break;
    case Tag::Int:
    case Tag::Obj:
      k.b = static_cast<std::uint64_t>(t.int_value());
      break;
    case Tag::Float:
      k.b = std::bit_cast<std::uint64_t>(t.float_value());
      break;
    case Tag::Compound:
      k.a = t.symbol().id();
      k.b = t.arity();
      break;
    default:
      break;
  }
  return k;
}

void split_clause(const Term& clause, Symbol& module, Term& head, Term& body) {
  const Term* c = &clause.deref();
  while (c->is_compound(atoms::colon, 2)) {
    module = need_atom(c->arg(0));
    c = &c->arg(1).deref();
  }
  if (c->is_compound(atoms::neck, 2)) {
    const Term* h = &c->arg(0).deref();
    while (h->is_compound(atoms::colon, 2)) {
      module = need_atom(h->arg(0));
      h = &h->arg(1).deref();
    }
    head = *h;
    body = c->arg(1).deref();
  } else {
    head = *c;
    body = Term::atom(atoms::true_);
  }
  if (head.is_var()) err::raise(err::instantiation());
  if (!head.is_callable()) err::raise(err::type("callable", head));
  if (body.is_number()) err::raise(err::type("callable", body));
}

std::shared_ptr<Clause> compile_clause(const Term& head, const Term& body) {
  std::unordered_map<const VarNode*, std::uint32_t> slots;
  auto leaf = [&](const Term& x) -> Term {
    if (!x.is_var()) return x;
    auto [it, inserted] = slots.emplace(x.var_node(), static_cast<std::uint32_t>(slots.size()));
    return Term::slot(it->second);
  };
  auto keep = [](const Term& x) { return x.compound_node()->ground(); };
  auto clause = std::make_shared<Clause>();
  clause->head = rebuild(head, follow, leaf, keep);
  clause->body = rebuild(body, follow, leaf, keep);
  clause->nvars = static_cast<std::uint32_t>(slots.size());
  if (clause->head.arity() > 0) {
    const Term& first = clause->head.arg(0);
    clause->var_key = first.is_slot();
    if (!clause->var_key) clause->key = index_key(first);
  }
  return clause;
}

const ClauseIndex& ClauseSet::ensure_index() const {
  if (index) return *index;
  auto idx = std::make_unique<ClauseIndex>();
  for (std::uint32_t i = 0; i < clauses.size(); ++i) {
    const Clause& c = *clauses[i];
    idx->all.push_back(i);
    if (c.var_key) {
      idx->var_only.push_back(i);
      for (auto& [k, list] : idx->buckets) list.push_back(i);
    } else {
      auto it = idx->buckets.find(c.key);
      if (it == idx->buckets.end()) it = idx->buckets.emplace(c.key, idx->var_only).first;
      it->second.push_back(i);
    }
  }
  index = std::move(idx);
  return *index;
}

// ---------------------------------------------------------------------------
// CallContext

bool CallContext::unify(const Term& a, const Term& b) { return engine.unify(a, b); }

void CallContext::continue_with(Term goal, Symbol goal_module) {
  continuation_.emplace(std::move(goal), goal_module);
}

// ---------------------------------------------------------------------------
// Engine setup

Engine::Engine() : ops_(OperatorTable::standard()), out_(&std::cout), err_(&std::cerr) {
  trail_.on_undo = [this](std::uint32_t code, std::uint64_t payload) {
    on_trail_undo(code, payload);
  };
  install_library(*this);
  LoadReport r = consult_string(kPrelude, "$prelude");
  if (!r.ok()) throw Error("prelude failed to load: " + r.errors.front());
}

Engine::~Engine() {
  // Drop choicepoints and the trail before the tables they point into.
  cps_.clear();
  trail_.truncate(0);
}

void Engine::reset_peaks() noexcept {
  stats_.peak_depth = 0;
  stats_.peak_choicepoints = 0;
}

void Engine::register_builtin(std::string_view name, std::uint32_t arity, Builtin fn,
                              Determinism det) {
  Symbol s(name);
  auto key = builtin_key(s, arity);
  if (builtins_.count(key))
    throw Error("builtin " + std::string(name) + "/" + std::to_string(arity) +
                " is already registered");
  builtins_.emplace(key, std::make_unique<BuiltinEntry>(BuiltinEntry{s, arity, std::move(fn), det}));
}

bool Engine::is_builtin(Symbol name, std::uint32_t arity) const {
  return builtins_.count(builtin_key(name, arity)) != 0;
}

std::size_t Engine::choicepoint_count() const noexcept { return cps_.size(); }

bool Engine::unify(const Term& a, const Term& b) {
  return objlog::unify(a, b, trail_, flags_.occurs_check);
}

// ---------------------------------------------------------------------------
// Database

Predicate* Engine::lookup(Symbol module, Symbol name, std::uint32_t arity) const {
  auto it = preds_.find(pred_key(module, name, arity));
  if (it != preds_.end()) return it->second.get();
  if (module != atoms::user) {
    it = preds_.find(pred_key(atoms::user, name, arity));
    if (it != preds_.end()) return it->second.get();
  }
  return nullptr;
}

Predicate& Engine::ensure(Symbol module, Symbol name, std::uint32_t arity) {
  auto& slot = preds_[pred_key(module, name, arity)];
  if (!slot) {
    slot = std::make_unique<Predicate>();
    slot->module = module;
    slot->name = name;
    slot->arity = arity;
  }
  return *slot;
}

namespace {
ClauseSet& writable(Predicate& p) {
  if (p.set.use_count() > 1) p.set = std::make_shared<ClauseSet>(*p.set);
  p.set->index.reset();
  return *p.set;
}
}  // namespace

void Engine::add_clause(const Term& clause, Symbol module, ClausePosition pos,
                        std::string_view source) {
  Term head, body;
  split_clause(clause, module, head, body);
  Symbol name = head.symbol();
  std::uint32_t arity = head.arity();
  if (is_builtin(name, arity) || head.is_atom(atoms::true_) ||
      (name == atoms::comma && arity == 2) || (name == atoms::semicolon && arity == 2) ||
      (name == atoms::arrow && arity == 2) || (name == atoms::cut && arity == 0) ||
      (name == atoms::call && arity >= 1) || (name == atoms::colon && arity == 2) ||
      (name == atoms::catch_ && arity == 3) || (name == atoms::not_provable && arity == 1))
    err::raise(err::permission("modify", "static_procedure", indicator(name, arity)));
  auto compiled = compile_clause(head, body);
  compiled->source = std::string(source);
  Predicate& p = ensure(module, name, arity);
  ClauseSet& set = writable(p);
  if (pos == ClausePosition::back)
    set.clauses.push_back(std::move(compiled));
  else
    set.clauses.insert(set.clauses.begin(), std::move(compiled));
}

bool Engine::retract(const Term& clause, Symbol module) {
  Term head, body;
  split_clause(clause, module, head, body);
  Predicate* p = lookup(module, head.symbol(), head.arity());
  if (!p) return false;
  auto snapshot = p->set;
  Term pattern = Term::compound(atoms::neck, {head, body});
  for (std::size_t i = 0; i < snapshot->clauses.size(); ++i) {
    const auto& c = snapshot->clauses[i];
    auto env = Env::make(c->nvars);
    Term actual = Term::compound(atoms::neck, {instantiate(c->head, env.get()),
                                               instantiate(c->body, env.get())});
    if (unify(pattern, actual)) {
      ClauseSet& set = writable(*p);
      for (auto it = set.clauses.begin(); it != set.clauses.end(); ++it)
        if (it->get() == c.get()) {
          set.clauses.erase(it);
          break;
        }
      return true;
    }
  }
  return false;
}

void Engine::declare_dynamic(Symbol module, Symbol name, std::uint32_t arity) {
  if (is_builtin(name, arity))
    err::raise(err::permission("modify", "static_procedure", indicator(name, arity)));
  ensure(module, name, arity).dynamic = true;
}

void Engine::declare_multifile(Symbol module, Symbol name, std::uint32_t arity) {
  ensure(module, name, arity).multifile = true;
}

bool Engine::is_defined(Symbol module, Symbol name, std::uint32_t arity) const {
  if (is_builtin(name, arity)) return true;
  const Predicate* p = lookup(module, name, arity);
  return p && (p->dynamic || p->multifile || !p->set->clauses.empty());
}

std::size_t Engine::clause_count(Symbol module, Symbol name, std::uint32_t arity) const {
  auto it = preds_.find(pred_key(module, name, arity));
  return it == preds_.end() ? 0 : it->second->set->clauses.size();
}

std::vector<Term> Engine::clauses(Symbol module, Symbol name, std::uint32_t arity) const {
  std::vector<Term> out;
  auto it = preds_.find(pred_key(module, name, arity));
  if (it == preds_.end()) return out;
  for (const auto& c : it->second->set->clauses) {
    auto env = Env::make(c->nvars);
    out.push_back(Term::compound(atoms::neck, {instantiate(c->head, env.get()),
                                               instantiate(c->body, env.get())}));
  }
  return out;
}

void Engine::unload_source(std::string_view source) {
  for (auto& [key, p] : preds_) {
    bool any = false;
    for (const auto& c : p->set->clauses)
      if (c->source == source) {
        any = true;
        break;
      }
    if (!any) continue;
    ClauseSet& set = writable(*p);
    std::erase_if(set.clauses, [&](const auto& c) { return c->source == source; });
  }
}

// ---------------------------------------------------------------------------
// Choicepoints

void Engine::restore_choice_stamp() {
  trail_.set_choice_stamp(cps_.empty() ? std::numeric_limits<std::uint64_t>::max()
                                       : cps_.back().stamp);
}

void Engine::push_choicepoint(ChoicePoint&& cp) {
  cp.trail_mark = trail_.mark();
  cp.stamp = VarNode::peek_stamp();
  cp.serial = next_serial_++;
  cps_.push_back(std::move(cp));
  trail_.set_choice_stamp(cps_.back().stamp);
  if (cps_.size() > stats_.peak_choicepoints) stats_.peak_choicepoints = cps_.size();
}

void Engine::cut_to(std::size_t height) {
  if (cps_.size() <= height) return;
  cps_.resize(height);
  restore_choice_stamp();
  if (!cps_.empty()) trail_.tidy(cps_.back().trail_mark, cps_.back().stamp);
}

void Engine::on_trail_undo(std::uint32_t code, std::uint64_t payload) {
  if (code != kCatchReactivate) return;
  for (auto it = cps_.rbegin(); it != cps_.rend(); ++it)
    if (it->serial == payload) {
      it->active = true;
      return;
    }
}

// ---------------------------------------------------------------------------
// Solving

Query::Query(Engine& engine, Term goal, Symbol module)
    : engine_(engine), goal_(std::move(goal)), module_(module) {
  ChoicePoint cp;
  cp.kind = CpKind::Barrier;
  engine_.push_choicepoint(std::move(cp));
  barrier_ = engine_.cps_.size() - 1;
}

Query::~Query() {
  if (open_) close();
}

bool Query::next() {
  if (!open_ || exhausted_) return false;
  try {
    bool found;
    if (!started_) {
      started_ = true;
      auto done = make_marker(ContKind::Done, 0, 0, nullptr);
      auto start = make_goal(goal_, nullptr, module_, barrier_ + 1, std::move(done));
      found = engine_.solve(std::move(start), *this);
    } else {
      Ref<Cont> c;
      found = engine_.backtrack(c, *this) && engine_.solve(std::move(c), *this);
    }
    if (!found) {
      exhausted_ = true;
      close();
    }
    return found;
  } catch (...) {
    close();
    throw;
  }
}

void Query::cut() {
  if (!open_) return;
  open_ = false;
  engine_.cut_to(barrier_);
}

void Query::close() {
  if (!open_) return;
  open_ = false;
  engine_.trail_.undo_to(engine_.cps_[barrier_].trail_mark);
  engine_.cps_.resize(barrier_);
  engine_.restore_choice_stamp();
}

bool Engine::once(const Term& goal, Symbol module) {
  Query q(*this, goal, module);
  bool ok = q.next();
  if (ok)
    q.cut();
  else
    q.close();
  return ok;
}

bool Engine::once_text(std::string_view text, Symbol module) {
  ReadTerm rt = parse_term(text, ops_);
  return once(rt.term, module);
}

// Resumes execution after failure: pops to the newest alternative above
// the query's barrier. Returns false when the query has no alternatives.
bool Engine::backtrack(Ref<Cont>& c, Query& q) {
  for (;;) {
    if (cps_.size() <= q.barrier_ + 1) {
      trail_.undo_to(cps_[q.barrier_].trail_mark);
      return false;
    }
    ChoicePoint& cp = cps_.back();
    trail_.undo_to(cp.trail_mark);
    switch (cp.kind) {
      case CpKind::Alt: {
        c = std::move(cp.cont);
        cps_.pop_back();
        restore_choice_stamp();
        return true;
      }
      case CpKind::Clauses: {
        if (try_clauses(c)) return true;
        continue;
      }
      case CpKind::Redo: {
        std::size_t index = cps_.size() - 1;
        BuiltinEntry* b = cp.builtin;
        if (call_builtin(c, *b, cp.module, index)) return true;
        continue;
      }
      case CpKind::Catch:
      case CpKind::Barrier:
        cps_.pop_back();
        restore_choice_stamp();
        continue;
    }
  }
}

// Tries the remaining candidate clauses of the Clauses choicepoint on top
// of the stack. On success c is the body continuation; the choicepoint is
// popped before the last candidate is tried.
bool Engine::try_clauses(Ref<Cont>& c) {
  const std::size_t index = cps_.size() - 1;
  for (;;) {
    ChoicePoint& cp = cps_[index];
    const auto& cand = *cp.candidates;
    if (cp.pos >= cand.size()) {
      cps_.pop_back();
      restore_choice_stamp();
      return false;
    }
    auto clause = cp.set->clauses[cand[cp.pos++]];
    bool last = cp.pos >= cand.size();
    Ref<Cont> next = cp.cont;
    std::vector<Term> args;
    Symbol module = cp.module;
    std::size_t height = index;
    if (last) {
      args = std::move(cp.args);
      cps_.pop_back();
      restore_choice_stamp();
    }
    const std::vector<Term>& actual = last ? args : cps_[index].args;
    ++stats_.clause_visits;
    auto env = Env::make(clause->nvars);
    if (unify_head(*clause, actual, env.get())) {
      if (clause->body.is_atom(atoms::true_))
        c = std::move(next);
      else
        c = make_goal(clause->body, std::move(env), module, height, std::move(next));
      return true;
    }
    if (last) return false;
    trail_.undo_to(cps_[index].trail_mark);
  }
}

bool Engine::unify_head(const Clause& clause, const std::vector<Term>& actual, Env* env) {
  const Term& head = clause.head;
  thread_local std::vector<std::pair<const Term*, const Term*>> todo;
  todo.clear();
  for (std::uint32_t i = head.arity(); i-- > 0;) todo.emplace_back(&head.arg(i), &actual[i]);
  while (!todo.empty()) {
    auto [t, a] = todo.back();
    todo.pop_back();
    if (t->is_slot()) {
      Term& cell = env_cell(env, t->slot_index());
      if (cell.empty()) {
        cell = a->deref();
      } else if (!unify(cell, *a)) {
        return false;
      }
      continue;
    }
    const Term& x = a->deref();
    if (x.is_var()) {
      Term value = instantiate(*t, env);
      if (flags_.occurs_check && occurs_in(x.var_node(), value)) return false;
      trail_.bind(x.var_node(), std::move(value));
      continue;
    }
    if (x.tag() != t->tag()) return false;
    switch (t->tag()) {
      case Tag::Atom:
        if (x.symbol() != t->symbol()) return false;
        break;
      case Tag::Int:
      case Tag::Obj:
        if (x.int_value() != t->int_value()) return false;
        break;
      case Tag::Float:
        if (!same_float(x.float_value(), t->float_value())) return false;
        break;
      case Tag::Compound: {
        if (x.symbol() != t->symbol() || x.arity() != t->arity()) return false;
        if (!t->compound_node()->has_slot()) {
          if (!unify(*t, x)) return false;
          break;
        }
        for (std::uint32_t i = t->arity(); i-- > 0;) todo.emplace_back(&t->arg(i), &x.arg(i));
        break;
      }
      default:
        return false;
    }
  }
  return true;
}

// Runs the builtin whose Redo choicepoint (nondeterministic) is at index,
// or a deterministic builtin when index is npos. On success c is the
// continuation to resume.
bool Engine::call_builtin(Ref<Cont>& c, BuiltinEntry& b, Symbol module, std::size_t index,
                          std::vector<Term>* det_args, Ref<Cont>* det_next) {
  bool nondet = index != static_cast<std::size_t>(-1);
  std::any scratch;
  std::vector<Term> redo_args;  // a copy: nested queries may grow cps_
  std::span<const Term> args;
  std::uint64_t state = 0;
  std::any* memo = &scratch;
  if (nondet) {
    ChoicePoint& cp = cps_[index];
    redo_args = cp.args;
    args = redo_args;
    state = cp.state;
    memo = cp.memo.get();
  } else {
    args = *det_args;
  }
  CallContext ctx(*this, module, args, state, memo);
  bool ok = b.fn(ctx);
  Ref<Cont> next;
  if (nondet) {
    ChoicePoint& cp = cps_[index];
    next = cp.cont;
    if (!ok) {
      trail_.undo_to(cp.trail_mark);
      cps_.resize(index);
      restore_choice_stamp();
      return false;
    }
    if (ctx.retry_) {
      cp.state = ctx.next_state_;
    } else {
      cut_to(index);
    }
  } else {
    if (!ok) return false;
    next = std::move(*det_next);
  }
  if (ctx.continuation_) {
    c = make_goal(std::move(ctx.continuation_->first), nullptr, ctx.continuation_->second,
                  cps_.size(), std::move(next));
  } else {
    c = std::move(next);
  }
  return true;
}

void Engine::trace_call(const Term& goal, std::size_t depth) {
  WriteOptions o;
  o.quoted = true;
  o.ops = &ops_;
  o.max_depth = 20;
  diagnostics() << "   Call: (" << depth << ") " << term_to_string(goal, o) << "\n";
}

bool Engine::call_predicate(Ref<Cont>& c, Symbol module, const Term& goal, Env* env,
                            Ref<Cont> next) {
  ++stats_.inferences;
  Symbol name = goal.symbol();
  std::uint32_t arity = goal.arity();
  std::vector<Term> args;
  args.reserve(arity);
  for (std::uint32_t i = 0; i < arity; ++i) args.push_back(instantiate(goal.arg(i), env));
  if (flags_.trace) {
    trace_call(Term::compound(name, std::span<const Term>(args)), next ? next->depth : 0);
  }

  auto bit = builtins_.find(builtin_key(name, arity));
  if (bit != builtins_.end()) {
    BuiltinEntry& b = *bit->second;
    if (b.det == Determinism::det) return call_builtin(c, b, module, -1, &args, &next);
    ChoicePoint cp;
    cp.kind = CpKind::Redo;
    cp.builtin = &b;
    cp.module = module;
    cp.args = std::move(args);
    cp.cont = std::move(next);
    cp.memo = std::make_unique<std::any>();
    push_choicepoint(std::move(cp));
    return call_builtin(c, b, module, cps_.size() - 1);
  }

  Predicate* p = lookup(module, name, arity);
  if (!p || (p->set->clauses.empty() && !p->dynamic && !p->multifile)) {
    if (!flags_.unknown_error) return false;
    err::raise(err::existence("procedure", indicator(name, arity)), indicator(name, arity));
  }
  std::shared_ptr<const ClauseSet> set = p->set;
  const ClauseIndex& idx = set->ensure_index();
  const std::vector<std::uint32_t>* cand = &idx.all;
  if (flags_.indexing && arity > 0) {
    const Term& first = args[0].deref();
    if (!first.is_var()) {
      auto it = idx.buckets.find(index_key(first));
      cand = it != idx.buckets.end() ? &it->second : &idx.var_only;
    }
  }
  if (cand->empty()) return false;

  ChoicePoint cp;
  cp.kind = CpKind::Clauses;
  cp.set = std::move(set);
  cp.candidates = cand;
  cp.pos = 0;
  cp.module = p->module;
  cp.args = std::move(args);
  cp.cont = std::move(next);
  push_choicepoint(std::move(cp));
  return try_clauses(c);
}

bool Engine::step(Ref<Cont>& c) {
  // Resolve the goal. A goal reached through a variable is a meta-call:
  // cut inside it is local.
  Ref<Cont> self = c;
  const Cont& k = *self;
  Term owned;
  const Term* g = &k.goal;
  Env* env = k.env.get();
  std::size_t cutb = k.cut_barrier;
  if (g->is_slot()) {
    owned = slot_value(env, g->slot_index());
    g = &owned.deref();
    env = nullptr;
    cutb = cps_.size();
  } else if (g->is_var()) {
    g = &g->deref();
    cutb = cps_.size();
  }
  if (g->is_var()) err::raise(err::instantiation());
  if (!g->is_callable()) err::raise(err::type("callable", instantiate(*g, env)));

  Symbol f = g->symbol();
  std::uint32_t n = g->arity();
  Symbol module = k.module;
  Ref<Env> env_ref = env ? k.env : Ref<Env>();

  if (n == 0) {
    if (f == atoms::true_) {
      c = k.next;
      return true;
    }
    if (f == atoms::fail || f == atoms::false_) return false;
    if (f == atoms::cut) {
      cut_to(cutb);
      c = k.next;
      return true;
    }
  } else if (n == 2 && f == atoms::comma) {
    auto right = make_goal(g->arg(1), env_ref, module, cutb, k.next);
    c = make_goal(g->arg(0), env_ref, module, cutb, std::move(right));
    return true;
  } else if (n == 2 && f == atoms::semicolon) {
    const Term& left = g->arg(0).is_slot() ? g->arg(0) : g->arg(0).deref();
    std::size_t h = cps_.size();
    ChoicePoint alt;
    alt.kind = CpKind::Alt;
    alt.cont = make_goal(g->arg(1), env_ref, module, cutb, k.next);
    if (left.is_compound(atoms::arrow, 2)) {
      push_choicepoint(std::move(alt));
      auto then = make_goal(left.arg(1), env_ref, module, cutb, k.next);
      auto commit = make_marker(ContKind::CutTo, h, 0, std::move(then));
      c = make_goal(left.arg(0), env_ref, module, h + 1, std::move(commit));
      return true;
    }
    if (left.is_compound(kSoftCut, 2)) {
      push_choicepoint(std::move(alt));
      auto then = make_goal(left.arg(1), env_ref, module, cutb, k.next);
      auto drop = make_marker(ContKind::CatchExit, h, cps_.back().serial, std::move(then));
      drop->goal = Term::atom(kSoftCut);
      c = make_goal(left.arg(0), env_ref, module, h + 1, std::move(drop));
      return true;
    }
    push_choicepoint(std::move(alt));
    c = make_goal(g->arg(0), env_ref, module, cutb, k.next);
    return true;
  } else if (n == 2 && f == atoms::arrow) {
    std::size_t h = cps_.size();
    auto then = make_goal(g->arg(1), env_ref, module, cutb, k.next);
    auto commit = make_marker(ContKind::CutTo, h, 0, std::move(then));
    c = make_goal(g->arg(0), env_ref, module, h, std::move(commit));
    return true;
  } else if (n == 2 && f == kSoftCut) {
    auto then = make_goal(g->arg(1), env_ref, module, cutb, k.next);
    c = make_goal(g->arg(0), env_ref, module, cps_.size(), std::move(then));
    return true;
  } else if (n == 1 && (f == atoms::not_provable || f == atoms::not_)) {
    std::size_t h = cps_.size();
    ChoicePoint alt;
    alt.kind = CpKind::Alt;
    alt.cont = k.next;
    push_choicepoint(std::move(alt));
    auto fail = make_goal(Term::atom(atoms::fail), nullptr, module, h, nullptr);
    auto commit = make_marker(ContKind::CutTo, h, 0, std::move(fail));
    c = make_goal(g->arg(0), env_ref, module, h + 1, std::move(commit));
    return true;
  } else if (f == atoms::call && n >= 1) {
    Term target = instantiate(g->arg(0), env);
    const Term& t = target.deref();
    Symbol m = module;
    const Term* inner = &t;
    while (inner->is_compound(atoms::colon, 2)) {
      m = need_atom(inner->arg(0));
      inner = &inner->arg(1).deref();
    }
    Term goal;
    if (n == 1) {
      goal = *inner;
    } else {
      const Term& base = need_callable(*inner);
      std::vector<Term> args(base.args().begin(), base.args().end());
      for (std::uint32_t i = 1; i < n; ++i) args.push_back(instantiate(g->arg(i), env));
      goal = Term::compound(base.symbol(), std::move(args));
    }
    need_callable(goal);
    c = make_goal(std::move(goal), nullptr, m, cps_.size(), k.next);
    return true;
  } else if (n == 2 && f == atoms::colon) {
    Symbol m = need_atom(instantiate(g->arg(0), env));
    c = make_goal(g->arg(1), env_ref, m, cutb, k.next);
    return true;
  } else if (n == 1 && f == atoms::once) {
    std::size_t h = cps_.size();
    auto commit = make_marker(ContKind::CutTo, h, 0, k.next);
    c = make_goal(g->arg(0), env_ref, module, h, std::move(commit));
    return true;
  } else if (n == 1 && f == atoms::ignore) {
    std::size_t h = cps_.size();
    ChoicePoint alt;
    alt.kind = CpKind::Alt;
    alt.cont = k.next;
    push_choicepoint(std::move(alt));
    auto commit = make_marker(ContKind::CutTo, h, 0, k.next);
    c = make_goal(g->arg(0), env_ref, module, h + 1, std::move(commit));
    return true;
  } else if (n == 2 && f == atoms::forall) {
    Term cond = instantiate(g->arg(0), env);
    Term action = instantiate(g->arg(1), env);
    Term neg = Term::compound(
        atoms::not_provable,
        {Term::compound(atoms::comma, {cond, Term::compound(atoms::not_provable, {action})})});
    c = make_goal(std::move(neg), nullptr, module, cutb, k.next);
    return true;
  } else if (n == 3 && f == atoms::catch_) {
    ChoicePoint cp;
    cp.kind = CpKind::Catch;
    cp.catcher = instantiate(g->arg(1), env);
    cp.recovery = instantiate(g->arg(2), env);
    cp.module = module;
    cp.cont = k.next;
    push_choicepoint(std::move(cp));
    std::size_t h = cps_.size();
    auto exit = make_marker(ContKind::CatchExit, h - 1, cps_.back().serial, k.next);
    c = make_goal(g->arg(0), env_ref, module, h, std::move(exit));
    return true;
  } else if (n == 1 && f == atoms::throw_) {
    Term ball = instantiate(g->arg(0), env);
    if (ball.deref().is_var()) err::raise(err::instantiation());
    throw PrologThrow(copy_term(ball));
  }
  return call_predicate(c, module, *g, env, k.next);
}

// Leaves catch/3 (or the condition of a soft-cut) at the choicepoint with
// the given serial.
void Engine::exit_catch(const Cont& marker) {
  std::size_t h = marker.cut_barrier;
  if (h >= cps_.size() || cps_[h].serial != marker.serial) return;
  if (h + 1 == cps_.size()) {
    // Deterministic exit: the choicepoint is no longer needed.
    cut_to(h);
    return;
  }
  if (cps_[h].active) {
    cps_[h].active = false;
    trail_.push_custom(kCatchReactivate, marker.serial);
  }
}

bool Engine::solve(Ref<Cont> c, Query& q) {
  for (;;) {
    try {
      for (;;) {
        Cont& k = *c;
        if (k.depth > stats_.peak_depth) stats_.peak_depth = k.depth;
        if (k.depth > flags_.max_depth) err::raise(err::resource("stack"));
        bool ok = true;
        switch (k.kind) {
          case ContKind::Done:
            return true;
          case ContKind::CutTo: {
            cut_to(k.cut_barrier);
            Ref<Cont> next = k.next;
            c = std::move(next);
            continue;
          }
          case ContKind::CatchExit: {
            if (k.goal.is_atom(kSoftCut)) {
              // Soft-cut condition succeeded: disable the else branch.
              std::size_t h = k.cut_barrier;
              if (h < cps_.size() && cps_[h].serial == k.serial) {
                cps_[h].kind = CpKind::Catch;
                cps_[h].active = false;
              }
            } else {
              exit_catch(k);
            }
            Ref<Cont> next = k.next;
            c = std::move(next);
            continue;
          }
          case ContKind::Goal:
            ok = step(c);
            break;
        }
        if (!ok && !backtrack(c, q)) return false;
      }
    } catch (const PrologThrow& e) {
      Term ball = e.ball();
      if (!handle_exception(c, q, ball)) throw;
    } catch (const ResourceError& e) {
      Term ball = err::make(err::resource(e.resource()), Term::atom(e.what()));
      if (!handle_exception(c, q, ball)) throw PrologThrow(ball);
    } catch (const CyclicTermError& e) {
      Term ball = err::make(Term::atom("cyclic_term"), Term::atom(e.what()));
      if (!handle_exception(c, q, ball)) throw PrologThrow(ball);
    } catch (const std::bad_alloc&) {
      Term ball = err::make(err::resource("memory"));
      if (!handle_exception(c, q, ball)) throw PrologThrow(ball);
    } catch (const Error& e) {
      Term ball = translate_error(e);
      if (!handle_exception(c, q, ball)) throw PrologThrow(ball);
    }
  }
}

Term Engine::translate_error(const Error& e) const {
  if (translate_) return translate_(e);
  return err::make(Term::compound("system_error", {Term::atom(e.what())}));
}

bool Engine::handle_exception(Ref<Cont>& c, Query& q, const Term& ball) {
  while (cps_.size() > q.barrier_ + 1) {
    ChoicePoint& cp = cps_.back();
    trail_.undo_to(cp.trail_mark);
    if (cp.kind == CpKind::Catch && cp.active) {
      Term catcher = cp.catcher;
      Term recovery = cp.recovery;
      Symbol module = cp.module;
      Ref<Cont> next = cp.cont;
      cps_.pop_back();
      restore_choice_stamp();
      if (unify(catcher, ball)) {
        c = make_goal(std::move(recovery), nullptr, module, cps_.size(), std::move(next));
        return true;
      }
      continue;
    }
    cps_.pop_back();
    restore_choice_stamp();
  }
  trail_.undo_to(cps_[q.barrier_].trail_mark);
  return false;
}

// ---------------------------------------------------------------------------
// Consult

void Engine::register_expansion_hook(ExpansionHook hook) { hooks_.push_back(std::move(hook)); }

void Engine::register_load_finish_hook(std::function<void(LoadReport&)> hook) {
  finish_hooks_.push_back(std::move(hook));
}

void Engine::run_directive(const Term& goal, LoadReport& report, int line) {
  ++report.directives;
  std::string where = loading_source_ + ":" + std::to_string(line);
  try {
    if (!once(goal)) {
      std::string msg = where + ": directive failed: " + quoted(goal);
      report.errors.push_back(msg);
      diagnostics() << "Warning: " << msg << "\n";
    }
  } catch (const PrologThrow& e) {
    std::string msg = where + ": directive raised " + describe_exception(e.ball(), &ops_);
    report.errors.push_back(msg);
    diagnostics() << "Warning: " << msg << "\n";
  }
}

void Engine::handle_read_term(const Term& term, LoadReport& report, int line) {
  std::vector<Term> items{term};
  // A user-defined term_expansion/2 runs first, then registered hooks.
  if (is_defined(atoms::user, kTermExpansion, 2)) {
    Term out = Term::fresh_var();
    bool expanded = false;
    try {
      expanded = once(Term::compound(kTermExpansion, {term, out}));
    } catch (const PrologThrow& e) {
      report.errors.push_back(loading_source_ + ":" + std::to_string(line) +
                              ": term_expansion raised " + describe_exception(e.ball(), &ops_));
      return;
    }
    if (expanded) {
      items.clear();
      const Term& o = out.deref();
      if (!list_to_vector(o, items)) items = {o};
    }
  }
  for (auto& hook : hooks_) {
    std::vector<Term> next;
    for (const Term& t : items) {
      std::optional<std::vector<Term>> r;
      try {
        r = hook(t);
      } catch (const PrologThrow& e) {
        std::string msg = loading_source_ + ":" + std::to_string(line) + ": " + describe_exception(e.ball(), &ops_);
        report.errors.push_back(msg);
        diagnostics() << "Error: " << msg << "\n";
        continue;
      } catch (const Error& e) {
        std::string msg = loading_source_ + ":" + std::to_string(line) + ": " + e.what();
        report.errors.push_back(msg);
        diagnostics() << "Error: " << msg << "\n";
        continue;
      }
      if (r)
        next.insert(next.end(), r->begin(), r->end());
      else
        next.push_back(t);
    }
    items = std::move(next);
  }
  for (const Term& t0 : items) {
    const Term& t = t0.deref();
    if (t.is_compound(atoms::neck, 1) || t.is_compound(atoms::query, 1)) {
      run_directive(t.arg(0), report, line);
      continue;
    }
    if (t.is_atom(atoms::end_of_file)) continue;
    try {
      add_clause(t, atoms::user, ClausePosition::back, loading_source_);
      ++report.clauses;
    } catch (const PrologThrow& e) {
      std::string msg = loading_source_ + ":" + std::to_string(line) + ": " + describe_exception(e.ball(), &ops_);
      report.errors.push_back(msg);
      diagnostics() << "Error: " << msg << "\n";
    }
  }
}

LoadReport Engine::consult_string(std::string_view text, const std::string& source) {
  LoadReport report;
  std::string saved = std::exchange(loading_source_, source);
  unload_source(source);
  Reader reader(text, ops_);
  for (;;) {
    std::optional<ReadTerm> rt;
    try {
      rt = reader.next();
    } catch (const SyntaxError& e) {
      std::string msg = source + ":" + std::to_string(e.line()) + ": syntax error: " + e.message();
      report.errors.push_back(msg);
      diagnostics() << "Error: " << msg << "\n";
      reader.recover();
      continue;
    }
    if (!rt) break;
    handle_read_term(rt->term, report, rt->line);
  }
  for (auto& hook : finish_hooks_) {
    try {
      hook(report);
    } catch (const Error& e) {
      report.errors.push_back(source + ": " + e.what());
      diagnostics() << "Error: " << report.errors.back() << "\n";
    }
  }
  loading_source_ = std::move(saved);
  return report;
}

LoadReport Engine::consult_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    LoadReport r;
    r.errors.push_back(path + ": cannot open file");
    diagnostics() << "Error: " << r.errors.back() << "\n";
    return r;
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return consult_string(buf.str(), path);
}

std::string describe_exception(const Term& ball, const OperatorTable* ops) {
  WriteOptions opts;
  opts.quoted = true;
  opts.ops = ops;
  const Term& b = ball.deref();
  if (!b.is_compound(atoms::error, 2)) return term_to_string(b, opts);
  std::string text = term_to_string(b.arg(0), opts);
  const Term& ctx = b.arg(1).deref();
  if (ctx.is_compound(atoms::context, 2) && ctx.arg(1).deref().is_atom())
    text += " (" + std::string(ctx.arg(1).deref().symbol().name()) + ")";
  return text;
}

}  // namespace objlog
