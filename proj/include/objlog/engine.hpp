#pragma once

#include <any>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "objlog/errors.hpp"
#include "objlog/syntax.hpp"
#include "objlog/term.hpp"
#include "objlog/unify.hpp"

namespace objlog {

// A logic-level exception in flight. The ball is a private copy, so undoing
// bindings while unwinding cannot change it.
class PrologThrow : public std::exception {
 public:
  explicit PrologThrow(Term ball);
  const Term& ball() const noexcept { return ball_; }
  const char* what() const noexcept override { return text_.c_str(); }

 private:
  Term ball_;
  std::string text_;
};

// Builders for ISO-style error(Formal, Context) terms.
namespace err {
Term instantiation();
Term type(std::string_view type, const Term& culprit);
Term domain(std::string_view domain, const Term& culprit);
Term existence(std::string_view kind, const Term& what);
Term permission(std::string_view action, std::string_view type, const Term& culprit);
Term evaluation(std::string_view what);
Term resource(std::string_view what);
Term representation(std::string_view what);
Term make(Term formal, Term context = Term::fresh_var());
[[noreturn]] void raise(Term formal, Term context = Term::fresh_var());
}  // namespace err

// Raised by halt/0,1. Not catchable from logic code; it unwinds every
// query and reaches the embedding program.
struct HaltRequest {
  int code = 0;
};

class Engine;
void install_library(Engine& e);
struct Cont;
struct Env;

// Arguments and services available to a builtin predicate.
class CallContext {
 public:
  Engine& engine;
  Symbol module;

  std::size_t arity() const noexcept { return args_.size(); }
  // i-th argument, dereferenced.
  const Term& arg(std::size_t i) const noexcept { return args_[i].deref(); }
  std::span<const Term> args() const noexcept { return args_; }

  bool unify(const Term& a, const Term& b);

  // Nondeterministic builtins only. state() is 0 on the first call; after
  // retry(s) the builtin runs again with state s when execution backtracks
  // into it. memo() survives between those calls.
  std::uint64_t state() const noexcept { return state_; }
  void retry(std::uint64_t next_state) {
    retry_ = true;
    next_state_ = next_state;
  }
  std::any& memo() noexcept { return *memo_; }

  // Succeed by running goal in place of the builtin. Choicepoints the goal
  // leaves stay live and cut inside it is local.
  void continue_with(Term goal, Symbol goal_module);

 private:
  friend class Engine;
  CallContext(Engine& e, Symbol m, std::span<const Term> args, std::uint64_t state, std::any* memo)
      : engine(e), module(m), args_(args), state_(state), memo_(memo) {}

  std::span<const Term> args_;
  std::uint64_t state_;
  std::any* memo_;
  bool retry_ = false;
  std::uint64_t next_state_ = 0;
  std::optional<std::pair<Term, Symbol>> continuation_;
};

using Builtin = std::function<bool(CallContext&)>;

enum class Determinism { det, nondet };
enum class ClausePosition { front, back };

struct LoadReport {
  std::size_t clauses = 0;
  std::size_t directives = 0;
  // One line per syntax error, failed directive or rejected clause.
  std::vector<std::string> errors;
  bool ok() const { return errors.empty(); }
};

// Maps one read term to replacement terms, or nullopt when not applicable.
using ExpansionHook = std::function<std::optional<std::vector<Term>>(const Term&)>;

struct EngineFlags {
  bool unknown_error = true;  // unknown predicate: raise (true) or fail
  bool occurs_check = false;
  bool indexing = true;
  bool trace = false;
  std::size_t max_depth = 20'000'000;  // continuation depth limit
};

struct EngineStats {
  std::uint64_t inferences = 0;     // predicate calls (user and builtin)
  std::uint64_t clause_visits = 0;  // head unification attempts
  std::size_t peak_depth = 0;       // longest continuation chain
  std::size_t peak_choicepoints = 0;
};

struct Clause;
struct ClauseSet;
struct Predicate;
struct ChoicePoint;
struct BuiltinEntry;

// Iterator over the solutions of one goal. Queries nest: a builtin may run
// a query while another is active, and the inner one must be finished (cut
// or closed) before the builtin returns.
class Query {
 public:
  Query(Engine& engine, Term goal, Symbol module = atoms::user);
  ~Query();
  Query(const Query&) = delete;
  Query& operator=(const Query&) = delete;

  // Finds the next solution. Throws PrologThrow for uncaught exceptions,
  // after which the query is closed.
  bool next();
  // Drops remaining alternatives but keeps the current bindings.
  void cut();
  // Drops remaining alternatives and undoes every binding of the query.
  void close();

  const Term& goal() const noexcept { return goal_; }
  bool open() const noexcept { return open_; }

 private:
  friend class Engine;
  Engine& engine_;
  Term goal_;
  Symbol module_;
  std::size_t barrier_ = 0;  // index of this query's barrier choicepoint
  bool open_ = true;
  bool started_ = false;
  bool exhausted_ = false;
};

class Engine {
 public:
  Engine();
  ~Engine();
  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  EngineFlags& flags() noexcept { return flags_; }
  EngineStats& stats() noexcept { return stats_; }
  void reset_peaks() noexcept;

  Trail& trail() noexcept { return trail_; }
  OperatorTable& ops() noexcept { return ops_; }
  std::ostream& out() const noexcept { return *out_; }
  void set_output(std::ostream& os) noexcept { out_ = &os; }
  std::ostream& diagnostics() const noexcept { return *err_; }
  void set_diagnostics(std::ostream& os) noexcept { err_ = &os; }

  // Builtins are global (not per namespace). Registering a name/arity twice
  // throws objlog::Error.
  void register_builtin(std::string_view name, std::uint32_t arity, Builtin fn,
                        Determinism det = Determinism::det);
  bool is_builtin(Symbol name, std::uint32_t arity) const;

  // Database. Clause terms are Head or Head :- Body, optionally qualified
  // Module:Clause. Adding to a builtin raises permission_error.
  void add_clause(const Term& clause, Symbol module = atoms::user,
                  ClausePosition pos = ClausePosition::back, std::string_view source = {});
  // Removes the first clause unifying with the pattern; bindings are kept.
  bool retract(const Term& clause, Symbol module = atoms::user);
  void declare_dynamic(Symbol module, Symbol name, std::uint32_t arity);
  void declare_multifile(Symbol module, Symbol name, std::uint32_t arity);
  bool is_defined(Symbol module, Symbol name, std::uint32_t arity) const;
  std::size_t clause_count(Symbol module, Symbol name, std::uint32_t arity) const;
  // Clauses as Head :- Body terms (Body is true for facts), fresh variables.
  std::vector<Term> clauses(Symbol module, Symbol name, std::uint32_t arity) const;
  // Removes every clause, in any predicate, loaded from source.
  void unload_source(std::string_view source);

  // Consult. Each read term runs through the expansion hooks in
  // registration order; ":- G" results run as directives.
  void register_expansion_hook(ExpansionHook hook);
  // Runs when a consult reaches end of input, before the report is returned.
  void register_load_finish_hook(std::function<void(LoadReport&)> hook);
  LoadReport consult_string(std::string_view text, const std::string& source = "user");
  LoadReport consult_file(const std::string& path);
  // Name of the source being consulted, empty outside consult.
  const std::string& current_source() const noexcept { return loading_source_; }

  // Runs goal to its first solution and commits (bindings kept).
  bool once(const Term& goal, Symbol module = atoms::user);
  // Parses and runs a goal to its first solution; no bindings are reported.
  bool once_text(std::string_view text, Symbol module = atoms::user);

  // Unifies using the engine trail and occurs-check flag.
  bool unify(const Term& a, const Term& b);

  // Number of active choicepoints (used by tests).
  std::size_t choicepoint_count() const noexcept;

  // Maps C++ runtime faults (objlog::Error) escaping a builtin to error
  // terms. The default yields error(system_error(Message), _).
  using ErrorTranslator = std::function<Term(const Error&)>;
  void set_error_translator(ErrorTranslator t) { translate_ = std::move(t); }
  Term translate_error(const Error& e) const;

  // Global key/value store backing nb_setval/nb_getval.
  std::unordered_map<Symbol, Term>& globals() noexcept { return globals_; }

 private:
  friend class Query;
  friend class CallContext;
  friend void install_library(Engine& e);

  Predicate* lookup(Symbol module, Symbol name, std::uint32_t arity) const;
  Predicate& ensure(Symbol module, Symbol name, std::uint32_t arity);

  bool solve(Ref<Cont> c, Query& q);
  bool step(Ref<Cont>& c);
  bool backtrack(Ref<Cont>& c, Query& q);
  bool call_predicate(Ref<Cont>& c, Symbol module, const Term& goal, Env* env, Ref<Cont> next);
  bool try_clauses(Ref<Cont>& c);
  bool unify_head(const Clause& clause, const std::vector<Term>& actual, Env* env);
  bool call_builtin(Ref<Cont>& c, BuiltinEntry& b, Symbol module, std::size_t index,
                    std::vector<Term>* det_args = nullptr, Ref<Cont>* det_next = nullptr);
  void exit_catch(const Cont& marker);
  bool handle_exception(Ref<Cont>& c, Query& q, const Term& ball);
  void push_choicepoint(ChoicePoint&& cp);
  void cut_to(std::size_t height);
  void restore_choice_stamp();
  void on_trail_undo(std::uint32_t code, std::uint64_t payload);
  void trace_call(const Term& goal, std::size_t depth);

  void run_directive(const Term& goal, LoadReport& report, int line);
  void handle_read_term(const Term& term, LoadReport& report, int line);

  EngineFlags flags_;
  EngineStats stats_;
  Trail trail_;
  OperatorTable ops_;
  std::ostream* out_;
  std::ostream* err_;

  std::unordered_map<std::uint64_t, std::unique_ptr<BuiltinEntry>> builtins_;
  std::unordered_map<std::uint64_t, std::unique_ptr<Predicate>> preds_;
  std::vector<ChoicePoint> cps_;
  std::vector<ExpansionHook> hooks_;
  std::vector<std::function<void(LoadReport&)>> finish_hooks_;
  std::unordered_map<Symbol, Term> globals_;
  std::string loading_source_;
  std::uint64_t next_serial_ = 1;
  ErrorTranslator translate_;
};

// Readable form of an exception ball: "Formal (Message)" for
// error(Formal, context(_, Message)), the formal term for other error/2
// balls, the quoted ball otherwise.
std::string describe_exception(const Term& ball, const OperatorTable* ops = nullptr);

// Copies t replacing every bound variable by its value; unbound variables
// are kept (same identity). Used to report fully dereferenced bindings.
Term resolve_bindings(const Term& t);

}  // namespace objlog
