#pragma once

// Internal engine structures shared by engine.cpp and the builtin library.

#include <memory>
#include <unordered_map>
#include <vector>

#include "objlog/engine.hpp"

namespace objlog {

// Per-activation variable cells for a clause template.
struct Env final : RcNode {
  static Ref<Env> make(std::uint32_t n);
  std::uint32_t size() const noexcept { return size_; }
  Term* slots() noexcept { return reinterpret_cast<Term*>(this + 1); }

 private:
  explicit Env(std::uint32_t n) : size_(n) {}
  ~Env() override;
  void dispose() noexcept override;
  std::uint32_t size_;
  std::uint32_t pad_ = 0;
};
static_assert(sizeof(Env) % alignof(Term) == 0);

enum class ContKind : std::uint8_t { Goal, Done, CutTo, CatchExit };

// One frame of the success continuation: a goal template with its variable
// cells, the namespace it runs in and its cut barrier. The chain is
// persistent; choicepoints share suffixes of it.
struct Cont final : RcNode {
  ContKind kind = ContKind::Goal;
  Term goal;
  Ref<Env> env;
  Symbol module;
  std::size_t cut_barrier = 0;  // CutTo: target height
  std::uint64_t serial = 0;     // CatchExit: catch choicepoint serial
  Ref<Cont> next;
  std::size_t depth = 1;
};

Ref<Cont> make_goal(Term goal, Ref<Env> env, Symbol module, std::size_t cut_barrier, Ref<Cont> next);

struct IndexKey {
  std::uint8_t tag = 0;
  std::uint32_t a = 0;
  std::uint64_t b = 0;
  friend bool operator==(const IndexKey&, const IndexKey&) = default;
};
struct IndexKeyHash {
  std::size_t operator()(const IndexKey& k) const noexcept {
    return std::hash<std::uint64_t>{}(k.b * 0x9E3779B97F4A7C15ull ^ (std::uint64_t(k.a) << 8) ^ k.tag);
  }
};
// Key for a dereferenced non-variable term.
IndexKey index_key(const Term& t);

struct Clause {
  Term head;  // template: variables replaced by Slot cells
  Term body;
  std::uint32_t nvars = 0;
  bool var_key = true;  // first argument is a variable (or arity 0)
  IndexKey key;
  std::string source;
};

struct ClauseIndex {
  std::unordered_map<IndexKey, std::vector<std::uint32_t>, IndexKeyHash> buckets;
  std::vector<std::uint32_t> var_only;  // clauses with a variable first argument
  std::vector<std::uint32_t> all;
};

// Immutable once shared: a running call keeps its own snapshot (logical
// update view), and writers copy when the set is shared.
struct ClauseSet {
  std::vector<std::shared_ptr<const Clause>> clauses;
  mutable std::unique_ptr<ClauseIndex> index;

  ClauseSet() = default;
  ClauseSet(const ClauseSet& o) : clauses(o.clauses) {}
  const ClauseIndex& ensure_index() const;
};

struct Predicate {
  Symbol module, name;
  std::uint32_t arity = 0;
  std::shared_ptr<ClauseSet> set = std::make_shared<ClauseSet>();
  bool dynamic = false;
  bool multifile = false;
};

struct BuiltinEntry {
  Symbol name;
  std::uint32_t arity;
  Builtin fn;
  Determinism det;
};

enum class CpKind : std::uint8_t { Barrier, Clauses, Alt, Redo, Catch };

struct ChoicePoint {
  CpKind kind = CpKind::Barrier;
  Trail::Mark trail_mark = 0;
  std::uint64_t stamp = 0;
  std::uint64_t serial = 0;
  // Clauses: continuation after the call. Alt: the goal to resume.
  // Redo/Catch: continuation after the builtin / catch.
  Ref<Cont> cont;

  // Clauses
  std::shared_ptr<const ClauseSet> set;
  const std::vector<std::uint32_t>* candidates = nullptr;
  std::size_t pos = 0;
  Symbol module;  // also Redo and Catch
  std::vector<Term> args;  // also Redo

  // Redo
  BuiltinEntry* builtin = nullptr;
  std::uint64_t state = 0;
  std::unique_ptr<std::any> memo;

  // Catch
  Term catcher, recovery;
  bool active = true;
};

inline std::uint64_t pred_key(Symbol module, Symbol name, std::uint32_t arity) {
  return (std::uint64_t(module.id()) << 44) ^ (std::uint64_t(name.id()) << 12) ^ arity;
}
inline std::uint64_t builtin_key(Symbol name, std::uint32_t arity) {
  return (std::uint64_t(name.id()) << 16) ^ arity;
}

// Instantiates a clause template, creating variables for empty cells.
Term instantiate(const Term& tmpl, Env* env);
// Compiles a clause into templates. Throws PrologThrow for malformed
// clauses.
std::shared_ptr<Clause> compile_clause(const Term& head, const Term& body);

// Splits Module:Clause and Head :- Body.
void split_clause(const Term& clause, Symbol& module, Term& head, Term& body);

// Name/Arity term for messages.
Term indicator(Symbol name, std::uint32_t arity);

// Helpers for builtin argument checking.
Symbol need_atom(const Term& t);
std::int64_t need_int(const Term& t);
const Term& need_callable(const Term& t);
// Evaluates an arithmetic expression.
Term eval_arith(const Term& t);

void install_library(Engine& e);
extern const char* const kPrelude;

}  // namespace objlog
