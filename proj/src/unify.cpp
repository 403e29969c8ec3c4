#include "objlog/unify.hpp"

#include <unordered_set>
#include <utility>

namespace objlog {

void Trail::undo_to(Mark mark) {
  while (entries_.size() > mark) {
    Entry e = std::move(entries_.back());
    entries_.pop_back();
    if (e.var)
      e.var->reset();
    else if (on_undo)
      on_undo(e.code, e.payload);
  }
}

void Trail::tidy(Mark mark, std::uint64_t stamp) {
  std::size_t out = mark;
  for (std::size_t i = mark; i < entries_.size(); ++i) {
    Entry& e = entries_[i];
    if (e.var && e.var->stamp() >= stamp) continue;
    if (out != i) entries_[out] = std::move(e);
    ++out;
  }
  entries_.resize(out);
}

bool occurs_in(const VarNode* var, const Term& t) {
  std::vector<const Term*> stack{&t};
  std::unordered_set<const RcNode*> seen;
  while (!stack.empty()) {
    const Term& x = stack.back()->deref();
    stack.pop_back();
    if (x.is_var()) {
      if (x.var_node() == var) return true;
    } else if (x.is_compound() && !x.is_ground_fast()) {
      if (!seen.insert(x.node()).second) continue;
      for (const Term& a : x.args()) stack.push_back(&a);
    }
  }
  return false;
}

namespace {

struct Unifier {
  Trail& trail;
  bool occurs_check;
  std::vector<std::pair<const Term*, const Term*>> todo;
  std::vector<VarNode*> bound;

  bool bind(const Term& var, const Term& value) {
    VarNode* v = var.var_node();
    if (occurs_check && !value.is_var() && occurs_in(v, value)) return false;
    trail.bind(v, value);
    bound.push_back(v);
    return true;
  }

  bool run(const Term& a, const Term& b) {
    todo.emplace_back(&a, &b);
    while (!todo.empty()) {
      auto [pa, pb] = todo.back();
      todo.pop_back();
      const Term& x = pa->deref();
      const Term& y = pb->deref();
      if (x.is_var()) {
        if (y.is_var()) {
          if (x.var_node() == y.var_node()) continue;
          // Younger variable points at the older one.
          bool ok = x.var_node()->stamp() > y.var_node()->stamp() ? bind(x, y) : bind(y, x);
          if (!ok) return false;
          continue;
        }
        if (!bind(x, y)) return false;
        continue;
      }
      if (y.is_var()) {
        if (!bind(y, x)) return false;
        continue;
      }
      if (x.tag() != y.tag()) return false;
      switch (x.tag()) {
        case Tag::Int:
        case Tag::Obj:
          if (x.int_value() != y.int_value()) return false;
          break;
        case Tag::Float:
          if (!same_float(x.float_value(), y.float_value())) return false;
          break;
        case Tag::Atom:
          if (x.symbol() != y.symbol()) return false;
          break;
        case Tag::Compound: {
          if (x.node() == y.node()) break;
          const CompoundNode* cx = x.compound_node();
          const CompoundNode* cy = y.compound_node();
          if (cx->functor() != cy->functor() || cx->arity() != cy->arity()) return false;
          for (std::uint32_t i = cx->arity(); i-- > 0;)
            todo.emplace_back(&cx->args()[i], &cy->args()[i]);
          break;
        }
        default:
          return false;
      }
    }
    return true;
  }
};

}  // namespace

bool unify(const Term& a, const Term& b, Trail& trail, bool occurs_check) {
  const Term& x = a.deref();
  const Term& y = b.deref();
  // Common cases need no work list.
  if (x.is_var() && !y.is_compound()) {
    if (y.is_var()) {
      if (x.var_node() == y.var_node()) return true;
      if (x.var_node()->stamp() > y.var_node()->stamp())
        trail.bind(x.var_node(), y);
      else
        trail.bind(y.var_node(), x);
    } else {
      trail.bind(x.var_node(), y);
    }
    return true;
  }
  if (y.is_var() && !x.is_compound()) {
    trail.bind(y.var_node(), x);
    return true;
  }
  if (!x.is_compound() && !y.is_compound() && !x.is_var() && !y.is_var()) {
    if (x.tag() != y.tag()) return false;
    switch (x.tag()) {
      case Tag::Int:
      case Tag::Obj:
        return x.int_value() == y.int_value();
      case Tag::Float:
        return same_float(x.float_value(), y.float_value());
      case Tag::Atom:
        return x.symbol() == y.symbol();
      default:
        return false;
    }
  }

  thread_local std::vector<std::pair<const Term*, const Term*>> todo;
  thread_local std::vector<VarNode*> bound;
  todo.clear();
  bound.clear();
  Trail::Mark mark = trail.mark();
  Unifier u{trail, occurs_check, std::move(todo), std::move(bound)};
  bool ok = u.run(x, y);
  if (!ok) {
    trail.truncate(mark);
    for (VarNode* v : u.bound) v->reset();
  }
  todo = std::move(u.todo);
  bound = std::move(u.bound);
  return ok;
}

}  // namespace objlog
