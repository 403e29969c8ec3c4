#include "objlog/term_ops.hpp"

#include <unordered_set>
#include <utility>

#include "objlog/errors.hpp"

namespace objlog {

namespace {

int type_rank(const Term& t) {
  switch (t.tag()) {
    case Tag::Var:
      return 0;
    case Tag::Int:
    case Tag::Float:
      return 1;
    case Tag::Atom:
      return 3;
    case Tag::Obj:
      return 4;
    case Tag::Compound:
      return 5;
    default:
      return -1;
  }
}

int compare_numbers(const Term& x, const Term& y) {
  if (x.is_int() && y.is_int())
    return x.int_value() < y.int_value() ? -1 : x.int_value() > y.int_value() ? 1 : 0;
  double a = x.is_int() ? static_cast<double>(x.int_value()) : x.float_value();
  double b = y.is_int() ? static_cast<double>(y.int_value()) : y.float_value();
  if (a < b) return -1;
  if (a > b) return 1;
  // Equal by value: float sorts before int.
  if (x.is_float() && y.is_int()) return -1;
  if (x.is_int() && y.is_float()) return 1;
  return 0;
}

}  // namespace

int compare_terms(const Term& a, const Term& b) {
  std::vector<std::pair<const Term*, const Term*>> todo{{&a, &b}};
  while (!todo.empty()) {
    auto [pa, pb] = todo.back();
    todo.pop_back();
    const Term& x = pa->deref();
    const Term& y = pb->deref();
    int rx = type_rank(x), ry = type_rank(y);
    if (rx != ry) return rx < ry ? -1 : 1;
    switch (x.tag()) {
      case Tag::Var: {
        auto sx = x.var_node()->stamp(), sy = y.var_node()->stamp();
        if (sx != sy) return sx < sy ? -1 : 1;
        break;
      }
      case Tag::Int:
      case Tag::Float: {
        int c = compare_numbers(x, y);
        if (c != 0) return c;
        break;
      }
      case Tag::Atom: {
        if (x.symbol() != y.symbol()) {
          int c = x.symbol().name().compare(y.symbol().name());
          return c < 0 ? -1 : 1;
        }
        break;
      }
      case Tag::Obj:
        if (x.object_id() != y.object_id()) return x.object_id() < y.object_id() ? -1 : 1;
        break;
      case Tag::Compound: {
        if (x.node() == y.node()) break;
        if (x.arity() != y.arity()) return x.arity() < y.arity() ? -1 : 1;
        if (x.symbol() != y.symbol()) {
          int c = x.symbol().name().compare(y.symbol().name());
          return c < 0 ? -1 : 1;
        }
        for (std::uint32_t i = x.arity(); i-- > 0;) todo.emplace_back(&x.arg(i), &y.arg(i));
        break;
      }
      default:
        break;
    }
  }
  return 0;
}

bool terms_equal(const Term& a, const Term& b) {
  std::vector<std::pair<const Term*, const Term*>> todo{{&a, &b}};
  while (!todo.empty()) {
    auto [pa, pb] = todo.back();
    todo.pop_back();
    const Term& x = pa->deref();
    const Term& y = pb->deref();
    if (x.tag() != y.tag()) return false;
    switch (x.tag()) {
      case Tag::Var:
        if (x.var_node() != y.var_node()) return false;
        break;
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
      case Tag::Compound:
        if (x.node() == y.node()) break;
        if (x.symbol() != y.symbol() || x.arity() != y.arity()) return false;
        for (std::uint32_t i = x.arity(); i-- > 0;) todo.emplace_back(&x.arg(i), &y.arg(i));
        break;
      default:
        return false;
    }
  }
  return true;
}

bool is_variant(const Term& a, const Term& b) {
  std::unordered_map<const VarNode*, const VarNode*> fwd, bwd;
  std::vector<std::pair<const Term*, const Term*>> todo{{&a, &b}};
  while (!todo.empty()) {
    auto [pa, pb] = todo.back();
    todo.pop_back();
    const Term& x = pa->deref();
    const Term& y = pb->deref();
    if (x.tag() != y.tag()) return false;
    switch (x.tag()) {
      case Tag::Var: {
        auto [fi, fnew] = fwd.emplace(x.var_node(), y.var_node());
        auto [bi, bnew] = bwd.emplace(y.var_node(), x.var_node());
        if (fi->second != y.var_node() || bi->second != x.var_node()) return false;
        break;
      }
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
      case Tag::Compound:
        if (x.symbol() != y.symbol() || x.arity() != y.arity()) return false;
        for (std::uint32_t i = x.arity(); i-- > 0;) todo.emplace_back(&x.arg(i), &y.arg(i));
        break;
      default:
        return false;
    }
  }
  return true;
}

Term copy_term(const Term& t, const CopyOptions& options,
               std::unordered_map<const VarNode*, Term>* var_map) {
  std::unordered_map<const VarNode*, Term> local_vars;
  auto& vars = var_map ? *var_map : local_vars;
  // Completed copies of compound nodes; an Empty entry marks a node that is
  // still on the DFS path, so meeting it again means the term is cyclic.
  std::unordered_map<const RcNode*, Term> memo;
  struct Frame {
    const CompoundNode* node;
    std::uint32_t next;
    std::size_t base;
  };
  std::vector<Frame> frames;
  std::vector<Term> out;
  std::size_t count = 0;

  auto charge = [&](std::size_t n) {
    count += n;
    if (count > options.node_limit)
      throw ResourceError("record_size", "term exceeds the node limit for copying");
  };

  auto visit = [&](const Term& raw) {
    const Term& x = raw.deref();
    switch (x.tag()) {
      case Tag::Var: {
        charge(1);
        auto it = vars.find(x.var_node());
        if (it == vars.end()) it = vars.emplace(x.var_node(), Term::fresh_var()).first;
        out.push_back(it->second);
        return;
      }
      case Tag::Compound: {
        if (options.share_ground && x.is_ground_fast()) {
          charge(x.size_hint());
          out.push_back(x);
          return;
        }
        auto [it, inserted] = memo.try_emplace(x.node());
        if (!inserted) {
          if (it->second.empty()) throw CyclicTermError("cannot copy a cyclic term");
          out.push_back(it->second);
          return;
        }
        charge(1);
        frames.push_back(Frame{x.compound_node(), 0, out.size()});
        return;
      }
      default:
        charge(1);
        out.push_back(x);
        return;
    }
  };

  visit(t);
  while (!frames.empty()) {
    Frame& f = frames.back();
    if (f.next < f.node->arity()) {
      const Term& arg = f.node->args()[f.next++];
      visit(arg);  // may push a frame; f is not used afterwards
      continue;
    }
    std::vector<Term> args(std::make_move_iterator(out.begin() + static_cast<std::ptrdiff_t>(f.base)),
                           std::make_move_iterator(out.end()));
    out.resize(f.base);
    Term copy = Term::compound(f.node->functor(), std::move(args));
    memo[f.node] = copy;
    frames.pop_back();
    out.push_back(std::move(copy));
  }
  return std::move(out.back());
}

void term_variables(const Term& t, std::vector<Term>& out) {
  std::unordered_set<const RcNode*> seen;
  std::vector<const Term*> stack{&t};
  while (!stack.empty()) {
    const Term& x = stack.back()->deref();
    stack.pop_back();
    if (x.is_var()) {
      if (seen.insert(x.node()).second) out.push_back(x);
    } else if (x.is_compound() && !x.is_ground_fast()) {
      if (!seen.insert(x.node()).second) continue;
      for (std::uint32_t i = x.arity(); i-- > 0;) stack.push_back(&x.arg(i));
    }
  }
}

bool is_cyclic(const Term& t) {
  try {
    CopyOptions opts;
    copy_term(t, opts);
    return false;
  } catch (const CyclicTermError&) {
    return true;
  }
}

}  // namespace objlog
