// Builtin predicates of the logic engine.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <sstream>

#include "engine_impl.hpp"
#include "objlog/term_ops.hpp"

namespace objlog {

namespace {

using Ctx = CallContext;

Term atom_term(std::string_view s) { return Term::atom(Symbol(s)); }

// ---------------------------------------------------------------------------
// Arithmetic

[[noreturn]] void int_overflow() { err::raise(err::evaluation("int_overflow")); }

double to_double(const Term& t) { return t.is_int() ? double(t.int_value()) : t.float_value(); }

Term check_float(double v) {
  if (std::isnan(v)) err::raise(err::evaluation("undefined"));
  if (std::isinf(v)) err::raise(err::evaluation("float_overflow"));
  return Term::real(v);
}

std::int64_t need_int_value(const Term& v) {
  if (!v.is_int()) err::raise(err::type("integer", v));
  return v.int_value();
}

std::int64_t ipow(std::int64_t base, std::int64_t exp) {
  if (exp < 0) {
    if (base == 1) return 1;
    if (base == -1) return (exp % 2 == 0) ? 1 : -1;
    if (base == 0) err::raise(err::evaluation("zero_divisor"));
    err::raise(err::type("float", Term::integer(base)));
  }
  std::int64_t result = 1;
  while (exp > 0) {
    if (exp & 1)
      if (__builtin_mul_overflow(result, base, &result)) int_overflow();
    exp >>= 1;
    if (exp > 0 && __builtin_mul_overflow(base, base, &base)) int_overflow();
  }
  return result;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

Term to_integer(double v) {
  if (std::isnan(v) || std::isinf(v) || v >= 9.2233720368547758e18 || v < -9.2233720368547758e18)
    int_overflow();
  return Term::integer(static_cast<std::int64_t>(v));
}

Term eval_binary(Symbol f, const Term& x, const Term& y) {
  std::string_view op = f.name();
  bool ints = x.is_int() && y.is_int();
  if (op == "+") {
    if (ints) {
      std::int64_t r;
      if (__builtin_add_overflow(x.int_value(), y.int_value(), &r)) int_overflow();
      return Term::integer(r);
    }
    return check_float(to_double(x) + to_double(y));
  }
  if (op == "-") {
    if (ints) {
      std::int64_t r;
      if (__builtin_sub_overflow(x.int_value(), y.int_value(), &r)) int_overflow();
      return Term::integer(r);
    }
    return check_float(to_double(x) - to_double(y));
  }
  if (op == "*") {
    if (ints) {
      std::int64_t r;
      if (__builtin_mul_overflow(x.int_value(), y.int_value(), &r)) int_overflow();
      return Term::integer(r);
    }
    return check_float(to_double(x) * to_double(y));
  }
  if (op == "/") {
    if (ints) {
      if (y.int_value() == 0) err::raise(err::evaluation("zero_divisor"));
      if (x.int_value() == std::numeric_limits<std::int64_t>::min() && y.int_value() == -1)
        int_overflow();
      if (x.int_value() % y.int_value() == 0) return Term::integer(x.int_value() / y.int_value());
      return Term::real(double(x.int_value()) / double(y.int_value()));
    }
    if (to_double(y) == 0.0) err::raise(err::evaluation("zero_divisor"));
    return check_float(to_double(x) / to_double(y));
  }
  if (op == "//" || op == "mod" || op == "rem" || op == "div") {
    std::int64_t a = need_int_value(x), b = need_int_value(y);
    if (b == 0) err::raise(err::evaluation("zero_divisor"));
    if (a == std::numeric_limits<std::int64_t>::min() && b == -1) {
      if (op == "mod" || op == "rem") return Term::integer(0);
      int_overflow();
    }
    if (op == "//") return Term::integer(a / b);
    if (op == "rem") return Term::integer(a % b);
    if (op == "div") return Term::integer(floor_div(a, b));
    std::int64_t m = a % b;
    if (m != 0 && ((m < 0) != (b < 0))) m += b;
    return Term::integer(m);
  }
  if (op == "min" || op == "max") {
    bool less;
    if (ints)
      less = x.int_value() < y.int_value();
    else
      less = to_double(x) < to_double(y);
    if (op == "min") return less ? x : (to_double(x) == to_double(y) && !ints ? x : y);
    return less ? y : x;
  }
  if (op == "**") {
    if (ints) return Term::integer(ipow(x.int_value(), y.int_value()));
    return check_float(std::pow(to_double(x), to_double(y)));
  }
  if (op == "^") {
    if (ints) return Term::integer(ipow(x.int_value(), y.int_value()));
    return check_float(std::pow(to_double(x), to_double(y)));
  }
  if (op == "atan2" || op == "atan") return check_float(std::atan2(to_double(x), to_double(y)));
  if (op == "copysign") return check_float(std::copysign(to_double(x), to_double(y)));
  if (op == "log") return check_float(std::log(to_double(y)) / std::log(to_double(x)));
  if (op == ">>") return Term::integer(need_int_value(x) >> (need_int_value(y) & 63));
  if (op == "<<") {
    std::int64_t a = need_int_value(x), b = need_int_value(y);
    if (b < 0 || b >= 63) int_overflow();
    std::int64_t r = static_cast<std::int64_t>(static_cast<std::uint64_t>(a) << b);
    if ((r >> b) != a) int_overflow();
    return Term::integer(r);
  }
  if (op == "/\\") return Term::integer(need_int_value(x) & need_int_value(y));
  if (op == "\\/") return Term::integer(need_int_value(x) | need_int_value(y));
  if (op == "xor") return Term::integer(need_int_value(x) ^ need_int_value(y));
  if (op == "gcd") {
    std::int64_t a = need_int_value(x), b = need_int_value(y);
    while (b != 0) {
      std::int64_t t = a % b;
      a = b;
      b = t;
    }
    return Term::integer(a < 0 ? -a : a);
  }
  err::raise(err::type("evaluable", indicator(f, 2)));
}

Term eval_unary(Symbol f, const Term& x) {
  std::string_view op = f.name();
  if (op == "-") {
    if (x.is_int()) {
      if (x.int_value() == std::numeric_limits<std::int64_t>::min()) int_overflow();
      return Term::integer(-x.int_value());
    }
    return Term::real(-x.float_value());
  }
  if (op == "+") return x;
  if (op == "abs") {
    if (x.is_int()) {
      if (x.int_value() == std::numeric_limits<std::int64_t>::min()) int_overflow();
      return Term::integer(x.int_value() < 0 ? -x.int_value() : x.int_value());
    }
    return Term::real(std::fabs(x.float_value()));
  }
  if (op == "sign") {
    if (x.is_int()) return Term::integer((x.int_value() > 0) - (x.int_value() < 0));
    double v = x.float_value();
    return Term::real(v > 0 ? 1.0 : v < 0 ? -1.0 : 0.0);
  }
  if (op == "float") return Term::real(to_double(x));
  if (op == "integer") return x.is_int() ? x : to_integer(std::round(x.float_value()));
  if (op == "float_integer_part") return Term::real(std::trunc(to_double(x)));
  if (op == "float_fractional_part") {
    double v = to_double(x);
    return Term::real(v - std::trunc(v));
  }
  if (op == "truncate") return x.is_int() ? x : to_integer(std::trunc(x.float_value()));
  if (op == "round") return x.is_int() ? x : to_integer(std::round(x.float_value()));
  if (op == "ceiling") return x.is_int() ? x : to_integer(std::ceil(x.float_value()));
  if (op == "floor") return x.is_int() ? x : to_integer(std::floor(x.float_value()));
  if (op == "\\") return Term::integer(~need_int_value(x));
  if (op == "msb") {
    std::int64_t v = need_int_value(x);
    if (v <= 0) err::raise(err::type("not_less_than_one", x));
    return Term::integer(63 - __builtin_clzll(static_cast<unsigned long long>(v)));
  }
  double v = to_double(x);
  if (op == "sqrt") {
    if (v < 0) err::raise(err::evaluation("undefined"));
    return check_float(std::sqrt(v));
  }
  if (op == "sin") return check_float(std::sin(v));
  if (op == "cos") return check_float(std::cos(v));
  if (op == "tan") return check_float(std::tan(v));
  if (op == "asin") return check_float(std::asin(v));
  if (op == "acos") return check_float(std::acos(v));
  if (op == "atan") return check_float(std::atan(v));
  if (op == "exp") return check_float(std::exp(v));
  if (op == "log") {
    if (v <= 0) err::raise(err::evaluation("undefined"));
    return check_float(std::log(v));
  }
  if (op == "log2") {
    if (v <= 0) err::raise(err::evaluation("undefined"));
    return check_float(std::log2(v));
  }
  err::raise(err::type("evaluable", indicator(f, 1)));
}

// Evaluates iteratively so long expressions cannot exhaust the C++ stack.
Term eval_iter(const Term& root) {
  struct Frame {
    const Term* t;
    std::uint32_t next;
    std::size_t base;
  };
  std::vector<Frame> stack;
  std::vector<Term> vals;
  auto leaf = [](const Term& t) -> std::optional<Term> {
    switch (t.tag()) {
      case Tag::Int:
      case Tag::Float:
        return t;
      case Tag::Var:
        err::raise(err::instantiation());
      case Tag::Atom: {
        std::string_view n = t.symbol().name();
        if (n == "pi") return Term::real(M_PI);
        if (n == "e") return Term::real(M_E);
        if (n == "inf" || n == "infinite") return Term::real(std::numeric_limits<double>::infinity());
        if (n == "nan") return Term::real(std::numeric_limits<double>::quiet_NaN());
        if (n == "max_tagged_integer") return Term::integer((std::int64_t(1) << 60) - 1);
        if (n == "epsilon") return Term::real(std::numeric_limits<double>::epsilon());
        if (n == "[]") break;
        err::raise(err::type("evaluable", indicator(t.symbol(), 0)));
      }
      case Tag::Compound:
        if (t.is_compound(atoms::dot, 2) && t.arg(1).deref().is_atom(atoms::nil)) return std::nullopt;
        if (t.arity() > 2) err::raise(err::type("evaluable", indicator(t.symbol(), t.arity())));
        return std::nullopt;
      default:
        break;
    }
    err::raise(err::type("evaluable", t));
  };
  const Term& r = root.deref();
  if (auto v = leaf(r)) return *v;
  stack.push_back({&r, 0, 0});
  for (;;) {
    Frame& f = stack.back();
    std::uint32_t n = f.t->is_compound(atoms::dot, 2) ? 1 : f.t->arity();
    if (f.next < n) {
      const Term& a = f.t->arg(f.next++).deref();
      if (auto v = leaf(a))
        vals.push_back(*v);
      else
        stack.push_back({&a, 0, vals.size()});
      continue;
    }
    Term result;
    if (f.t->is_compound(atoms::dot, 2))
      result = vals[f.base];
    else if (n == 1)
      result = eval_unary(f.t->symbol(), vals[f.base]);
    else
      result = eval_binary(f.t->symbol(), vals[f.base], vals[f.base + 1]);
    vals.resize(f.base);
    stack.pop_back();
    if (stack.empty()) return result;
    vals.push_back(std::move(result));
  }
}

int num_compare(const Term& a, const Term& b) {
  if (a.is_int() && b.is_int()) return (a.int_value() > b.int_value()) - (a.int_value() < b.int_value());
  double x = to_double(a), y = to_double(b);
  return (x > y) - (x < y);
}

// ---------------------------------------------------------------------------
// Text helpers

std::string text_of(const Term& t0, std::string_view what = "atom") {
  const Term& t = t0.deref();
  switch (t.tag()) {
    case Tag::Atom:
      return t.symbol().str();
    case Tag::Int:
      return std::to_string(t.int_value());
    case Tag::Float:
      return term_to_string(t);
    case Tag::Var:
      err::raise(err::instantiation());
    case Tag::Compound: {
      // A code or char list.
      std::vector<Term> items;
      if (list_to_vector(t, items)) {
        std::string s;
        for (const Term& c : items) {
          if (c.is_int())
            s.push_back(static_cast<char>(c.int_value()));
          else if (c.is_atom() && c.symbol().name().size() == 1)
            s.push_back(c.symbol().name()[0]);
          else
            err::raise(err::type(what, t));
        }
        return s;
      }
      break;
    }
    default:
      break;
  }
  err::raise(err::type(what, t));
}

Term codes_list(std::string_view s) {
  std::vector<Term> v;
  for (unsigned char c : s) v.push_back(Term::integer(c));
  return make_list(v);
}

Term chars_list(std::string_view s) {
  std::vector<Term> v;
  for (char c : s) v.push_back(atom_term(std::string(1, c)));
  return make_list(v);
}

// Parses a number the way the reader would; nullopt when s is not one.
std::optional<Term> parse_number(std::string_view s) {
  try {
    std::string_view trimmed = s;
    while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.front())))
      trimmed.remove_prefix(1);
    if (trimmed.empty()) return std::nullopt;
    ReadTerm rt = parse_term(trimmed);
    const Term& t = rt.term.deref();
    if (t.is_number()) return t;
    if (t.is_compound(atoms::minus, 1) && t.arg(0).deref().is_number()) {
      const Term& n = t.arg(0).deref();
      return n.is_int() ? Term::integer(-n.int_value()) : Term::real(-n.float_value());
    }
    if (t.is_compound(atoms::plus, 1) && t.arg(0).deref().is_number()) return t.arg(0).deref();
  } catch (const SyntaxError&) {
  }
  return std::nullopt;
}

std::string write_text(Engine& e, const Term& t, bool quote) {
  WriteOptions o;
  o.quoted = quote;
  o.ops = &e.ops();
  return term_to_string(t, o);
}

// format/2 directive processing.
std::string format_text(Engine& e, std::string_view fmt, const Term& args0) {
  std::vector<Term> args;
  const Term& a = args0.deref();
  if (!list_to_vector(a, args)) args = {a};
  std::size_t next = 0;
  auto take = [&]() -> Term {
    if (next >= args.size()) err::raise(Term::compound("format", {atom_term("not enough arguments")}));
    return args[next++].deref();
  };
  std::string out;
  for (std::size_t i = 0; i < fmt.size(); ++i) {
    char c = fmt[i];
    if (c != '~') {
      out.push_back(c);
      continue;
    }
    if (++i >= fmt.size()) break;
    std::string num;
    while (i < fmt.size() && std::isdigit(static_cast<unsigned char>(fmt[i]))) num.push_back(fmt[i++]);
    if (i < fmt.size() && fmt[i] == '*') {
      num = std::to_string(need_int(take()));
      ++i;
    }
    if (i >= fmt.size()) break;
    char d = fmt[i];
    switch (d) {
      case 'w':
        out += write_text(e, take(), false);
        break;
      case 'p':
      case 'q':
        out += write_text(e, take(), true);
        break;
      case 'a': {
        Term t = take();
        out += text_of(t);
        break;
      }
      case 'd': {
        Term t = take();
        if (!t.is_int()) err::raise(err::type("integer", t));
        std::string digits = std::to_string(t.int_value());
        if (!num.empty() && std::stoi(num) > 0) {
          int k = std::stoi(num);
          bool neg = digits[0] == '-';
          if (neg) digits.erase(0, 1);
          while (static_cast<int>(digits.size()) <= k) digits.insert(0, "0");
          digits.insert(digits.size() - k, ".");
          if (neg) digits.insert(0, "-");
        }
        out += digits;
        break;
      }
      case 'D': {
        Term t = take();
        if (!t.is_int()) err::raise(err::type("integer", t));
        std::string digits = std::to_string(t.int_value());
        std::string grouped;
        int count = 0;
        for (auto it = digits.rbegin(); it != digits.rend(); ++it) {
          if (count && count % 3 == 0 && *it != '-') grouped.insert(grouped.begin(), ',');
          grouped.insert(grouped.begin(), *it);
          ++count;
        }
        out += grouped;
        break;
      }
      case 'f':
      case 'e':
      case 'g': {
        Term t = eval_arith(take());
        char buf[512];
        std::string spec = "%." + (num.empty() ? std::string("6") : num) + d;
        std::snprintf(buf, sizeof buf, spec.c_str(), to_double(t));
        out += buf;
        break;
      }
      case 's': {
        out += text_of(take(), "codes");
        break;
      }
      case 'c': {
        std::int64_t code = need_int(take());
        int times = num.empty() ? 1 : std::stoi(num);
        for (int k = 0; k < times; ++k) out.push_back(static_cast<char>(code));
        break;
      }
      case 'n': {
        int times = num.empty() ? 1 : std::stoi(num);
        for (int k = 0; k < times; ++k) out.push_back('\n');
        break;
      }
      case '~':
        out.push_back('~');
        break;
      case 'i':
        take();
        break;
      case 't':
      case '|':
      case '+':
        break;  // column alignment is not supported; ignored
      default:
        err::raise(Term::compound("format", {atom_term(std::string("unknown directive ~") + d)}));
    }
  }
  if (next < args.size()) err::raise(Term::compound("format", {atom_term("too many arguments")}));
  return out;
}

// Applies f to each Name/Arity in a (possibly conjunctive or list) spec.
template <class F>
void for_each_indicator(const Term& spec0, Symbol module, F&& f) {
  const Term& spec = spec0.deref();
  if (spec.is_var()) err::raise(err::instantiation());
  if (spec.is_compound(atoms::comma, 2)) {
    for_each_indicator(spec.arg(0), module, f);
    for_each_indicator(spec.arg(1), module, f);
    return;
  }
  if (spec.is_compound(atoms::dot, 2)) {
    std::vector<Term> items;
    list_to_vector(spec, items);
    for (const Term& t : items) for_each_indicator(t, module, f);
    return;
  }
  if (spec.is_atom(atoms::nil)) return;
  if (spec.is_compound(atoms::colon, 2)) {
    for_each_indicator(spec.arg(1), need_atom(spec.arg(0)), f);
    return;
  }
  if (spec.is_compound(atoms::slash, 2)) {
    f(module, need_atom(spec.arg(0)), static_cast<std::uint32_t>(need_int(spec.arg(1))));
    return;
  }
  err::raise(err::type("predicate_indicator", spec));
}

OpType op_type(Symbol s) {
  std::string_view n = s.name();
  if (n == "xfx") return OpType::xfx;
  if (n == "xfy") return OpType::xfy;
  if (n == "yfx") return OpType::yfx;
  if (n == "fy") return OpType::fy;
  if (n == "fx") return OpType::fx;
  if (n == "xf") return OpType::xf;
  if (n == "yf") return OpType::yf;
  err::raise(err::domain("operator_specifier", Term::atom(s)));
}

std::vector<Term> collect(Engine& e, const Term& tmpl, const Term& goal, Symbol module) {
  std::vector<Term> results;
  Query q(e, goal, module);
  while (q.next()) results.push_back(copy_term(tmpl));
  return results;
}

void sort_terms(std::vector<Term>& v, bool dedupe) {
  std::stable_sort(v.begin(), v.end(),
                   [](const Term& a, const Term& b) { return compare_terms(a, b) < 0; });
  if (dedupe)
    v.erase(std::unique(v.begin(), v.end(),
                        [](const Term& a, const Term& b) { return compare_terms(a, b) == 0; }),
            v.end());
}

std::vector<Term> need_list(const Term& t) {
  std::vector<Term> v;
  const Term& d = t.deref();
  if (d.is_var()) err::raise(err::instantiation());
  if (!list_to_vector(d, v)) {
    // Partial list: instantiation error; otherwise a type error.
    const Term* cur = &d;
    while (cur->is_compound(atoms::dot, 2)) cur = &cur->arg(1).deref();
    if (cur->is_var()) err::raise(err::instantiation());
    err::raise(err::type("list", d));
  }
  return v;
}

}  // namespace

Term eval_arith(const Term& t) { return eval_iter(t); }

void install_library(Engine& e) {
  auto det = [&e](std::string_view name, std::uint32_t arity, Builtin fn) {
    e.register_builtin(name, arity, std::move(fn));
  };
  auto nondet = [&e](std::string_view name, std::uint32_t arity, Builtin fn) {
    e.register_builtin(name, arity, std::move(fn), Determinism::nondet);
  };

  // Type checks
  det("var", 1, [](Ctx& c) { return c.arg(0).is_var(); });
  det("nonvar", 1, [](Ctx& c) { return !c.arg(0).is_var(); });
  det("atom", 1, [](Ctx& c) { return c.arg(0).is_atom(); });
  det("number", 1, [](Ctx& c) { return c.arg(0).is_number(); });
  det("integer", 1, [](Ctx& c) { return c.arg(0).is_int(); });
  det("float", 1, [](Ctx& c) { return c.arg(0).is_float(); });
  det("atomic", 1, [](Ctx& c) { return c.arg(0).is_atomic(); });
  det("compound", 1, [](Ctx& c) { return c.arg(0).is_compound(); });
  det("callable", 1, [](Ctx& c) { return c.arg(0).is_callable(); });
  det("is_list", 1, [](Ctx& c) {
    std::vector<Term> v;
    return list_to_vector(c.arg(0), v);
  });
  det("ground", 1, [](Ctx& c) {
    std::vector<Term> vars;
    term_variables(c.arg(0), vars);
    return vars.empty();
  });
  det("is_object", 1, [](Ctx& c) { return c.arg(0).is_object(); });

  // Unification and comparison
  det("=", 2, [](Ctx& c) { return c.unify(c.arg(0), c.arg(1)); });
  det("\\=", 2, [](Ctx& c) {
    Trail::Mark m = c.engine.trail().mark();
    auto saved = c.engine.trail().choice_stamp();
    c.engine.trail().set_choice_stamp(std::numeric_limits<std::uint64_t>::max());
    bool ok = c.unify(c.arg(0), c.arg(1));
    c.engine.trail().undo_to(m);
    c.engine.trail().set_choice_stamp(saved);
    return !ok;
  });
  det("unify_with_occurs_check", 2,
      [](Ctx& c) { return unify(c.arg(0), c.arg(1), c.engine.trail(), true); });
  det("==", 2, [](Ctx& c) { return terms_equal(c.arg(0), c.arg(1)); });
  det("\\==", 2, [](Ctx& c) { return !terms_equal(c.arg(0), c.arg(1)); });
  det("@<", 2, [](Ctx& c) { return compare_terms(c.arg(0), c.arg(1)) < 0; });
  det("@>", 2, [](Ctx& c) { return compare_terms(c.arg(0), c.arg(1)) > 0; });
  det("@=<", 2, [](Ctx& c) { return compare_terms(c.arg(0), c.arg(1)) <= 0; });
  det("@>=", 2, [](Ctx& c) { return compare_terms(c.arg(0), c.arg(1)) >= 0; });
  det("=@=", 2, [](Ctx& c) { return is_variant(c.arg(0), c.arg(1)); });
  det("compare", 3, [](Ctx& c) {
    int r = compare_terms(c.arg(1), c.arg(2));
    return c.unify(c.arg(0), Term::atom(r < 0 ? "<" : r > 0 ? ">" : "="));
  });

  // Arithmetic
  det("is", 2, [](Ctx& c) { return c.unify(c.arg(0), eval_arith(c.arg(1))); });
  det("=:=", 2, [](Ctx& c) { return num_compare(eval_arith(c.arg(0)), eval_arith(c.arg(1))) == 0; });
  det("=\\=", 2, [](Ctx& c) { return num_compare(eval_arith(c.arg(0)), eval_arith(c.arg(1))) != 0; });
  det("<", 2, [](Ctx& c) { return num_compare(eval_arith(c.arg(0)), eval_arith(c.arg(1))) < 0; });
  det(">", 2, [](Ctx& c) { return num_compare(eval_arith(c.arg(0)), eval_arith(c.arg(1))) > 0; });
  det("=<", 2, [](Ctx& c) { return num_compare(eval_arith(c.arg(0)), eval_arith(c.arg(1))) <= 0; });
  det(">=", 2, [](Ctx& c) { return num_compare(eval_arith(c.arg(0)), eval_arith(c.arg(1))) >= 0; });
  det("succ", 2, [](Ctx& c) {
    const Term& a = c.arg(0);
    if (a.is_int()) {
      if (a.int_value() < 0) err::raise(err::type("not_less_than_zero", a));
      return c.unify(c.arg(1), Term::integer(a.int_value() + 1));
    }
    std::int64_t b = need_int(c.arg(1));
    if (b < 0) err::raise(err::type("not_less_than_zero", c.arg(1)));
    if (b == 0) return false;
    return c.unify(a, Term::integer(b - 1));
  });
  det("plus", 3, [](Ctx& c) {
    const Term &a = c.arg(0), &b = c.arg(1), &s = c.arg(2);
    if (a.is_int() && b.is_int()) return c.unify(s, Term::integer(a.int_value() + b.int_value()));
    if (a.is_int()) return c.unify(b, Term::integer(need_int(s) - a.int_value()));
    return c.unify(a, Term::integer(need_int(s) - need_int(b)));
  });
  nondet("between", 3, [](Ctx& c) {
    std::int64_t lo = need_int(c.arg(0));
    const Term& hi_t = c.arg(1);
    std::int64_t hi = hi_t.is_atom() && (hi_t.symbol().name() == "inf" || hi_t.symbol().name() == "infinite")
                          ? std::numeric_limits<std::int64_t>::max()
                          : need_int(hi_t);
    const Term& x = c.arg(2);
    if (!x.is_var()) {
      std::int64_t v = need_int(x);
      return v >= lo && v <= hi;
    }
    std::int64_t cur = lo + static_cast<std::int64_t>(c.state());
    if (cur > hi) return false;
    if (cur < hi) c.retry(c.state() + 1);
    return c.unify(x, Term::integer(cur));
  });

  // Term construction
  det("functor", 3, [](Ctx& c) {
    const Term& t = c.arg(0);
    if (!t.is_var()) {
      if (t.is_compound())
        return c.unify(c.arg(1), Term::atom(t.symbol())) &&
               c.unify(c.arg(2), Term::integer(t.arity()));
      return c.unify(c.arg(1), t) && c.unify(c.arg(2), Term::integer(0));
    }
    std::int64_t n = need_int(c.arg(2));
    const Term& name = c.arg(1);
    if (n == 0) return c.unify(t, name);
    if (n < 0) err::raise(err::domain("not_less_than_zero", c.arg(2)));
    Symbol f = need_atom(name);
    std::vector<Term> args;
    for (std::int64_t i = 0; i < n; ++i) args.push_back(Term::fresh_var());
    return c.unify(t, Term::compound(f, std::move(args)));
  });
  nondet("arg", 3, [](Ctx& c) {
    const Term& t = c.arg(1);
    if (!t.is_compound()) err::raise(err::type("compound", t));
    const Term& n = c.arg(0);
    if (n.is_int()) {
      std::int64_t i = n.int_value();
      if (i < 1 || i > t.arity()) return false;
      return c.unify(c.arg(2), t.arg(static_cast<std::uint32_t>(i - 1)));
    }
    if (!n.is_var()) err::raise(err::type("integer", n));
    std::uint64_t i = c.state();
    if (i >= t.arity()) return false;
    if (i + 1 < t.arity()) c.retry(i + 1);
    return c.unify(n, Term::integer(static_cast<std::int64_t>(i + 1))) &&
           c.unify(c.arg(2), t.arg(static_cast<std::uint32_t>(i)));
  });
  det("=..", 2, [](Ctx& c) {
    const Term& t = c.arg(0);
    if (!t.is_var()) {
      std::vector<Term> items{Term::atom(t.symbol())};
      if (!t.is_compound()) items[0] = t;
      for (const Term& a : t.args()) items.push_back(a);
      return c.unify(c.arg(1), make_list(items));
    }
    std::vector<Term> items = need_list(c.arg(1));
    if (items.empty()) err::raise(err::domain("non_empty_list", Term::atom(atoms::nil)));
    const Term& head = items[0].deref();
    if (items.size() == 1) return c.unify(t, head);
    Symbol f = need_atom(head);
    return c.unify(t, Term::compound(f, std::vector<Term>(items.begin() + 1, items.end())));
  });
  det("copy_term", 2, [](Ctx& c) { return c.unify(c.arg(1), copy_term(c.arg(0))); });
  det("term_variables", 2, [](Ctx& c) {
    std::vector<Term> vars;
    term_variables(c.arg(0), vars);
    return c.unify(c.arg(1), make_list(vars));
  });

  // Atoms and text
  det("atom_codes", 2, [](Ctx& c) {
    if (!c.arg(0).is_var()) return c.unify(c.arg(1), codes_list(text_of(c.arg(0))));
    return c.unify(c.arg(0), atom_term(text_of(c.arg(1), "codes")));
  });
  det("atom_chars", 2, [](Ctx& c) {
    if (!c.arg(0).is_var()) return c.unify(c.arg(1), chars_list(text_of(c.arg(0))));
    return c.unify(c.arg(0), atom_term(text_of(c.arg(1), "chars")));
  });
  det("char_code", 2, [](Ctx& c) {
    if (c.arg(0).is_atom()) {
      auto n = c.arg(0).symbol().name();
      if (n.size() != 1) err::raise(err::type("character", c.arg(0)));
      return c.unify(c.arg(1), Term::integer(static_cast<unsigned char>(n[0])));
    }
    std::int64_t code = need_int(c.arg(1));
    return c.unify(c.arg(0), atom_term(std::string(1, static_cast<char>(code))));
  });
  det("atom_length", 2, [](Ctx& c) {
    return c.unify(c.arg(1), Term::integer(static_cast<std::int64_t>(text_of(c.arg(0)).size())));
  });
  nondet("atom_concat", 3, [](Ctx& c) {
    if (!c.arg(0).is_var() && !c.arg(1).is_var())
      return c.unify(c.arg(2), atom_term(text_of(c.arg(0)) + text_of(c.arg(1))));
    std::string whole = text_of(c.arg(2));
    std::uint64_t i = c.state();
    if (i > whole.size()) return false;
    if (i < whole.size()) c.retry(i + 1);
    return c.unify(c.arg(0), atom_term(whole.substr(0, i))) &&
           c.unify(c.arg(1), atom_term(whole.substr(i)));
  });
  det("upcase_atom", 2, [](Ctx& c) {
    std::string s = text_of(c.arg(0));
    for (char& ch : s) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    return c.unify(c.arg(1), atom_term(s));
  });
  det("downcase_atom", 2, [](Ctx& c) {
    std::string s = text_of(c.arg(0));
    for (char& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return c.unify(c.arg(1), atom_term(s));
  });
  det("atom_number", 2, [](Ctx& c) {
    if (c.arg(0).is_var()) {
      const Term& n = c.arg(1);
      if (n.is_var()) err::raise(err::instantiation());
      if (!n.is_number()) err::raise(err::type("number", n));
      return c.unify(c.arg(0), atom_term(term_to_string(n)));
    }
    auto n = parse_number(text_of(c.arg(0)));
    return n && c.unify(c.arg(1), *n);
  });
  det("number_codes", 2, [](Ctx& c) {
    if (!c.arg(0).is_var()) return c.unify(c.arg(1), codes_list(text_of(c.arg(0))));
    std::string s = text_of(c.arg(1), "codes");
    auto n = parse_number(s);
    if (!n) err::raise(Term::compound(atoms::syntax_error, {atom_term("illegal_number")}));
    return c.unify(c.arg(0), *n);
  });
  det("atomic_list_concat", 2, [](Ctx& c) {
    std::string s;
    for (const Term& t : need_list(c.arg(0))) s += text_of(t);
    return c.unify(c.arg(1), atom_term(s));
  });
  det("atomic_list_concat", 3, [](Ctx& c) {
    std::string sep = text_of(c.arg(1));
    std::vector<Term> items;
    const Term& l = c.arg(0);
    bool ground_list = list_to_vector(l, items) &&
                       std::none_of(items.begin(), items.end(),
                                    [](const Term& t) { return t.deref().is_var(); });
    if (ground_list) {
      std::string s;
      for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) s += sep;
        s += text_of(items[i]);
      }
      return c.unify(c.arg(2), atom_term(s));
    }
    if (sep.empty()) err::raise(err::domain("non_empty_atom", c.arg(1)));
    std::string whole = text_of(c.arg(2));
    std::vector<Term> parts;
    std::size_t start = 0;
    for (;;) {
      std::size_t at = whole.find(sep, start);
      if (at == std::string::npos) {
        parts.push_back(atom_term(whole.substr(start)));
        break;
      }
      parts.push_back(atom_term(whole.substr(start, at - start)));
      start = at + sep.size();
    }
    return c.unify(l, make_list(parts));
  });
  det("term_to_atom", 2, [](Ctx& c) {
    if (!c.arg(0).is_var() || c.arg(1).is_var())
      return c.unify(c.arg(1), atom_term(write_text(c.engine, c.arg(0), true)));
    try {
      ReadTerm rt = parse_term(text_of(c.arg(1)), c.engine.ops());
      return c.unify(c.arg(0), rt.term);
    } catch (const SyntaxError& e) {
      err::raise(Term::compound(atoms::syntax_error, {atom_term(e.message())}));
    }
  });
  det("term_string", 2, [](Ctx& c) {
    if (!c.arg(0).is_var() || c.arg(1).is_var())
      return c.unify(c.arg(1), atom_term(write_text(c.engine, c.arg(0), true)));
    try {
      ReadTerm rt = parse_term(text_of(c.arg(1)), c.engine.ops());
      return c.unify(c.arg(0), rt.term);
    } catch (const SyntaxError& e) {
      err::raise(Term::compound(atoms::syntax_error, {atom_term(e.message())}));
    }
  });

  // Output
  det("write", 1, [](Ctx& c) {
    c.engine.out() << write_text(c.engine, c.arg(0), false);
    return true;
  });
  det("print", 1, [](Ctx& c) {
    c.engine.out() << write_text(c.engine, c.arg(0), true);
    return true;
  });
  det("writeq", 1, [](Ctx& c) {
    c.engine.out() << write_text(c.engine, c.arg(0), true);
    return true;
  });
  det("write_canonical", 1, [](Ctx& c) {
    WriteOptions o;
    o.quoted = true;
    OperatorTable none;
    o.ops = &none;
    c.engine.out() << term_to_string(c.arg(0), o);
    return true;
  });
  det("writeln", 1, [](Ctx& c) {
    c.engine.out() << write_text(c.engine, c.arg(0), false) << '\n';
    return true;
  });
  det("nl", 0, [](Ctx& c) {
    c.engine.out() << '\n';
    return true;
  });
  det("tab", 1, [](Ctx& c) {
    std::int64_t n = need_int(eval_arith(c.arg(0)));
    for (std::int64_t i = 0; i < n; ++i) c.engine.out() << ' ';
    return true;
  });
  det("put_char", 1, [](Ctx& c) {
    c.engine.out() << need_atom(c.arg(0)).name();
    return true;
  });
  det("flush_output", 0, [](Ctx& c) {
    c.engine.out().flush();
    return true;
  });
  det("format", 1, [](Ctx& c) {
    c.engine.out() << format_text(c.engine, text_of(c.arg(0)), Term::atom(atoms::nil));
    return true;
  });
  det("format", 2, [](Ctx& c) {
    c.engine.out() << format_text(c.engine, text_of(c.arg(0)), c.arg(1));
    return true;
  });
  det("format", 3, [](Ctx& c) {
    std::string s = format_text(c.engine, text_of(c.arg(1)), c.arg(2));
    const Term& sink = c.arg(0);
    if (sink.is_compound() && sink.arity() == 1) {
      std::string_view k = sink.symbol().name();
      if (k == "atom" || k == "string") return c.unify(sink.arg(0), atom_term(s));
      if (k == "codes") return c.unify(sink.arg(0), codes_list(s));
      if (k == "chars") return c.unify(sink.arg(0), chars_list(s));
    }
    if (sink.is_atom() && (sink.symbol().name() == "user_output" || sink.symbol().name() == "user_error")) {
      (sink.symbol().name() == "user_error" ? c.engine.diagnostics() : c.engine.out()) << s;
      return true;
    }
    err::raise(err::domain("output_sink", sink));
  });
  det("halt", 0, [](Ctx&) -> bool { throw HaltRequest{0}; });
  det("halt", 1, [](Ctx& c) -> bool { throw HaltRequest{static_cast<int>(need_int(c.arg(0)))}; });

  // Database
  auto assert_fn = [](ClausePosition pos) {
    return [pos](Ctx& c) {
      Symbol module = c.module;
      Term head, body;
      split_clause(c.arg(0), module, head, body);
      Predicate* p = c.engine.lookup(module, head.symbol(), head.arity());
      bool fresh = !p || (p->set->clauses.empty() && !p->multifile);
      c.engine.add_clause(c.arg(0), c.module, pos);
      if (fresh) c.engine.declare_dynamic(module, head.symbol(), head.arity());
      return true;
    };
  };
  det("assert", 1, assert_fn(ClausePosition::back));
  det("assertz", 1, assert_fn(ClausePosition::back));
  det("asserta", 1, assert_fn(ClausePosition::front));
  nondet("retract", 1, [](Ctx& c) {
    Symbol module = c.module;
    Term head, body;
    split_clause(c.arg(0), module, head, body);
    Predicate* p = c.engine.lookup(module, head.symbol(), head.arity());
    if (!p) return false;
    if (c.state() == 0) c.memo() = std::shared_ptr<const ClauseSet>(p->set);
    auto snapshot = std::any_cast<std::shared_ptr<const ClauseSet>>(c.memo());
    Term pattern = Term::compound(atoms::neck, {head, body});
    for (std::size_t i = c.state(); i < snapshot->clauses.size(); ++i) {
      const auto& cl = snapshot->clauses[i];
      auto env = Env::make(cl->nvars);
      Term actual = Term::compound(atoms::neck, {instantiate(cl->head, env.get()),
                                                 instantiate(cl->body, env.get())});
      if (!c.unify(pattern, actual)) continue;
      if (p->set.use_count() > 1) p->set = std::make_shared<ClauseSet>(*p->set);
      p->set->index.reset();
      auto& live = p->set->clauses;
      for (auto it = live.begin(); it != live.end(); ++it)
        if (it->get() == cl.get()) {
          live.erase(it);
          break;
        }
      if (i + 1 < snapshot->clauses.size()) c.retry(i + 1);
      return true;
    }
    return false;
  });
  det("retractall", 1, [](Ctx& c) {
    Symbol module = c.module;
    Term head, body;
    split_clause(c.arg(0), module, head, body);
    Predicate* p = c.engine.lookup(module, head.symbol(), head.arity());
    if (!p) {
      c.engine.declare_dynamic(module, head.symbol(), head.arity());
      return true;
    }
    auto snapshot = p->set;
    std::vector<const Clause*> doomed;
    for (const auto& cl : snapshot->clauses) {
      auto env = Env::make(cl->nvars);
      Term actual = instantiate(cl->head, env.get());
      Trail::Mark m = c.engine.trail().mark();
      auto saved = c.engine.trail().choice_stamp();
      c.engine.trail().set_choice_stamp(std::numeric_limits<std::uint64_t>::max());
      if (c.unify(head, actual)) doomed.push_back(cl.get());
      c.engine.trail().undo_to(m);
      c.engine.trail().set_choice_stamp(saved);
    }
    if (!doomed.empty()) {
      if (p->set.use_count() > 1) p->set = std::make_shared<ClauseSet>(*p->set);
      p->set->index.reset();
      std::erase_if(p->set->clauses, [&](const auto& cl) {
        return std::find(doomed.begin(), doomed.end(), cl.get()) != doomed.end();
      });
    }
    p->dynamic = true;
    return true;
  });
  nondet("clause", 2, [](Ctx& c) {
    Symbol module = c.module;
    const Term* h = &c.arg(0);
    while (h->is_compound(atoms::colon, 2)) {
      module = need_atom(h->arg(0));
      h = &h->arg(1).deref();
    }
    const Term& head = need_callable(*h);
    Predicate* p = c.engine.lookup(module, head.symbol(), head.arity());
    if (!p) return false;
    if (c.state() == 0) c.memo() = std::shared_ptr<const ClauseSet>(p->set);
    auto snapshot = std::any_cast<std::shared_ptr<const ClauseSet>>(c.memo());
    Term pattern = Term::compound(atoms::neck, {head, c.arg(1)});
    for (std::size_t i = c.state(); i < snapshot->clauses.size(); ++i) {
      const auto& cl = snapshot->clauses[i];
      auto env = Env::make(cl->nvars);
      Term actual = Term::compound(atoms::neck, {instantiate(cl->head, env.get()),
                                                 instantiate(cl->body, env.get())});
      if (!c.unify(pattern, actual)) continue;
      if (i + 1 < snapshot->clauses.size()) c.retry(i + 1);
      return true;
    }
    return false;
  });
  det("abolish", 1, [](Ctx& c) {
    for_each_indicator(c.arg(0), c.module, [&](Symbol m, Symbol n, std::uint32_t a) {
      c.engine.preds_.erase(pred_key(m, n, a));
    });
    return true;
  });
  det("dynamic", 1, [](Ctx& c) {
    for_each_indicator(c.arg(0), c.module,
                       [&](Symbol m, Symbol n, std::uint32_t a) { c.engine.declare_dynamic(m, n, a); });
    return true;
  });
  det("multifile", 1, [](Ctx& c) {
    for_each_indicator(c.arg(0), c.module, [&](Symbol m, Symbol n, std::uint32_t a) {
      c.engine.declare_multifile(m, n, a);
    });
    return true;
  });
  det("discontiguous", 1, [](Ctx& c) {
    for_each_indicator(c.arg(0), c.module, [](Symbol, Symbol, std::uint32_t) {});
    return true;
  });
  det("current_predicate", 1, [](Ctx& c) {
    const Term& spec = c.arg(0);
    if (!spec.is_compound(atoms::slash, 2)) err::raise(err::type("predicate_indicator", spec));
    Symbol n = need_atom(spec.arg(0));
    std::uint32_t a = static_cast<std::uint32_t>(need_int(spec.arg(1)));
    Predicate* p = c.engine.lookup(c.module, n, a);
    return p && !p->set->clauses.empty();
  });
  det("op", 3, [](Ctx& c) {
    std::int64_t p = need_int(c.arg(0));
    if (p < 0 || p > 1200) err::raise(err::domain("operator_priority", c.arg(0)));
    OpType type = op_type(need_atom(c.arg(1)));
    std::vector<Term> names;
    if (!list_to_vector(c.arg(2), names)) names = {c.arg(2)};
    for (const Term& n : names) c.engine.ops().add(static_cast<int>(p), type, need_atom(n));
    return true;
  });
  det("consult", 1, [](Ctx& c) {
    std::string path = text_of(c.arg(0));
    if (!std::filesystem::exists(path) && std::filesystem::exists(path + ".pl")) path += ".pl";
    if (!std::filesystem::exists(path))
      err::raise(err::existence("source_sink", c.arg(0)));
    c.engine.consult_file(path);
    return true;
  });
  det("ensure_loaded", 1, [](Ctx&) { return true; });
  det("use_module", 1, [](Ctx&) { return true; });
  det("initialization", 1, [](Ctx& c) {
    return c.engine.once(c.arg(0), c.module) || true;
  });
  det("set_prolog_flag", 2, [](Ctx& c) {
    Symbol flag = need_atom(c.arg(0));
    const Term& v = c.arg(1);
    auto boolean = [&]() {
      Symbol s = need_atom(v);
      if (s == atoms::true_ || s.name() == "on") return true;
      if (s == atoms::false_ || s.name() == "off") return false;
      err::raise(err::domain("flag_value", v));
    };
    std::string_view f = flag.name();
    if (f == "unknown") {
      Symbol s = need_atom(v);
      if (s.name() == "error") c.engine.flags().unknown_error = true;
      else if (s == atoms::fail) c.engine.flags().unknown_error = false;
      else err::raise(err::domain("flag_value", v));
    } else if (f == "occurs_check") {
      c.engine.flags().occurs_check = boolean();
    } else if (f == "indexing") {
      c.engine.flags().indexing = boolean();
    } else if (f == "trace") {
      c.engine.flags().trace = boolean();
    } else {
      err::raise(err::domain("prolog_flag", c.arg(0)));
    }
    return true;
  });
  det("current_prolog_flag", 2, [](Ctx& c) {
    Symbol flag = need_atom(c.arg(0));
    std::string_view f = flag.name();
    const EngineFlags& fl = c.engine.flags();
    Term v;
    if (f == "unknown") v = Term::atom(fl.unknown_error ? "error" : "fail");
    else if (f == "occurs_check") v = Term::atom(fl.occurs_check ? atoms::true_ : atoms::false_);
    else if (f == "indexing") v = Term::atom(fl.indexing ? atoms::true_ : atoms::false_);
    else if (f == "trace") v = Term::atom(fl.trace ? atoms::true_ : atoms::false_);
    else return false;
    return c.unify(c.arg(1), v);
  });

  // Global variables (not undone on backtracking)
  det("nb_setval", 2, [](Ctx& c) {
    c.engine.globals()[need_atom(c.arg(0))] = copy_term(c.arg(1));
    return true;
  });
  det("b_setval", 2, [](Ctx& c) {
    c.engine.globals()[need_atom(c.arg(0))] = copy_term(c.arg(1));
    return true;
  });
  det("nb_getval", 2, [](Ctx& c) {
    Symbol k = need_atom(c.arg(0));
    auto it = c.engine.globals().find(k);
    if (it == c.engine.globals().end()) err::raise(err::existence("variable", c.arg(0)));
    return c.unify(c.arg(1), it->second);
  });
  det("b_getval", 2, [](Ctx& c) {
    Symbol k = need_atom(c.arg(0));
    auto it = c.engine.globals().find(k);
    if (it == c.engine.globals().end()) err::raise(err::existence("variable", c.arg(0)));
    return c.unify(c.arg(1), it->second);
  });

  // All solutions
  det("findall", 3, [](Ctx& c) {
    auto results = collect(c.engine, c.arg(0), need_callable(c.arg(1)), c.module);
    return c.unify(c.arg(2), make_list(results));
  });
  det("findall", 4, [](Ctx& c) {
    auto results = collect(c.engine, c.arg(0), need_callable(c.arg(1)), c.module);
    return c.unify(c.arg(2), make_list(results, c.arg(3)));
  });
  det("aggregate_all", 3, [](Ctx& c) {
    const Term& spec = c.arg(0);
    const Term& goal = need_callable(c.arg(1));
    if (spec.is_atom() && spec.symbol().name() == "count") {
      std::int64_t n = 0;
      Query q(c.engine, goal, c.module);
      while (q.next()) ++n;
      return c.unify(c.arg(2), Term::integer(n));
    }
    if (!spec.is_compound() || spec.arity() != 1) err::raise(err::domain("aggregate_spec", spec));
    std::string_view k = spec.symbol().name();
    auto values = collect(c.engine, spec.arg(0), goal, c.module);
    if (k == "count") return c.unify(c.arg(2), Term::integer(static_cast<std::int64_t>(values.size())));
    if (k == "bag") return c.unify(c.arg(2), make_list(values));
    if (k == "set") {
      sort_terms(values, true);
      return c.unify(c.arg(2), make_list(values));
    }
    if (k == "sum") {
      Term acc = Term::integer(0);
      for (const Term& v : values) acc = eval_binary(atoms::plus, acc, eval_arith(v));
      return c.unify(c.arg(2), acc);
    }
    if (k == "max" || k == "min") {
      if (values.empty()) return false;
      Term best = eval_arith(values[0]);
      for (std::size_t i = 1; i < values.size(); ++i) {
        Term v = eval_arith(values[i]);
        int cmp = num_compare(v, best);
        if ((k == "max" && cmp > 0) || (k == "min" && cmp < 0)) best = v;
      }
      return c.unify(c.arg(2), best);
    }
    err::raise(err::domain("aggregate_spec", spec));
  });

  // Sorting
  det("msort", 2, [](Ctx& c) {
    auto v = need_list(c.arg(0));
    sort_terms(v, false);
    return c.unify(c.arg(1), make_list(v));
  });
  det("sort", 2, [](Ctx& c) {
    auto v = need_list(c.arg(0));
    sort_terms(v, true);
    return c.unify(c.arg(1), make_list(v));
  });
  det("keysort", 2, [](Ctx& c) {
    auto v = need_list(c.arg(0));
    for (const Term& t : v)
      if (!t.deref().is_compound(atoms::minus, 2)) err::raise(err::type("pair", t));
    std::stable_sort(v.begin(), v.end(), [](const Term& a, const Term& b) {
      return compare_terms(a.deref().arg(0), b.deref().arg(0)) < 0;
    });
    return c.unify(c.arg(1), make_list(v));
  });
  det("sort", 4, [](Ctx& c) {
    std::int64_t key = need_int(c.arg(0));
    std::string_view order = need_atom(c.arg(1)).name();
    auto v = need_list(c.arg(2));
    auto key_of = [key](const Term& t) -> const Term& {
      if (key == 0) return t.deref();
      const Term& d = t.deref();
      if (!d.is_compound() || d.arity() < key) err::raise(err::type("compound", d));
      return d.arg(static_cast<std::uint32_t>(key - 1)).deref();
    };
    bool desc = order == "@>" || order == "@>=";
    bool dedupe = order == "@<" || order == "@>";
    std::stable_sort(v.begin(), v.end(), [&](const Term& a, const Term& b) {
      int r = compare_terms(key_of(a), key_of(b));
      return desc ? r > 0 : r < 0;
    });
    if (dedupe)
      v.erase(std::unique(v.begin(), v.end(),
                          [&](const Term& a, const Term& b) {
                            return compare_terms(key_of(a), key_of(b)) == 0;
                          }),
              v.end());
    return c.unify(c.arg(3), make_list(v));
  });
}

const char* const kPrelude = R"PL(
append([], L, L).
append([H|T], L, [H|R]) :- append(T, L, R).

member(X, [X|_]).
member(X, [_|T]) :- member(X, T).

memberchk(X, L) :- member(X, L), !.

length(L, N) :- integer(N), !, N >= 0, '$length_fill'(L, N).
length(L, N) :- var(N), '$length_enum'(L, 0, N).

'$length_fill'([], 0) :- !.
'$length_fill'([_|T], N) :- N > 0, N1 is N-1, '$length_fill'(T, N1).

'$length_enum'([], N, N).
'$length_enum'([_|T], N0, N) :- N1 is N0+1, '$length_enum'(T, N1, N).

reverse(L, R) :- '$reverse'(L, [], R).
'$reverse'([], A, A).
'$reverse'([H|T], A, R) :- '$reverse'(T, [H|A], R).

nth0(I, L, E) :- integer(I), !, I >= 0, '$nth_det'(I, L, E).
nth0(I, L, E) :- var(I), '$nth_gen'(L, E, 0, I).
nth1(I, L, E) :- integer(I), !, I >= 1, I0 is I-1, '$nth_det'(I0, L, E).
nth1(I, L, E) :- var(I), '$nth_gen'(L, E, 1, I).

'$nth_det'(0, [E|_], E) :- !.
'$nth_det'(I, [_|T], E) :- I1 is I-1, '$nth_det'(I1, T, E).

'$nth_gen'([E|_], E, B, B).
'$nth_gen'([_|T], E, B0, B) :- B1 is B0+1, '$nth_gen'(T, E, B1, B).

last([X], X) :- !.
last([_|T], X) :- last(T, X).

select(X, [X|T], T).
select(X, [H|T], [H|R]) :- select(X, T, R).

selectchk(X, L, R) :- select(X, L, R), !.

exclude(_, [], []).
exclude(P, [H|T], R) :- ( call(P, H) -> R = R1 ; R = [H|R1] ), exclude(P, T, R1).

include(_, [], []).
include(P, [H|T], R) :- ( call(P, H) -> R = [H|R1] ; R = R1 ), include(P, T, R1).

partition(_, [], [], []).
partition(P, [H|T], I, E) :-
    (   call(P, H) -> I = [H|I1], E = E1 ; I = I1, E = [H|E1] ),
    partition(P, T, I1, E1).

maplist(_, []).
maplist(P, [A|As]) :- call(P, A), maplist(P, As).
maplist(_, [], []).
maplist(P, [A|As], [B|Bs]) :- call(P, A, B), maplist(P, As, Bs).
maplist(_, [], [], []).
maplist(P, [A|As], [B|Bs], [C|Cs]) :- call(P, A, B, C), maplist(P, As, Bs, Cs).

foldl(G, L, A0, A) :- '$foldl'(L, G, A0, A).
'$foldl'([], _, A, A).
'$foldl'([X|Xs], G, A0, A) :- call(G, X, A0, A1), '$foldl'(Xs, G, A1, A).

sum_list(L, S) :- '$sum_list'(L, 0, S).
'$sum_list'([], S, S).
'$sum_list'([X|Xs], S0, S) :- S1 is S0+X, '$sum_list'(Xs, S1, S).
sumlist(L, S) :- sum_list(L, S).

max_list([H|T], M) :- '$max_list'(T, H, M).
'$max_list'([], M, M).
'$max_list'([H|T], M0, M) :- M1 is max(M0, H), '$max_list'(T, M1, M).

min_list([H|T], M) :- '$min_list'(T, H, M).
'$min_list'([], M, M).
'$min_list'([H|T], M0, M) :- M1 is min(M0, H), '$min_list'(T, M1, M).

numlist(L, H, []) :- L > H, !.
numlist(L, H, [L|T]) :- L1 is L+1, numlist(L1, H, T).

delete([], _, []).
delete([H|T], X, R) :- ( H \= X -> R = [H|R1] ; R = R1 ), delete(T, X, R1).

subtract([], _, []).
subtract([H|T], L, R) :- ( memberchk(H, L) -> R = R1 ; R = [H|R1] ), subtract(T, L, R1).

list_to_set(L, S) :- '$lts'(L, [], S).
'$lts'([], _, []).
'$lts'([H|T], Seen, R) :-
    (   memberchk(H, Seen) -> R = R1 ; R = [H|R1] ),
    '$lts'(T, [H|Seen], R1).

permutation([], []).
permutation(L, [H|T]) :- select(H, L, R), permutation(R, T).


concat_atom(L, R) :- atomic_list_concat(L, R).
concat_atom(L, S, R) :- atomic_list_concat(L, S, R).
)PL";

}  // namespace objlog
