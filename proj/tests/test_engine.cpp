#include <sstream>

#include "doctest.h"
#include "objlog/engine.hpp"
#include "objlog/term_ops.hpp"

using namespace objlog;

namespace {

// Every value of variable `var` over all solutions of goal.
std::vector<std::string> all(Engine& e, std::string_view goal, std::string_view var = "X") {
  ReadTerm r = parse_term(goal, e.ops());
  Term v;
  for (auto& [name, t] : r.variables)
    if (name == var) v = t;
  std::vector<std::string> out;
  Query q(e, r.term);
  while (q.next()) out.push_back(quoted(resolve_bindings(v)));
  return out;
}

// Formal part of the error raised by goal, or "" when none is raised.
std::string error_of(Engine& e, std::string_view goal) {
  try {
    e.once_text(goal);
  } catch (const PrologThrow& t) {
    const Term& b = t.ball().deref();
    return quoted(b.is_compound(Symbol("error"), 2) ? b.arg(0) : b);
  }
  return "";
}

using V = std::vector<std::string>;

}  // namespace

TEST_CASE("facts, rules and backtracking") {
  Engine e;
  e.consult_string(R"(
parent(tom, bob). parent(tom, liz). parent(bob, ann). parent(bob, pat).
grandparent(X, Z) :- parent(X, Y), parent(Y, Z).
)");
  CHECK(all(e, "grandparent(tom, X)") == V{"ann", "pat"});
  CHECK(all(e, "parent(X, _)") == V{"tom", "tom", "bob", "bob"});
  CHECK(all(e, "parent(nobody, X)").empty());
}

TEST_CASE("library list predicates") {
  Engine e;
  CHECK(all(e, "append(X, Y, [1,2])") == V{"[]", "[1]", "[1,2]"});
  CHECK(all(e, "member(X, [a,b,c])") == V{"a", "b", "c"});
  CHECK(all(e, "length([a,b,c], X)") == V{"3"});
  CHECK(all(e, "reverse([1,2,3], X)") == V{"[3,2,1]"});
  CHECK(all(e, "msort([b,a,c,a], X)") == V{"[a,a,b,c]"});
  CHECK(all(e, "sort([b,a,c,a], X)") == V{"[a,b,c]"});
  CHECK(all(e, "nth1(2, [a,b,c], X)") == V{"b"});
  CHECK(all(e, "findall(Y-Z, member(Y-Z, [1-a, 2-b]), X)") == V{"[1-a,2-b]"});
  CHECK(all(e, "aggregate_all(count, member(_, [a,b]), X)") == V{"2"});
  CHECK(all(e, "between(1, 3, X)") == V{"1", "2", "3"});
  CHECK(all(e, "atom_length(hello, X)") == V{"5"});
  CHECK(all(e, "atomic_list_concat([a,b,1], X)") == V{"ab1"});
  CHECK(all(e, "X =.. [f, a, b]") == V{"f(a,b)"});
}

TEST_CASE("cut commits to the clause and is local to call/1") {
  Engine e;
  e.consult_string(R"(
first(X, [X|_]) :- !.
first(X, [_|T]) :- first(X, T).
t(X) :- member(X, [1,2,3]), X >= 2, !.
c(X) :- call((member(X, [1,2,3]), !)).
c(4).
)");
  CHECK(all(e, "first(X, [a,b])") == V{"a"});
  CHECK(all(e, "t(X)") == V{"2"});
  CHECK(all(e, "c(X)") == V{"1", "4"});
}

TEST_CASE("control constructs") {
  Engine e;
  CHECK(all(e, "( member(X, [1,2,3]), X > 1 -> true ; X = none )") == V{"2"});
  CHECK(all(e, "( fail -> X = a ; X = b )") == V{"b"});
  CHECK(all(e, "( X = a ; X = b )") == V{"a", "b"});
  CHECK(all(e, "\\+ fail, X = ok") == V{"ok"});
  CHECK(all(e, "\\+ member(_, []), X = ok") == V{"ok"});
  CHECK(all(e, "forall(member(Y, [1,2]), Y > 0), X = yes") == V{"yes"});
  CHECK(all(e, "once(member(X, [a,b]))") == V{"a"});
  CHECK(all(e, "ignore(fail), X = 1") == V{"1"});
  CHECK(all(e, "( member(X, [1,2,3]) *-> true ; X = 0 )") == V{"1", "2", "3"});
  CHECK(all(e, "G = member(X, [p,q]), call(G)") == V{"p", "q"});
  CHECK(all(e, "call(member, X, [z])") == V{"z"});
}

TEST_CASE("catch and throw") {
  Engine e;
  CHECK(all(e, "catch(throw(oops), B, X = caught(B))") == V{"caught(oops)"});
  CHECK(all(e, "catch(member(X, [1,2]), _, true)") == V{"1", "2"});
  CHECK_THROWS_AS(all(e, "catch(throw(a), b, true) ; X = outer"), PrologThrow);
  CHECK(error_of(e, "throw(my_ball)") == "my_ball");
  // Bindings made before the throw are undone when the catcher runs.
  CHECK(all(e, "catch((Y = bound, throw(x)), _, true), var(Y), X = unbound") == V{"unbound"});
}

TEST_CASE("standard errors") {
  Engine e;
  CHECK(error_of(e, "no_such_predicate") == "existence_error(procedure,no_such_predicate/0)");
  CHECK(error_of(e, "X is Y + 1") == "instantiation_error");
  CHECK(error_of(e, "X is foo + 1") == "type_error(evaluable,foo/0)");
  CHECK(error_of(e, "X is 1 / 0") == "evaluation_error(zero_divisor)");
  CHECK(error_of(e, "atom_length(X, 3)") == "instantiation_error");
  CHECK(error_of(e, "call(1)") == "type_error(callable,1)");
  CHECK(error_of(e, "assertz(foo :- 1)") == "type_error(callable,1)");
  CHECK(error_of(e, "assertz(atom(_))") == "permission_error(modify,static_procedure,atom/1)");
  e.flags().unknown_error = false;
  CHECK(error_of(e, "no_such_predicate") == "");
}

TEST_CASE("arithmetic") {
  Engine e;
  CHECK(all(e, "X is 7 // 2 + 7 mod 3 * 2") == V{"5"});
  CHECK(all(e, "X is 2 ** 10") == V{"1024"});
  CHECK(all(e, "X is 7 / 2") == V{"3.5"});
  CHECK(all(e, "X is max(3, 9) - abs(-4)") == V{"5"});
  CHECK(all(e, "succ(X, 5)") == V{"4"});
  CHECK(e.once_text("1 =:= 1.0, 2 > 1, 1 =< 1, 3 =\\= 4"));
}

TEST_CASE("database updates use the logical view") {
  Engine e;
  e.consult_string(":- dynamic(counter/1).\ncounter(0).\n");
  // Clauses asserted while iterating are not seen by that iteration.
  e.consult_string(":- dynamic(item/1).\nitem(1). item(2).\n", "items");
  CHECK(all(e, "item(X), Y is X + 10, assertz(item(Y))") == V{"1", "2"});
  CHECK(all(e, "item(X)") == V{"1", "2", "11", "12"});
  CHECK(e.once_text("retract(item(11))"));
  CHECK(all(e, "item(X)") == V{"1", "2", "12"});
  CHECK(e.once_text("retractall(item(_))"));
  CHECK(all(e, "item(X)").empty());
  CHECK(all(e, "retract(counter(C)), C1 is C + 1, assertz(counter(C1)), counter(X)") == V{"1"});
}

TEST_CASE("first-argument indexing leaves no choicepoint") {
  Engine e;
  e.consult_string("colour(red, 1).\ncolour(green, 2).\ncolour(blue, 3).\n");
  ReadTerm r = parse_term("colour(green, X)", e.ops());
  Query q(e, r.term);
  CHECK(q.next());
  CHECK(e.choicepoint_count() == 1);  // only the query barrier
  CHECK_FALSE(q.next());
}

TEST_CASE("queries nest, cut keeps bindings and close undoes them") {
  Engine e;
  ReadTerm r = parse_term("member(X, [a,b])", e.ops());
  const Term& x = r.variables[0].second;
  {
    Query q(e, r.term);
    CHECK(q.next());
    CHECK(x.deref().is_atom(Symbol("a")));
    q.cut();
    CHECK(x.deref().is_atom(Symbol("a")));
  }
  ReadTerm s = parse_term("member(Y, [c,d])", e.ops());
  Query q(e, s.term);
  CHECK(q.next());
  q.close();
  CHECK(s.variables[0].second.deref().is_var());
}

TEST_CASE("tail calls run in constant depth") {
  Engine e;
  e.consult_string("loop(0) :- !.\nloop(N) :- N1 is N - 1, loop(N1).\n");
  e.reset_peaks();
  CHECK(e.once_text("loop(100)"));
  auto small = e.stats().peak_depth;
  e.reset_peaks();
  CHECK(e.once_text("loop(200000)"));
  CHECK(e.stats().peak_depth == small);
}

TEST_CASE("deep non-tail recursion is bounded by the depth limit") {
  Engine e;
  e.consult_string("len([], 0).\nlen([_|T], N) :- len(T, M), N is M + 1.\n");
  CHECK(all(e, "numlist(1, 50000, L), len(L, X)") == V{"50000"});
  e.flags().max_depth = 1000;
  CHECK(error_of(e, "numlist(1, 50000, L), len(L, _)").find("resource_error") == 0);
}

TEST_CASE("consult reports errors and keeps going") {
  Engine e;
  std::ostringstream diag;
  e.set_diagnostics(diag);
  LoadReport r = e.consult_string("ok(1).\nbad( :- .\nok(2).\n:- fail.\n");
  CHECK(r.clauses == 2);
  CHECK(r.errors.size() == 2);
  CHECK(all(e, "ok(X)") == V{"1", "2"});
}

TEST_CASE("reconsulting a source replaces its clauses") {
  Engine e;
  e.consult_string("v(1).\nv(2).\n", "a.pl");
  e.consult_string("w(1).\n", "b.pl");
  e.consult_string("v(3).\n", "a.pl");
  CHECK(all(e, "v(X)") == V{"3"});
  CHECK(all(e, "w(X)") == V{"1"});
}

TEST_CASE("expansion hooks rewrite read terms") {
  Engine e;
  e.register_expansion_hook([](const Term& t) -> std::optional<std::vector<Term>> {
    if (!t.is_compound(Symbol("twice"), 1)) return std::nullopt;
    return std::vector<Term>{Term::compound("seen", {t.arg(0)}), Term::compound("seen", {t.arg(0)})};
  });
  e.consult_string("twice(a).\nseen(b).\n");
  CHECK(all(e, "seen(X)") == V{"a", "a", "b"});
}

TEST_CASE("builtins cannot be registered twice or redefined") {
  Engine e;
  e.register_builtin("my_true", 0, [](CallContext&) { return true; });
  CHECK(e.once_text("my_true"));
  CHECK_THROWS_AS(e.register_builtin("my_true", 0, [](CallContext&) { return true; }), Error);
  LoadReport r = e.consult_string("my_true.\n");
  CHECK_FALSE(r.ok());
}

TEST_CASE("nondeterministic builtins retry with state") {
  Engine e;
  e.register_builtin(
      "upto3", 1,
      [](CallContext& c) {
        std::uint64_t n = c.state() + 1;
        if (n < 3) c.retry(n);
        return c.unify(c.arg(0), Term::integer(std::int64_t(n)));
      },
      Determinism::nondet);
  CHECK(all(e, "upto3(X)") == V{"1", "2", "3"});
  CHECK(all(e, "upto3(X), X > 1, !") == V{"2"});
}

TEST_CASE("output and halt") {
  Engine e;
  std::ostringstream os;
  e.set_output(os);
  e.once_text("write(f('A', 1)), nl, writeq('A'), nl, format('~w+~a~n', [x, y]), print(z)");
  CHECK(os.str() == "f(A,1)\n'A'\nx+y\nz");
  CHECK_THROWS_AS(e.once_text("halt(3)"), HaltRequest);
  try {
    e.once_text("catch(halt(4), _, true)");
  } catch (const HaltRequest& h) {
    CHECK(h.code == 4);
  }
}

TEST_CASE("occurs check flag") {
  Engine e;
  CHECK(e.once_text("X = f(X)"));
  e.flags().occurs_check = true;
  CHECK_FALSE(e.once_text("X = f(X)"));
  CHECK(e.once_text("X = f(Y)"));
  e.flags().occurs_check = false;
  CHECK_FALSE(e.once_text("unify_with_occurs_check(X, f(X))"));
}

TEST_CASE("modules qualify goals and clauses") {
  Engine e;
  e.consult_string("m:p(1).\nm:(q(X) :- p(X)).\n");
  CHECK(all(e, "m:q(X)") == V{"1"});
  CHECK(e.is_defined(Symbol("m"), Symbol("p"), 1));
  CHECK_FALSE(e.is_defined(atoms::user, Symbol("p"), 1));
  CHECK(e.clauses(Symbol("m"), Symbol("q"), 1).size() == 1);
}
