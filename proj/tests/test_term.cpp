#include <unordered_map>

#include "doctest.h"
#include "objlog/engine.hpp"
#include "objlog/errors.hpp"
#include "objlog/store.hpp"
#include "objlog/syntax.hpp"
#include "objlog/term_ops.hpp"
#include "objlog/unify.hpp"

using namespace objlog;

namespace {

Term parse(std::string_view text) { return parse_term(text).term; }

std::string show(const Term& t) { return quoted(t); }

}  // namespace

TEST_CASE("atomic terms carry their values") {
  CHECK(Term::integer(-7).int_value() == -7);
  CHECK(Term::real(2.5).float_value() == 2.5);
  CHECK(Term::atom("hello").is_atom(Symbol("hello")));
  CHECK(Term::object(12).object_id() == 12);
  CHECK(Term().empty());
  CHECK(Symbol("abc") == Symbol("abc"));
  CHECK(Symbol("abc").name() == "abc");
}

TEST_CASE("compound terms expose functor and arguments") {
  Term t = Term::compound("point", {Term::integer(1), Term::integer(2)});
  CHECK(t.is_compound(Symbol("point"), 2));
  CHECK(t.arity() == 2);
  CHECK(t.arg(1).int_value() == 2);
  CHECK(t.is_ground_fast());
  Term v = Term::compound("f", {Term::fresh_var()});
  CHECK_FALSE(v.is_ground_fast());
}

TEST_CASE("reader and writer round-trip") {
  for (std::string_view text :
       {"foo(bar,[1,2,3|T])", "a:-b,c;d->e", "- 1", "-(1)", "1-2-3", "1-(2-3)", "'hello world'",
        "[]", "'[]'", "{a,b}", "\"str\"", "@nil", "@42", "f(- a)", "a=..b", "\\+a",
        "x:y:z", "(a:-b):-c", "- (-1)", "0.5", "f(;)"}) {
    CAPTURE(text);
    Term once = parse(text);
    Term twice = parse(show(once));
    CHECK(is_variant(twice, once));
  }
}

TEST_CASE("writer output") {
  CHECK(show(parse("f(a, 'A b', [1,2])")) == "f(a,'A b',[1,2])");
  CHECK(show(parse("'A b'")) == "'A b'");
  CHECK(show(parse("[a|b]")) == "[a|b]");
  CHECK(show(parse("1+2*3")) == "1+2*3");
  CHECK(show(parse("(1+2)*3")) == "(1+2)*3");
  CHECK(show(parse("@nil")) == "@nil");
  CHECK(show(Term::object(5)) == "@5");
  CHECK(show(parse("a:->b")) == "a :-> b");
  CHECK(show(parse("'don''t'")) == "'don\\'t'");
}

TEST_CASE("syntax errors are reported with a line") {
  CHECK_THROWS_AS(parse("f(a"), SyntaxError);
  CHECK_THROWS_AS(parse("a b"), SyntaxError);
  try {
    OperatorTable ops = OperatorTable::standard();
    Reader r("a.\nb(.\n", ops);
    r.next();
    r.next();
    FAIL("no error");
  } catch (const SyntaxError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("reader names variables in order of first appearance") {
  ReadTerm r = parse_term("f(X, _, Y, X, _Z)");
  REQUIRE(r.variables.size() == 3);
  CHECK(r.variables[0].first == "X");
  CHECK(r.variables[1].first == "Y");
  CHECK(r.variables[2].first == "_Z");
}

TEST_CASE("standard order of terms") {
  Term v = Term::fresh_var();
  CHECK(compare_terms(v, Term::integer(0)) < 0);
  CHECK(compare_terms(Term::integer(3), Term::atom("a")) < 0);
  CHECK(compare_terms(Term::atom("a"), Term::object(1)) < 0);
  CHECK(compare_terms(Term::object(1), parse("f(a)")) < 0);
  CHECK(compare_terms(parse("f(b)"), parse("g(a)")) < 0);
  CHECK(compare_terms(parse("f(a,b)"), parse("g(a)")) > 0);  // arity first
  CHECK(compare_terms(Term::real(1.0), Term::integer(1)) < 0);
  CHECK(terms_equal(parse("f(a,[1])"), parse("f(a,[1])")));
}

TEST_CASE("copy_term renames variables and keeps sharing") {
  ReadTerm r = parse_term("f(X, g(X, Y), Y)");
  Term c = copy_term(r.term);
  CHECK(is_variant(c, r.term));
  const Term& cx = c.arg(0).deref();
  CHECK(cx.is_var());
  CHECK(cx.node() != r.variables[0].second.deref().node());
  CHECK(c.arg(1).arg(0).deref().node() == cx.node());
}

TEST_CASE("variants require a bijection") {
  CHECK(is_variant(parse("f(X,Y)"), parse("f(A,B)")));
  CHECK_FALSE(is_variant(parse("f(X,X)"), parse("f(A,B)")));
  CHECK_FALSE(is_variant(parse("f(X,Y)"), parse("f(A,A)")));
  CHECK_FALSE(is_variant(parse("f(a)"), parse("f(A)")));
}

TEST_CASE("term_variables walks depth-first, left to right") {
  ReadTerm r = parse_term("f(g(Y, X), Z, Y)");
  std::vector<Term> vars;
  term_variables(r.term, vars);
  REQUIRE(vars.size() == 3);
  CHECK(vars[0].deref().node() == r.variables[0].second.deref().node());
  CHECK(vars[1].deref().node() == r.variables[1].second.deref().node());
}

TEST_CASE("unification with and without occurs check") {
  Trail trail;
  ReadTerm a = parse_term("f(X, b)");
  ReadTerm b = parse_term("f(a, Y)");
  CHECK(unify(a.term, b.term, trail));
  CHECK(show(resolve_bindings(a.term)) == "f(a,b)");
  trail.undo_to(0);
  CHECK(a.variables[0].second.deref().is_var());

  ReadTerm c = parse_term("X = f(X)");
  CHECK_FALSE(unify(c.term.arg(0), c.term.arg(1), trail, true));
  CHECK(unify(c.term.arg(0), c.term.arg(1), trail, false));
  CHECK(is_cyclic(c.term.arg(0)));
  CHECK_THROWS_AS(copy_term(c.term.arg(0)), CyclicTermError);
}

TEST_CASE("failed unification leaves no bindings") {
  Trail trail;
  ReadTerm r = parse_term("f(X, Y, a) = f(1, 2, b)");
  CHECK_FALSE(unify(r.term.arg(0), r.term.arg(1), trail));
  CHECK(r.variables[0].second.deref().is_var());
  CHECK(r.variables[1].second.deref().is_var());
}

TEST_CASE("records are frame-independent copies") {
  RecordStore store;
  ReadTerm r = parse_term("data(X, [1,2], X)");
  RecordId id = store.record(r.term);
  CHECK(store.live_count() == 1);
  Term a = store.replay(id), b = store.replay(id);
  CHECK(is_variant(a, r.term));
  CHECK(a.arg(0).deref().node() != b.arg(0).deref().node());
  CHECK(a.arg(0).deref().node() == a.arg(2).deref().node());
  store.erase(id);
  CHECK_FALSE(store.live(id));
  CHECK(store.destroyed_total() == 1);
  CHECK_THROWS(store.replay(id));
}

TEST_CASE("record size limit") {
  RecordStore store(5);
  CHECK_THROWS_AS(store.record(parse("f(a,b,c,d,e,g,h)")), ResourceError);
  CHECK(store.live_count() == 0);
}

TEST_CASE("term references die with their frame") {
  FrameStack frames;
  FrameId outer = frames.open();
  TermRef a = frames.put(parse("x(1)"));
  FrameId inner = frames.open();
  TermRef b = frames.put(parse("y"));
  CHECK_THROWS_AS(frames.close(outer), FrameOrderError);
  frames.close(inner);
  CHECK_FALSE(frames.valid(b));
  CHECK_THROWS_AS(frames.get(b), StaleReferenceError);
  CHECK(show(frames.get(a)) == "x(1)");

  RecordStore store;
  RecordId rec = copy_to_record(store, frames, a);
  frames.close(outer);
  FrameGuard g(frames);
  TermRef back = record_to_term(store, rec, frames, g.id());
  CHECK(show(frames.get(back)) == "x(1)");
}
