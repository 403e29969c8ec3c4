#include "doctest.h"
#include "objlog/runtime.hpp"
#include "scenarios.hpp"

using namespace objlog;
using objlog::testing::answer;

TEST_CASE("new/2 creates instances from class terms") {
  Runtime rt;
  CHECK(answer(rt, "new(X, point), get(X, x, A), get(X, y, B)") == "X = @N,\nA = 0,\nB = 0.");
  CHECK(answer(rt, "new(X, point(1)), get(X, x, A), get(X, y, B)") == "X = @N,\nA = 1,\nB = 0.");
  CHECK(answer(rt, "new(X, box(100,100)), get(X, class_name, C)") == "X = @N,\nC = box.");
}

TEST_CASE("new/2 errors") {
  Runtime rt;
  CHECK(answer(rt, "new(X, foo)") == "Error: existence_error(class,foo) (unknown class foo)");
  CHECK(answer(rt, "new(X, point(1,2,3))") ==
        "Error: arity_error(initialise,2,3) (method initialise expects 2 argument(s), got 3)");
  CHECK(answer(rt, "new(X, point(a,2))") == "Error: type_error('[int]',a) (expected [int], found a)");
  CHECK(answer(rt, "new(@3, point)") == "Error: uninstantiation_error(@N)");
  CHECK(answer(rt, "new(X, 42)").rfind("Error: type_error(", 0) == 0);
}

TEST_CASE("send/2 and get/3 accept compound and spread messages") {
  Runtime rt;
  CHECK(answer(rt, "new(X, point(1,2)), send(X, x(5)), send(X, y, 6), get(X, x, A), get(X, y, B)") ==
        "X = @N,\nA = 5,\nB = 6.");
  CHECK(answer(rt, "new(N, node(text(a))), send(N, son(node(text(b)))), get(N, son(1), S), "
                   "get(N, son, 1, S)") == "N = @N,\nS = @N.");
}

TEST_CASE("receiver errors") {
  Runtime rt;
  CHECK(answer(rt, "send(3, foo)") == "Error: type_error(object,3)");
  CHECK(answer(rt, "send(X, foo)") == "Error: instantiation_error");
  CHECK(answer(rt, "send(@9999, foo)") == "Error: existence_error(object,@N) (no object @N)");
  CHECK(answer(rt, "new(X, point), send(X, nonexistent)") ==
        "Error: existence_error(method,(point -> nonexistent)) (no send method nonexistent for class point)");
  CHECK(answer(rt, "send(@nil, foo)") ==
        "Error: existence_error(method,(constant -> foo)) (no send method foo for class constant)");
}

TEST_CASE("results convert to terms") {
  Runtime rt;
  CHECK(answer(rt, "new(B, box(1,2)), get(B, fill_pattern, F)") == "B = @N,\nF = @nil.");
  CHECK(answer(rt, "new(C, colour(red)), get(C, name, N)") == "C = @N,\nN = red.");
  CHECK(answer(rt, "new(B, box(1,2)), get(B, position, P), get(P, x, X)") == "B = @N,\nP = @N,\nX = 0.");
  CHECK(answer(rt, "new(B, box(1,2)), get(B, width, 1)") == "B = @N.");
  CHECK(answer(rt, "new(B, box(1,2)), get(B, width, 2)") == "false.");
}

TEST_CASE("type errors on arguments") {
  Runtime rt;
  CHECK(answer(rt, "new(B, box(1,2)), send(B, fill_pattern(point(1,1)))") ==
        "Error: type_error('[colour]',@N) (expected [colour], found @N)");
  CHECK(answer(rt, "new(A, area(1,2,3,4)), send(A, width, 2.5)") ==
        "Error: type_error(int,2.5) (expected int, found 2.5)");
  // The instance made for the rejected argument does not survive.
  std::size_t before = rt.kernel().live_count();
  answer(rt, "new(B, box(1,2)), free(B), send(@nil, foo)");
  answer(rt, "new(B, box(1,2)), catch(send(B, fill_pattern(point(1,1))), _, true), free(B)");
  CHECK(rt.kernel().live_count() == before);
}

TEST_CASE("a failing compound argument makes the send fail") {
  Runtime rt;
  rt.consult_string(R"(
:- pce_begin_class(picky, object).
initialise(_P, N:int) :-> N > 0.
:- pce_end_class(picky).
)");
  CHECK(answer(rt, "new(X, picky(1))") == "X = @N.");
  CHECK(answer(rt, "new(X, picky(0))") == "false.");
  std::size_t before = rt.kernel().instance_count(Symbol("picky"));
  CHECK(answer(rt, "new(P, picture), send(P, display(picky(0)))") == "false.");
  CHECK(rt.kernel().instance_count(Symbol("picky")) == before);
}

TEST_CASE("free/1") {
  Runtime rt;
  CHECK(answer(rt, "new(X, point(1,2)), free(X), object(X)") == "false.");
  CHECK(answer(rt, "free(@nil)") == "Error: permission_error(free,object,@nil) (object @nil cannot be freed)");
  CHECK(answer(rt, "free(@prolog)") ==
        "Error: permission_error(free,object,@prolog) (object @prolog cannot be freed)");
  CHECK(answer(rt, "new(X, box(1,1)), free(X), free(X)") ==
        "Error: existence_error(object,@N) (object @N has been freed)");
  CHECK(answer(rt, "new(X, box(1,1)), free(X), get(X, width, W)") ==
        "Error: existence_error(object,@N) (object @N has been freed)");
}

TEST_CASE("object/1 and references") {
  Runtime rt;
  CHECK(answer(rt, "object(@nil)") == "true.");
  CHECK(answer(rt, "object(foo)") == "false.");
  CHECK(answer(rt, "object(@prolog)") == "true.");
  CHECK(answer(rt, "new(X, point), send(X, lock), get(X, references, R)") == "X = @N,\nR = 2.");
}

TEST_CASE("@prolog forwards sends to predicates") {
  Runtime rt;
  CHECK(answer(rt, "send(@prolog, writeln('Hello World'))") == "Hello World\ntrue.");
  CHECK(answer(rt, "send(@prolog, member(X, [a,b]))") == "X = a.");
  CHECK(answer(rt, "send(@prolog, fail)") == "false.");
  CHECK(answer(rt, "send(@prolog, nonexistent_pred)") ==
        "Error: existence_error(procedure,nonexistent_pred/0)");
  CHECK(answer(rt, "catch(send(@prolog, throw(my_error)), E, true)") == "E = my_error.");
  CHECK(answer(rt, "send(@prolog, call, format, '~w~n', [x])") == "x\ntrue.");
  CHECK(answer(rt, "get(@prolog, class_name, C)") == "C = prolog.");
  CHECK(rt.bridge().stats().callbacks >= 4);
}

TEST_CASE("send_class and get_class start the search at a class") {
  Runtime rt;
  rt.load_demo("my_box");
  CHECK(answer(rt, "new(B, my_box(1,1)), send_class(B, box, event(event(area_enter))), "
                   "get(B, fill_pattern, F)") == "B = @N,\nF = @nil.");
  CHECK(answer(rt, "new(B, my_box(1,1)), get_class(B, box, width, W)") == "B = @N,\nW = 1.");
}

TEST_CASE("value conversion") {
  Runtime rt;
  Bridge& b = rt.bridge();
  Ledger ledger;
  auto v = b.to_value(Term::real(2.5), TypeSpec::of(TypeSpec::Kind::Float), ledger);
  REQUIRE(v);
  CHECK(quoted(b.to_term(*v)) == "2.5");
  auto w = b.to_value(parse_term("point(1,2)").term, TypeSpec::any(), ledger);
  REQUIRE(w);
  CHECK(rt.kernel().is_instance(w->object_id(), Symbol("point")));
  CHECK(quoted(b.to_term(Value::nil())) == "@nil");
  CHECK(quoted(b.to_term(Value::atom(Symbol("x y")))) == "'x y'");
  CHECK(quoted(b.to_term(Value::object(b.prolog_object()))) == "@prolog");
  CHECK(b.object_of(parse_term("@nil").term) == rt.kernel().nil_id());
  CHECK_THROWS(b.object_of(Term::atom("nil")));
  rt.host().post_call(ledger);
}

TEST_CASE("bindings made by a send are kept by the caller") {
  Runtime rt;
  rt.consult_string(R"(
:- pce_begin_class(binder, object).
bind(_B, T:prolog) :-> T = bound(here).
:- pce_end_class(binder).
)");
  CHECK(answer(rt, "new(B, binder), send(B, bind(X))") == "B = @N,\nX = bound(here).");
  CHECK(answer(rt, "new(B, binder), (send(B, bind(X)), fail ; var(X))") == "B = @N.");
  CHECK(rt.host().live_wrappers() == 0);
}

TEST_CASE("errors raised inside a method reach the caller") {
  Runtime rt;
  rt.consult_string(R"(
:- pce_begin_class(thrower, object).
boom(_T) :-> throw(kaboom).
nested(T) :-> send(T, boom).
:- pce_end_class(thrower).
)");
  CHECK(answer(rt, "new(T, thrower), catch(send(T, nested), E, true)") == "T = @N,\nE = kaboom.");
  CHECK(rt.kernel().audit().ok());
  CHECK(rt.frames().depth() == 0);
}
