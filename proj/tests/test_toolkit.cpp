#include <random>

#include "doctest.h"
#include "objlog/runtime.hpp"
#include "scenarios.hpp"

using namespace objlog;
using objlog::testing::answer;

TEST_CASE("points, colours and areas") {
  Runtime rt;
  CHECK(answer(rt, "new(P, point(3,4)), get(P, x, X), get(P, y, Y)") == "P = @N,\nX = 3,\nY = 4.");
  CHECK(answer(rt, "new(C, colour(red)), get(C, name, N)") == "C = @N,\nN = red.");
  CHECK(answer(rt, "new(A, area(5,5,-3,-2)), send(A, normalise), get(A, x, X), get(A, y, Y), "
                   "get(A, width, W), get(A, height, H)") ==
        "A = @N,\nX = 2,\nY = 3,\nW = 3,\nH = 2.");
  CHECK(answer(rt, "new(A, area(1,1,2,2)), send(A, normalise), get(A, x, X)") == "A = @N,\nX = 1.");
}

TEST_CASE("boxes keep non-negative sizes") {
  Runtime rt;
  CHECK(answer(rt, "new(B, box(-1, 2))").rfind("Error: type_error(int,-1)", 0) == 0);
  CHECK(answer(rt, "new(B, box(1,2)), send(B, width(-1))").rfind("Error: type_error(int,-1)", 0) == 0);
  CHECK(answer(rt, "new(B, box(1,2)), send(B, height(7)), get(B, height, H)") == "B = @N,\nH = 7.");
  CHECK(answer(rt, "new(B, box), get(B, width, W)") == "B = @N,\nW = 0.");
}

TEST_CASE("a fresh picture shows the origin") {
  Runtime rt;
  CHECK(answer(rt, "new(P, picture), get(P, visible, V), get(V, x, X), get(V, y, Y), get(V, width, W)") ==
        "P = @N,\nV = @N,\nX = 0,\nY = 0,\nW = 400.");
  CHECK(answer(rt, "new(P, picture(hello)), get(P, label, L)") == "P = @N,\nL = hello.");
}

TEST_CASE("display places graphicals once") {
  Runtime rt;
  CHECK(answer(rt, "new(P, picture), send(P, display(box(100,50), point(20,20))), get(P, count, N), "
                   "scene_dump(P)") == "box@N pos=(20,20) fill=nil\nP = @N,\nN = 1.");
  std::size_t boxes = rt.kernel().instance_count(Symbol("box"));
  answer(rt, "new(P, picture), send(P, display(box(1,1)))");
  CHECK(rt.kernel().instance_count(Symbol("box")) == boxes + 1);  // exactly one new box
  CHECK(answer(rt, "new(P, picture), new(B, box(1,2)), send(P, display(B, point(3,4))), "
                   "send(P, display(B, point(5,6))), get(P, count, N), scene_dump(P)") ==
        "box@N pos=(5,6) fill=nil\nP = @N,\nB = @N,\nN = 1.");
  CHECK(answer(rt, "new(P, picture), new(B, box(1,1)), send(P, display(B)), send(P, erase(B)), "
                   "get(P, count, N)") == "P = @N,\nB = @N,\nN = 0.");
  CHECK(answer(rt, "new(P, picture), new(B, box(1,1)), free(B), send(P, display(B))") ==
        "Error: existence_error(object,@N) (object @N has been freed)");
  CHECK(answer(rt, "new(P, picture), send(P, display(point(1,1)))").rfind("Error: type_error(graphical", 0) == 0);
}

TEST_CASE("displaying keeps the graphical alive") {
  Runtime rt;
  CHECK(answer(rt, "new(P, picture), send(P, display(box(1,1))), get(P, count, 1)") == "P = @N.");
  CHECK(rt.kernel().audit().ok());
  std::size_t boxes = rt.kernel().instance_count(Symbol("box"));
  CHECK(boxes == 1);
}

TEST_CASE("scene dump lists class, position and fill") {
  Runtime rt;
  rt.load_demo("my_box");
  CHECK(answer(rt, "new(P, picture), send(P, display(text(hi), point(1,2))), "
                   "new(B, box(3,3)), send(B, fill_pattern(colour(blue))), send(P, display(B)), "
                   "send(P, display(my_box(1,1), point(7,8))), scene_dump(P)") ==
        "text@N pos=(1,2) fill=nil\nbox@N pos=(0,0) fill=blue\nmy_box@N pos=(7,8) fill=nil\nP = @N,\nB = @N.");
}

TEST_CASE("a plain box accepts events without change") {
  Runtime rt;
  CHECK(answer(rt, "new(B, box(1,1)), pump_event(B, button_down), get(B, fill_pattern, F)") ==
        "B = @N,\nF = @nil.");
  CHECK(answer(rt, "new(B, box(1,1)), pump_event(B, teleport)").rfind("Error: type_error(event_kind,teleport)", 0) == 0);
  CHECK(answer(rt, "new(B, box(1,1)), pump_event(B, area_enter, 3, 4)") == "B = @N.");
}

TEST_CASE("buttons execute their message on button_down only") {
  Runtime rt;
  CHECK(answer(rt, "new(B, button(go, message(@prolog, call, writeln, pressed))), pump_event(B, button_up), "
                   "pump_event(B, button_down)") == "pressed\nB = @N.");
  CHECK(answer(rt, "new(B, button(go)), pump_event(B, button_down), get(B, message, M)") == "B = @N,\nM = @nil.");
}

TEST_CASE("posted events are delivered in order") {
  Runtime rt;
  CHECK(answer(rt, "new(A, button(a, message(@prolog, call, write, a))), "
                   "new(B, button(b, message(@prolog, call, write, b))), "
                   "post_event(B, button_down), post_event(A, button_down), post_event(B, keyboard), "
                   "post_event(B, button_down), dispatch_events(N), nl") == "bab\nA = @N,\nB = @N,\nN = 4.");
  CHECK(rt.pump().pending() == 0);
}

TEST_CASE("my_box colour follows the pointer") {
  Runtime rt;
  rt.load_demo("my_box");
  std::mt19937 rng(99);
  const char* kinds[] = {"area_enter", "area_exit", "keyboard", "button_down", "button_up"};
  for (int round = 0; round < 100; ++round) {
    std::string goal = "new(B, my_box(10,10))";
    std::string expected = "nil";  // reference: enter -> red, exit -> nil, else unchanged
    int n = 1 + static_cast<int>(rng() % 8);
    for (int i = 0; i < n; ++i) {
      std::string k = kinds[rng() % 5];
      goal += ", pump_event(B, " + k + ")";
      if (k == "area_enter") expected = "red";
      if (k == "area_exit") expected = "nil";
    }
    goal += ", get(B, fill_pattern, F), (F == @nil -> C = nil ; get(F, name, C))";
    CAPTURE(goal);
    CHECK(answer(rt, goal) == "B = @N,\nF = " + std::string(expected == "nil" ? "@nil" : "@N") +
                                  ",\nC = " + expected + ".");
  }
  CHECK(rt.kernel().audit().ok());
}

namespace {

struct Spec {
  std::string name;
  int data;
  std::vector<Spec> sons;
};

Spec random_tree(std::mt19937& rng, int depth, int& counter) {
  Spec s{"n" + std::to_string(counter++), static_cast<int>(rng() % 100), {}};
  if (depth < 3) {
    int sons = static_cast<int>(rng() % 4);
    for (int i = 0; i < sons; ++i) s.sons.push_back(random_tree(rng, depth + 1, counter));
  }
  return s;
}

std::string spec_term(const Spec& s) {
  std::string t = "node(" + s.name + ", d(" + std::to_string(s.data) + "), [";
  for (std::size_t i = 0; i < s.sons.size(); ++i) t += (i ? ", " : "") + spec_term(s.sons[i]);
  return t + "])";
}

// The same shape as printed by walk_tree/2 below.
std::string spec_shape(const Spec& s) {
  std::string t = "t(" + s.name + ",d(" + std::to_string(s.data) + "),[";
  for (std::size_t i = 0; i < s.sons.size(); ++i) t += (i ? "," : "") + spec_shape(s.sons[i]);
  return t + "])";
}

const char* kWalk = R"(
walk_tree(N, t(Name, Data, Sons)) :-
        get(N, label, L), get(L, string, Name),
        get(N, data, Data),
        get(N, son_count, C),
        findall(S, (between(1, C, I), get(N, son, I, Son), walk_tree(Son, S)), Sons).
)";

}  // namespace

TEST_CASE("trees are isomorphic to the term they were built from") {
  Runtime rt;
  rt.load_demo("my_node");
  rt.consult_string(kWalk, "walk");
  std::mt19937 rng(5);
  for (int round = 0; round < 40; ++round) {
    int counter = 0;
    Spec spec = random_tree(rng, 0, counter);
    auto before = rt.host().metrics().records_created_total;
    std::string got = answer(rt, "new(T, my_node(" + spec_term(spec) + ")), walk_tree(T, W), free(T)");
    CHECK(got == "T = @N,\nW = " + spec_shape(spec) + ".");
    CHECK(rt.host().metrics().records_created_total - before == static_cast<std::uint64_t>(counter));
  }
  CHECK(rt.kernel().instance_count(Symbol("my_node")) == 0);
  CHECK(rt.host().metrics().records_live == 0);
}

TEST_CASE("the pump from the host side") {
  Runtime rt;
  rt.load_demo("my_box");
  ObjectId box = *rt.kernel().create(Symbol("my_box"), {Value::integer(1), Value::integer(1)});
  rt.kernel().lock(box);
  EventPump& pump = rt.pump();
  pump.post(box, Symbol("area_enter"));
  pump.post(box, Symbol("keyboard"));
  CHECK(pump.pending() == 2);
  CHECK(pump.run() == 2);
  CHECK_FALSE(rt.kernel().slot(box, Symbol("fill_pattern")).is_nil());
  CHECK(pump.deliver(box, Symbol("area_exit")));
  CHECK(rt.kernel().slot(box, Symbol("fill_pattern")).is_nil());
  CHECK_THROWS(pump.post(box, Symbol("teleport")));
}
