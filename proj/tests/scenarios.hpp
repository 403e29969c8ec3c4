#pragma once

// The example suite: query transcripts over the bundled demos, shared by
// the unit tests and the acceptance binary. Object ids and generated
// variable names differ between runs and are normalized before comparing.

#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "objlog/runtime.hpp"
#include "objlog/toplevel.hpp"

namespace objlog::testing {

struct Step {
  std::string query;
  std::string expected;  // printed output, ids normalized, no trailing newline
};

struct Scenario {
  std::string name;
  std::vector<std::string> demos;
  std::vector<Step> steps;
};

inline std::string normalize_ids(const std::string& text) {
  static const std::regex ids(R"(@[0-9]+)");
  static const std::regex vars(R"(_G[0-9]+)");
  return std::regex_replace(std::regex_replace(text, ids, "@N"), vars, "_G");
}

inline const std::vector<Scenario>& example_suite() {
  static const std::vector<Scenario> suite = {
      {"new box",
       {},
       {{"new(X, box(100,100))", "X = @N."},
        {"new(X, box(100,100)), get(X, width, W), get(X, height, H)",
         "X = @N,\nW = 100,\nH = 100."}}},
      {"picture display",
       {},
       {{"new(P, picture), send(P, display(box(100,50), point(20,20)))", "P = @N."},
        {"new(P, picture), send(P, display(box(100,50), point(20,20))), scene_dump(P)",
         "box@N pos=(20,20) fill=nil\nP = @N."},
        {"new(P, picture), send(P, display, box(1,2), point(3,4)), get(P, count, N)",
         "P = @N,\nN = 1."}}},
      {"visible area",
       {},
       {{"new(P, picture), get(P, visible, Visible), get(Visible, x, X)",
         "P = @N,\nVisible = @N,\nX = 0."}}},
      {"free",
       {},
       {{"new(X, box(100,100)), free(X)", "X = @N."},
        {"new(X, box(100,100)), free(X), send(X, width, 3)",
         "Error: existence_error(object,@N) (object @N has been freed)"},
        {"free(@nil)", "Error: permission_error(free,object,@nil) (object @nil cannot be freed)"}}},
      {"prolog object",
       {},
       {{"send(@prolog, writeln('Hello World'))", "Hello World\ntrue."},
        {"send(@prolog, format('~w-~w~n', [a, b]))", "a-b\ntrue."},
        {"send(@prolog, fail)", "false."}}},
      {"button message",
       {},
       {{"new(B, button(hello, message(@prolog, call, writeln, 'Hello World')))", "B = @N."},
        {"new(B, button(hello, message(@prolog, call, writeln, 'Hello World'))), "
         "pump_event(B, button_down)",
         "Hello World\nB = @N."},
        {"new(M, message(@prolog, call, writeln, hi)), send(M, execute)", "hi\nM = @N."}}},
      {"my_box events",
       {"my_box"},
       {{"new(B, my_box(100,100)), pump_event(B, area_enter), get(B, fill_pattern, F), "
         "get(F, name, N)",
         "B = @N,\nF = @N,\nN = red."},
        {"new(B, my_box(100,100)), pump_event(B, area_enter), pump_event(B, area_exit), "
         "get(B, fill_pattern, F)",
         "B = @N,\nF = @nil."},
        {"new(B, my_box(100,100)), pump_event(B, area_enter), pump_event(B, keyboard), "
         "get(B, fill_pattern, F), get(F, name, N)",
         "B = @N,\nF = @N,\nN = red."},
        {"new(P, picture), new(B, my_box(10,10)), send(P, display(B, point(1,2))), "
         "pump_event(B, area_enter), scene_dump(P)",
         "my_box@N pos=(1,2) fill=red\nP = @N,\nB = @N."}}},
      {"my_node tree",
       {"my_node"},
       {{"new(T, my_node(node(a, d(1), [node(b, d(2), []), node(c, f(X), [])]))), "
         "get(T, son_count, C), get(T, data, D)",
         "T = @N,\nC = 2,\nD = d(1)."},
        {"new(T, my_node(node(a, d(1), [node(b, d(2), []), node(c, f(X), [])]))), "
         "get(T, son, 2, S), get(S, label, L), get(L, string, Name), get(S, data, SD)",
         "T = @N,\nS = @N,\nL = @N,\nName = c,\nSD = f(_G)."},
        {"new(T, my_node(node(r, 0, [node(x, 1, [node(y, 2, [])])]))), get(T, son, 1, S), "
         "get(S, son, 1, S2), get(S2, label, L), get(L, string, Name), get(S2, data, D)",
         "T = @N,\nS = @N,\nS2 = @N,\nL = @N,\nName = y,\nD = 2."}}},
      {"pure methods",
       {"choice"},
       {{"new(C, chooser), findall(X, send(C, pick([a,b,c], X)), L)",
         "C = @N,\nL = [a,b,c]."},
        {"new(C, chooser), findall(X, send(C, choose([a,b,c], X)), L)",
         "C = @N,\nL = [a]."}}},
  };
  return suite;
}

// Toplevel answer to one query, ids normalized, no trailing newline.
inline std::string answer(Runtime& rt, std::string_view query) {
  std::ostringstream os;
  std::ostream& saved = rt.engine().out();
  rt.engine().set_output(os);
  Toplevel top(rt, os);
  top.run(query);
  rt.engine().set_output(saved);
  std::string text = normalize_ids(os.str());
  while (!text.empty() && text.back() == '\n') text.pop_back();
  return text;
}

// Runs every step of sc in rt; returns the normalized output per step.
inline std::vector<std::string> run_scenario(Runtime& rt, const Scenario& sc) {
  for (const auto& d : sc.demos) rt.load_demo(d);
  std::vector<std::string> out;
  for (const auto& step : sc.steps) out.push_back(answer(rt, step.query));
  return out;
}

}  // namespace objlog::testing
