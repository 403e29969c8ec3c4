// objlog: consult files, run a goal or an interactive session, or run the
// call-overhead benchmark.

#include <unistd.h>

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "objlog/benchmark.hpp"
#include "objlog/toplevel.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Logic engine with an embedded object system"};
  std::vector<std::string> consult, demos;
  std::string goal;
  bool bench = false, occurs_check = false, trace = false, eager = false, echo = false;
  std::size_t iterations = 100'000;
  app.add_option("--consult,-c", consult, "Consult FILE before anything else (repeatable)");
  app.add_option("--demo", demos, "Load a bundled example: my_box, my_node, bench, choice (repeatable)");
  app.add_option("--goal,-g", goal, "Run GOAL once and exit: status 0 success, 1 failure, 2 error");
  app.add_flag("--bench", bench, "Run the call-overhead benchmark");
  app.add_option("--iterations", iterations, "Calls per benchmark batch")->check(CLI::PositiveNumber);
  app.add_flag("--occurs-check", occurs_check, "Unify with occurs check");
  app.add_flag("--trace", trace, "Trace predicate calls on standard error");
  app.add_flag("--eager", eager, "Realize compiled classes at load time instead of on first use");
  app.add_flag("--echo", echo, "Echo each query before its answer");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  objlog::RuntimeOptions options;
  options.eager = eager;
  options.occurs_check = occurs_check;
  options.trace = trace;
  objlog::Runtime rt(options);
  rt.engine().set_output(std::cout);

  try {
    bool load_failed = false;
    for (const std::string& d : demos) load_failed |= !rt.load_demo(d).ok();
    for (const std::string& f : consult) load_failed |= !rt.consult_file(f).ok();

    if (bench) {
      objlog::BenchReport report = objlog::run_benchmarks(rt, iterations);
      std::cout << report.text();
      return 0;
    }
    objlog::Toplevel top(rt, std::cout);
    top.set_echo(echo);
    if (!goal.empty()) {
      switch (top.run(goal)) {
        case objlog::Toplevel::Outcome::success:
          return 0;
        case objlog::Toplevel::Outcome::failure:
          return 1;
        case objlog::Toplevel::Outcome::error:
          return 2;
      }
    }
    bool interactive = isatty(STDIN_FILENO) != 0;
    if (interactive) {
      // A line starting with ';' asks for the next answer.
      top.set_more([] {
        std::string reply;
        if (!std::getline(std::cin, reply)) return false;
        std::size_t i = reply.find_first_not_of(" \t");
        return i != std::string::npos && reply[i] == ';';
      });
    }
    int status = top.repl(std::cin, interactive);
    return load_failed && status == 0 ? 2 : status;
  } catch (const objlog::HaltRequest& h) {
    std::cout.flush();
    return h.code;
  } catch (const std::exception& e) {
    std::cerr << "objlog: " << e.what() << '\n';
    return 2;
  }
}
