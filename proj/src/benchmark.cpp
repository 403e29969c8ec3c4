#include "objlog/benchmark.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <sstream>

namespace objlog {

namespace {

using Clock = std::chrono::steady_clock;

const Symbol kLoop("bench_loop");

// Seconds for one run of bench_loop(n, Goal) with O bound to receiver.
double time_loop(Engine& engine, const Term& goal, const Term& receiver_var, const Term& receiver,
                 std::size_t n) {
  Term run = Term::compound(atoms::comma,
                            {Term::compound(atoms::equals, {receiver_var, receiver}),
                             Term::compound(kLoop, {Term::integer(std::int64_t(n)), goal})});
  auto start = Clock::now();
  bool ok = engine.once(run);
  double s = std::chrono::duration<double>(Clock::now() - start).count();
  if (!ok) throw Error("benchmark goal failed: " + term_to_string(goal));
  return s;
}

}  // namespace

const BenchCase* BenchReport::find(std::string_view goal) const {
  for (const BenchCase& c : cases)
    if (c.goal == goal) return &c;
  return nullptr;
}

std::string BenchReport::text() const {
  std::ostringstream os;
  char buf[160];
  os << "iterations per batch: " << iterations << ", batches: " << batches << " (fastest taken), warm-up: " << warmup
     << '\n';
  std::snprintf(buf, sizeof buf, "empty loop: %.4f us per iteration (included below)\n", calibration_micros);
  os << buf;
  std::snprintf(buf, sizeof buf, "%-34s %-6s %10s %10s %8s\n", "goal", "class", "time (us)", "net (us)", "ratio");
  os << buf;
  for (const BenchCase& c : cases) {
    std::snprintf(buf, sizeof buf, "%-34s %-6s %10.4f %10.4f %8.2f\n", c.goal.c_str(), c.cls.c_str(), c.micros,
                  c.net_micros, c.ratio);
    os << buf;
  }
  std::snprintf(buf, sizeof buf, "total: %.2f s\n", seconds);
  os << buf;
  return os.str();
}

BenchReport run_benchmarks(Runtime& rt, std::size_t iterations, std::size_t batches) {
  if (iterations == 0) throw Error("iterations must be positive");
  if (batches == 0) throw Error("batches must be positive");
  auto wall = Clock::now();
  Engine& engine = rt.engine();
  if (!engine.is_defined(atoms::user, kLoop, 2) || !rt.compiler().has_facts(Symbol("bench"))) {
    LoadReport r = rt.load_demo("bench");
    if (!r.ok()) throw Error("cannot load the bench example: " + r.errors.front());
  }

  auto make = [&](const char* spec) {
    Term x = Term::fresh_var();
    ReadTerm rt_spec = parse_term(spec, engine.ops());
    if (!engine.once(Term::compound("new", {x, rt_spec.term})))
      throw Error(std::string("cannot create ") + spec);
    ObjectId id = rt.object_of(x);
    rt.kernel().lock(id);
    return id;
  };
  ObjectId area = make("area(0, 0, 10, 10)");
  ObjectId bench = make("bench");

  struct Spec {
    const char* goal;
    const char* cls;
    ObjectId receiver;
  };
  const Spec specs[] = {
      {"send(O, normalise)", "area", area},
      {"send(O, x, 1)", "area", area},
      {"send(O, noarg)", "bench", bench},
      {"send(O, intarg, 1)", "bench", bench},
      {"send(O, termarg, hello(world))", "bench", bench},
  };

  // Batches are interleaved across cases so that drift in machine speed
  // affects every case alike.
  struct Run {
    Term goal, var, receiver;
    std::vector<double> times;
  };
  std::vector<Run> runs;
  {
    Term var = Term::fresh_var();
    runs.push_back({Term::atom(atoms::true_), var, Term::integer(0), {}});
  }
  for (const Spec& s : specs) {
    ReadTerm g = parse_term(s.goal, engine.ops());
    runs.push_back({g.term, g.variables.at(0).second, Term::object(s.receiver), {}});
  }
  for (Run& r : runs) time_loop(engine, r.goal, r.var, r.receiver, iterations);  // warm-up
  for (std::size_t b = 0; b < batches; ++b)
    for (Run& r : runs) r.times.push_back(time_loop(engine, r.goal, r.var, r.receiver, iterations));
  auto per_call = [&](const Run& r) { return *std::min_element(r.times.begin(), r.times.end()) / double(iterations) * 1e6; };

  BenchReport report;
  report.iterations = iterations;
  report.batches = batches;
  report.calibration_micros = per_call(runs.front());
  for (std::size_t i = 0; i < std::size(specs); ++i) {
    const Spec& s = specs[i];
    double t = per_call(runs[i + 1]);
    std::string label = s.goal;
    label.replace(label.find('O'), 1, std::string("@") + (s.receiver == area ? "A" : "B"));
    report.cases.push_back({label, s.cls, t, std::max(t - report.calibration_micros, 0.0), 0});
  }
  double base = report.cases.front().micros;
  for (BenchCase& c : report.cases) c.ratio = base > 0 ? c.micros / base : 0;

  rt.kernel().unlock(area);
  rt.kernel().unlock(bench);
  report.seconds = std::chrono::duration<double>(Clock::now() - wall).count();
  return report;
}

}  // namespace objlog
