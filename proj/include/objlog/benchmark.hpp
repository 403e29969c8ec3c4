#pragma once

// Call-overhead benchmark over native (area) and logic-defined (bench)
// methods. Each case runs a logic loop and reports the fastest of several
// batches per call, loop included; the empty loop is timed separately.
// Taking the fastest batch filters out interference from other processes.

#include <string>
#include <vector>

#include "objlog/runtime.hpp"

namespace objlog {

struct BenchCase {
  std::string goal;   // as printed, e.g. send(@A, x, 1)
  std::string cls;    // receiver class
  double micros = 0;      // per call, driving loop included
  double net_micros = 0;  // micros minus the empty loop, >= 0
  double ratio = 0;   // micros / micros of the first case
};

struct BenchReport {
  std::size_t iterations = 0;  // calls per batch
  std::size_t batches = 0;     // measured batches (fastest taken)
  std::size_t warmup = 1;      // discarded batches per case
  double calibration_micros = 0;  // empty loop, per iteration
  double seconds = 0;             // wall time of the whole run
  std::vector<BenchCase> cases;

  const BenchCase* find(std::string_view goal) const;
  std::string text() const;
};

// Loads the bench example when needed. iterations must be positive.
BenchReport run_benchmarks(Runtime& rt, std::size_t iterations = 100'000, std::size_t batches = 15);

}  // namespace objlog
