#pragma once

// Interactive and batch query driver printing results as
//
//     ?- new(P, picture), get(P, visible, V).
//     P = @4,
//     V = @5.

#include <functional>
#include <iosfwd>
#include <string_view>

#include "objlog/runtime.hpp"

namespace objlog {

class Toplevel {
 public:
  enum class Outcome { success, failure, error };

  Toplevel(Runtime& runtime, std::ostream& out);

  // Consulted after each solution that leaves alternatives; returning true
  // asks for the next one. Unset means the first solution only.
  void set_more(std::function<bool()> more) { more_ = std::move(more); }
  // Echo each query as "?- Query." before its answer.
  void set_echo(bool echo) noexcept { echo_ = echo; }

  // Runs one query (the terminating '.' is optional). Bindings made by the
  // query are undone afterwards; objects it creates remain.
  Outcome run(std::string_view query);
  // :objects, :stats, :classes, :audit, :help. False for anything else.
  bool meta(std::string_view line);
  // Reads queries from in until end of input or halt/0,1. Returns the
  // process status: 0 when the last query succeeded, 1 on failure, 2 on
  // error, or the halt code.
  int repl(std::istream& in, bool prompt);

 private:
  void print_error(const Term& ball);

  Runtime& rt_;
  std::ostream& out_;
  std::function<bool()> more_;
  bool echo_ = false;
};

}  // namespace objlog
