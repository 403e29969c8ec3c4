#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "objlog/errors.hpp"
#include "objlog/term.hpp"

namespace objlog {

enum class OpType { xfx, xfy, yfx, fy, fx, xf, yf };

struct OpDef {
  int priority = 0;
  OpType type = OpType::xfx;
};

class OperatorTable {
 public:
  // Standard table plus the class-definition operators (:->, :<-, ::) and
  // the object-reference prefix @.
  static OperatorTable standard();

  // Priority 0 removes the definition.
  void add(int priority, OpType type, Symbol name);

  std::optional<OpDef> prefix(Symbol name) const;
  std::optional<OpDef> infix(Symbol name) const;
  std::optional<OpDef> postfix(Symbol name) const;
  bool is_op(Symbol name) const;

 private:
  std::unordered_map<Symbol, OpDef> prefix_, infix_, postfix_;
};

class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& message, int line)
      : Error(message + " (line " + std::to_string(line) + ")"), message_(message), line_(line) {}
  const std::string& message() const { return message_; }
  int line() const { return line_; }

 private:
  std::string message_;
  int line_;
};

struct ReadTerm {
  Term term;
  // Named variables in order of first appearance; "_" is never listed.
  std::vector<std::pair<std::string, Term>> variables;
  int line = 1;
};

// Reads clause-terms terminated by ". " from program text.
class Reader {
 public:
  Reader(std::string_view text, const OperatorTable& ops);

  // nullopt at end of input. Throws SyntaxError; call recover() to skip the
  // rest of the offending clause before reading on.
  std::optional<ReadTerm> next();
  void recover();
  int line() const { return line_; }

 // Implementation details, opaque outside syntax.cpp.
  struct Token;
  class Parser;

 private:

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  bool at_end_ = false;  // the last next() read through its full stop
  const OperatorTable& ops_;
};

// Parses a single term; the trailing full stop is optional.
ReadTerm parse_term(std::string_view text, const OperatorTable& ops);
ReadTerm parse_term(std::string_view text);

struct WriteOptions {
  bool quoted = false;
  const OperatorTable* ops = nullptr;  // nullptr: standard table
  std::size_t max_depth = 10000;
  // Names for specific variables (used by the toplevel).
  const std::vector<std::pair<std::string, Term>>* var_names = nullptr;
};

std::string term_to_string(const Term& t, const WriteOptions& options = {});
inline std::string quoted(const Term& t) {
  WriteOptions o;
  o.quoted = true;
  return term_to_string(t, o);
}
// Atom text with quotes added where the reader would need them.
std::string quote_atom_if_needed(std::string_view name);

}  // namespace objlog
