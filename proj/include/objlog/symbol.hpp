#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

namespace objlog {

// Interned atom name. The table is global and append-only; two symbols are
// equal iff their ids are equal.
class Symbol {
 public:
  constexpr Symbol() = default;
  explicit Symbol(std::string_view name);

  static constexpr Symbol from_id(std::uint32_t id) {
    Symbol s;
    s.id_ = id;
    return s;
  }

  constexpr std::uint32_t id() const { return id_; }
  std::string_view name() const;
  std::string str() const { return std::string(name()); }

  friend constexpr bool operator==(Symbol a, Symbol b) = default;
  friend constexpr auto operator<=>(Symbol a, Symbol b) = default;

 private:
  std::uint32_t id_ = 0;
};

// Number of symbols currently interned (grows monotonically).
std::size_t symbol_count();

// Well-known atoms with fixed ids. The order here must match the order in
// which the atom table pre-interns them (see symbol.cpp).
#define OBJLOG_WELL_KNOWN_ATOMS(X)                      \
  X(nil, "[]")                                          \
  X(dot, ".")                                           \
  X(comma, ",")                                         \
  X(semicolon, ";")                                     \
  X(arrow, "->")                                        \
  X(soft_arrow, "*->")                                  \
  X(neck, ":-")                                         \
  X(query, "?-")                                        \
  X(bar, "|")                                           \
  X(curly, "{}")                                        \
  X(cut, "!")                                           \
  X(true_, "true")                                      \
  X(fail, "fail")                                       \
  X(false_, "false")                                    \
  X(not_provable, "\\+")                                \
  X(call, "call")                                       \
  X(colon, ":")                                         \
  X(at, "@")                                            \
  X(minus, "-")                                         \
  X(plus, "+")                                          \
  X(slash, "/")                                         \
  X(equals, "=")                                        \
  X(catch_, "catch")                                    \
  X(throw_, "throw")                                    \
  X(findall, "findall")                                 \
  X(forall, "forall")                                   \
  X(not_, "not")                                        \
  X(once, "once")                                       \
  X(ignore, "ignore")                                   \
  X(error, "error")                                     \
  X(user, "user")                                       \
  X(system, "system")                                   \
  X(pce_principal, "pce_principal")                     \
  X(send_arrow, ":->")                                  \
  X(get_arrow, ":<-")                                   \
  X(doc_sep, "::")                                      \
  X(send, "send")                                       \
  X(get, "get")                                         \
  X(send_super, "send_super")                           \
  X(get_super, "get_super")                             \
  X(send_class, "send_class")                           \
  X(get_class, "get_class")                             \
  X(send_implementation, "send_implementation")         \
  X(get_implementation, "get_implementation")           \
  X(initialise, "initialise")                           \
  X(end_of_file, "end_of_file")                         \
  X(prolog, "prolog")                                   \
  X(any, "any")                                         \
  X(int_, "int")                                        \
  X(float_, "float")                                    \
  X(atom, "atom")                                       \
  X(object, "object")                                   \
  X(both, "both")                                       \
  X(none, "none")                                       \
  X(type_error, "type_error")                           \
  X(instantiation_error, "instantiation_error")         \
  X(existence_error, "existence_error")                 \
  X(permission_error, "permission_error")               \
  X(evaluation_error, "evaluation_error")               \
  X(resource_error, "resource_error")                   \
  X(syntax_error, "syntax_error")                       \
  X(representation_error, "representation_error")       \
  X(context, "context")                                 \
  X(procedure, "procedure")                             \
  X(callable, "callable")                               \
  X(dollar_var, "$VAR")

namespace atoms {
namespace detail {
enum : std::uint32_t {
#define OBJLOG_ENUM(id, text) id,
  OBJLOG_WELL_KNOWN_ATOMS(OBJLOG_ENUM)
#undef OBJLOG_ENUM
  count
};
}  // namespace detail

#define OBJLOG_CONST(id, text) \
  inline constexpr Symbol id = Symbol::from_id(detail::id);
OBJLOG_WELL_KNOWN_ATOMS(OBJLOG_CONST)
#undef OBJLOG_CONST
}  // namespace atoms

}  // namespace objlog

template <>
struct std::hash<objlog::Symbol> {
  std::size_t operator()(objlog::Symbol s) const noexcept {
    return std::hash<std::uint32_t>{}(s.id());
  }
};
