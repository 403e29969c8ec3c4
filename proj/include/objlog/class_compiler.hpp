#pragma once

// Classes written in logic code. Between :- pce_begin_class(Name, Super)
// and :- pce_end_class(Name) the compiler turns method clauses
//
//     sel(Self, Arg:Type, ...) :-> Body.      (send method)
//     sel(Self, Arg:Type, ..., Result:Type) :<- Body.   (get method)
//
// into pce_principal:send_implementation/3 and get_implementation/4
// clauses keyed by the method id 'Class->sel' / 'Class<-sel', plus fact
// tables from which the kernel class is realized on first use.

#include <set>

#include "objlog/engine.hpp"
#include "objlog/kernel.hpp"

namespace objlog {

class ClassCompiler {
 public:
  ClassCompiler(Engine& engine, Kernel& kernel);
  ClassCompiler(const ClassCompiler&) = delete;
  ClassCompiler& operator=(const ClassCompiler&) = delete;

  // Registers the expansion hook, the class resolver and the
  // pce_realize_class/1 builtin.
  void install();

  // Eager mode realizes each class as soon as its region ends.
  void set_eager(bool eager) noexcept { eager_ = eager; }
  bool eager() const noexcept { return eager_; }

  // Builds the kernel class from the fact tables (and its super chain).
  // Returns the existing class when already realized, nullptr without facts.
  Class* realize(Symbol name);
  // Realizes every class that has facts.
  void realize_all();
  bool has_facts(Symbol name);
  // Classes with facts, in definition order.
  std::vector<Symbol> compiled_classes();

  // Translates one method clause of class cls; returns the implementation
  // clause and the pce_method/7 fact.
  struct Translation {
    Term clause;
    Term fact;
  };
  static Translation translate(const Term& method_clause, Symbol cls, Symbol super);
  // Body rewriting alone: send_super/get_super become send_class/get_class
  // on super, spread send/get calls are folded into message terms.
  static Term rewrite_body(const Term& body, Symbol super);

  static TypeSpec type_of(const Term& type);

 private:
  std::optional<std::vector<Term>> expand(const Term& t);
  void patch(Symbol name);
  std::vector<std::vector<Term>> facts(std::string_view name, std::vector<Term> pattern);
  std::vector<Method> method_facts(Symbol name);

  Engine& engine_;
  Kernel& kernel_;
  bool eager_ = false;

  struct Region {
    Symbol name, super;
    int line = 0;
    std::set<Symbol> logic_selectors, pure;
  };
  std::optional<Region> region_;
  // Eager mode: classes whose super was not yet defined at the end of
  // their region; realized when the load finishes.
  std::vector<Symbol> deferred_;
  std::set<Symbol> realizing_;
};

}  // namespace objlog
