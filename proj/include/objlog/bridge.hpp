#pragma once

// The bridge between the logic engine and the object kernel: new/2,
// send/2, get/3 and free/1, data conversion in both directions, the
// @prolog proxy object and dispatch of methods implemented in logic code.

#include <optional>
#include <vector>

#include "objlog/engine.hpp"
#include "objlog/host_data.hpp"
#include "objlog/kernel.hpp"
#include "objlog/store.hpp"

namespace objlog {

struct BridgeStats {
  std::uint64_t calls = 0;           // bridge predicate calls
  std::uint64_t logic_dispatches = 0;  // methods run through send/get_implementation
  std::uint64_t callbacks = 0;       // @prolog calls
};

class Bridge {
 public:
  static const Symbol kPrologClass;  // class of @prolog

  Bridge(Engine& engine, Kernel& kernel, HostData& host, FrameStack& frames);
  Bridge(const Bridge&) = delete;
  Bridge& operator=(const Bridge&) = delete;

  // Registers the bridge predicates in the engine.
  void install();

  // Term -> kernel value for a parameter of type spec. Compound terms
  // become new instances (held in the innermost scope) unless the type is
  // prolog, in which case they are wrapped. Returns nullopt when creating
  // an instance from a compound term fails.
  std::optional<Value> to_value(const Term& t, const TypeSpec& spec, Ledger& ledger);
  // Kernel value -> term. Wrapped terms are presented as the term itself.
  Term to_term(const Value& v);

  // Object named by @N or @name. Throws for anything else.
  ObjectId object_of(const Term& ref);
  Term object_term(ObjectId id) const;

  // Creates an instance from Class or Class(Args...).
  std::optional<ObjectId> instantiate(const Term& spec, Ledger& ledger);

  const BridgeStats& stats() const noexcept { return stats_; }
  ObjectId prolog_object() const noexcept { return prolog_; }

  // Error term for a kernel fault.
  Term error_term(const Error& e) const;

 private:
  friend struct CallScope;
  bool pl_new(CallContext& c);
  bool pl_send(CallContext& c, const Term& receiver, const Term& message, std::optional<Symbol> start);
  bool pl_get(CallContext& c, const Term& receiver, const Term& message, const Term& result,
              std::optional<Symbol> start);
  bool pl_free(CallContext& c);

  bool dispatch_logic(Invocation& inv);
  bool callback(Invocation& inv, Symbol predicate, std::size_t first_arg);
  std::optional<Value> result_value(const Term& t, const TypeSpec& spec);

  Engine& engine_;
  Kernel& kernel_;
  HostData& host_;
  FrameStack& frames_;
  ObjectId prolog_ = 0;
  BridgeStats stats_;
};

}  // namespace objlog
