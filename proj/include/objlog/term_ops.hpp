#pragma once

#include <cstddef>
#include <limits>
#include <unordered_map>
#include <vector>

#include "objlog/term.hpp"

namespace objlog {

// Standard order of terms: Var < Number < Atom < ObjRef < Compound.
// Returns <0, 0 or >0.
int compare_terms(const Term& a, const Term& b);

// Structural identity (==): no bindings are made.
bool terms_equal(const Term& a, const Term& b);

// Equal up to a consistent, bijective renaming of variables.
bool is_variant(const Term& a, const Term& b);

struct CopyOptions {
  // Raises ResourceError("record_size") when the copy would exceed it.
  std::size_t node_limit = std::numeric_limits<std::size_t>::max();
  // Ground compound subterms are immutable and may be shared.
  bool share_ground = true;
};

// Copies t with fresh variables. Sharing inside t is preserved (a variable
// or compound occurring twice maps to one copy). Cyclic terms raise
// CyclicTermError. var_map, when given, receives the old->new mapping for
// unbound variables.
Term copy_term(const Term& t, const CopyOptions& options = {},
               std::unordered_map<const VarNode*, Term>* var_map = nullptr);

// Unbound variables of t in depth-first, left-to-right order, each once.
void term_variables(const Term& t, std::vector<Term>& out);

// True if following bindings from t can reach t's own structure again.
bool is_cyclic(const Term& t);

}  // namespace objlog
