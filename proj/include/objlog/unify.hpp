#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "objlog/term.hpp"

namespace objlog {

// Records variable bindings so they can be undone on backtracking.
//
// Trailing is conditional: a binding is recorded only when the variable is
// older than the newest choicepoint (its stamp is below choice_stamp()).
// Without an engine the stamp is "infinite" and every binding is trailed.
class Trail {
 public:
  using Mark = std::size_t;

  Mark mark() const noexcept { return entries_.size(); }
  std::size_t size() const noexcept { return entries_.size(); }

  void bind(VarNode* var, Term value) {
    if (var->stamp() < choice_stamp_) entries_.push_back(Entry{Ref<VarNode>(var), 0, 0});
    var->set(std::move(value));
  }

  // Undoes every entry above mark, newest first.
  void undo_to(Mark mark);
  // Drops entries above mark without undoing them.
  void truncate(Mark mark) { entries_.resize(mark); }
  // After a cut: removes variable entries above mark whose variable was
  // created at or after stamp; backtracking can no longer reach them.
  void tidy(Mark mark, std::uint64_t stamp);

  // Non-variable entries; undo invokes on_undo(code, payload).
  void push_custom(std::uint32_t code, std::uint64_t payload) {
    entries_.push_back(Entry{Ref<VarNode>(), code, payload});
  }
  std::function<void(std::uint32_t, std::uint64_t)> on_undo;

  std::uint64_t choice_stamp() const noexcept { return choice_stamp_; }
  void set_choice_stamp(std::uint64_t s) noexcept { choice_stamp_ = s; }

 private:
  struct Entry {
    Ref<VarNode> var;
    std::uint32_t code;
    std::uint64_t payload;
  };
  std::vector<Entry> entries_;
  std::uint64_t choice_stamp_ = std::numeric_limits<std::uint64_t>::max();
};

// Most general unification. On success all bindings are on the trail
// (subject to conditional trailing); on failure no binding survives.
bool unify(const Term& a, const Term& b, Trail& trail, bool occurs_check = false);

// True if var occurs in t (after dereferencing).
bool occurs_in(const VarNode* var, const Term& t);

}  // namespace objlog
