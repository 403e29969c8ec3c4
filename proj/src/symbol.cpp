#include "objlog/symbol.hpp"

#include <deque>
#include <unordered_map>

namespace objlog {
namespace {

class AtomTable {
 public:
  AtomTable() {
#define OBJLOG_INTERN(id, text) intern(text);
    OBJLOG_WELL_KNOWN_ATOMS(OBJLOG_INTERN)
#undef OBJLOG_INTERN
  }

  std::uint32_t intern(std::string_view name) {
    if (auto it = index_.find(name); it != index_.end()) return it->second;
    // deque keeps element addresses stable, so the string_view keys stay valid
    names_.emplace_back(name);
    auto id = static_cast<std::uint32_t>(names_.size() - 1);
    index_.emplace(std::string_view(names_.back()), id);
    return id;
  }

  std::string_view name(std::uint32_t id) const { return names_[id]; }
  std::size_t size() const { return names_.size(); }

 private:
  std::deque<std::string> names_;
  std::unordered_map<std::string_view, std::uint32_t> index_;
};

AtomTable& table() {
  static AtomTable t;
  return t;
}

}  // namespace

Symbol::Symbol(std::string_view name) : id_(table().intern(name)) {}

std::string_view Symbol::name() const { return table().name(id_); }

std::size_t symbol_count() { return table().size(); }

}  // namespace objlog
