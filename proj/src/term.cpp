#include "objlog/term.hpp"

#include <new>

namespace objlog {

namespace {
bool reclaiming = false;
std::vector<RcNode*>& pending() {
  static std::vector<RcNode*> v;
  return v;
}
}  // namespace

void RcNode::reclaim(RcNode* node) noexcept {
  auto& queue = pending();
  queue.push_back(node);
  if (reclaiming) return;
  reclaiming = true;
  while (!queue.empty()) {
    RcNode* n = queue.back();
    queue.pop_back();
    // Children released by this dispose() land in the queue instead of
    // recursing.
    n->dispose();
  }
  reclaiming = false;
}

CompoundNode* CompoundNode::allocate(Symbol functor, std::uint32_t arity) {
  void* mem = ::operator new(sizeof(CompoundNode) + sizeof(Term) * arity);
  auto* node = new (mem) CompoundNode(functor, arity);
  Term* a = node->args();
  for (std::uint32_t i = 0; i < arity; ++i) new (a + i) Term();
  return node;
}

CompoundNode::~CompoundNode() {
  Term* a = args();
  for (std::uint32_t i = 0; i < arity_; ++i) a[i].~Term();
}

void CompoundNode::dispose() noexcept {
  this->~CompoundNode();
  ::operator delete(static_cast<void*>(this));
}

void CompoundNode::seal() noexcept {
  bool ground = true;
  bool has_slot = false;
  std::uint64_t size = 1;
  const Term* a = args();
  for (std::uint32_t i = 0; i < arity_; ++i) {
    const Term& t = a[i];
    switch (t.tag()) {
      case Tag::Compound:
        ground = ground && t.compound_node()->ground();
        has_slot = has_slot || t.compound_node()->has_slot();
        size += t.compound_node()->size();
        break;
      case Tag::Slot:
        has_slot = true;
        ground = false;
        size += 1;
        break;
      case Tag::Var:
      case Tag::Empty:
        ground = false;
        size += 1;
        break;
      default:
        size += 1;
        break;
    }
  }
  ground_ = ground;
  has_slot_ = has_slot;
  size_ = size > std::numeric_limits<std::uint32_t>::max()
              ? std::numeric_limits<std::uint32_t>::max()
              : static_cast<std::uint32_t>(size);
}

Term Term::compound(Symbol functor, std::span<const Term> args) {
  if (args.empty()) return atom(functor);
  CompoundNode* node = CompoundNode::allocate(functor, static_cast<std::uint32_t>(args.size()));
  Term* a = node->args();
  for (std::size_t i = 0; i < args.size(); ++i) a[i] = args[i];
  node->seal();
  Term t(Tag::Compound);
  t.u_.p = node;
  node->retain();
  return t;
}

Term Term::compound(Symbol functor, std::vector<Term>&& args) {
  if (args.empty()) return atom(functor);
  CompoundNode* node = CompoundNode::allocate(functor, static_cast<std::uint32_t>(args.size()));
  Term* a = node->args();
  for (std::size_t i = 0; i < args.size(); ++i) a[i] = std::move(args[i]);
  node->seal();
  Term t(Tag::Compound);
  t.u_.p = node;
  node->retain();
  return t;
}

Term make_list(std::span<const Term> elems, Term tail) {
  Term list = std::move(tail);
  for (auto it = elems.rbegin(); it != elems.rend(); ++it)
    list = Term::compound(atoms::dot, {*it, list});
  return list;
}

Term make_list(std::initializer_list<Term> elems) {
  return make_list(std::span<const Term>(elems.begin(), elems.size()));
}

bool list_to_vector(const Term& list, std::vector<Term>& out) {
  const Term* cur = &list.deref();
  while (cur->is_compound(atoms::dot, 2)) {
    out.push_back(cur->arg(0).deref());
    cur = &cur->arg(1).deref();
  }
  return cur->is_atom(atoms::nil);
}

}  // namespace objlog
