#pragma once

#include <bit>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "objlog/symbol.hpp"

namespace objlog {

// Intrusive, non-atomic reference counted base. Reclamation is iterative so
// dropping the last reference to a very long list or continuation chain
// cannot exhaust the C++ stack.
class RcNode {
 public:
  RcNode() = default;
  RcNode(const RcNode&) = delete;
  RcNode& operator=(const RcNode&) = delete;

  void retain() noexcept { ++refs_; }
  void release() noexcept {
    if (--refs_ == 0) reclaim(this);
  }
  std::uint32_t use_count() const noexcept { return refs_; }

 protected:
  virtual ~RcNode() = default;
  // Frees the node's storage. Overridden by nodes with trailing storage.
  virtual void dispose() noexcept { delete this; }

 private:
  static void reclaim(RcNode* node) noexcept;
  std::uint32_t refs_ = 0;
};

template <class T>
class Ref {
 public:
  Ref() noexcept = default;
  Ref(std::nullptr_t) noexcept {}
  explicit Ref(T* p) noexcept : p_(p) {
    if (p_) p_->retain();
  }
  Ref(const Ref& o) noexcept : p_(o.p_) {
    if (p_) p_->retain();
  }
  Ref(Ref&& o) noexcept : p_(std::exchange(o.p_, nullptr)) {}
  ~Ref() {
    if (p_) p_->release();
  }
  Ref& operator=(Ref o) noexcept {
    std::swap(p_, o.p_);
    return *this;
  }

  T* get() const noexcept { return p_; }
  T* operator->() const noexcept { return p_; }
  T& operator*() const noexcept { return *p_; }
  explicit operator bool() const noexcept { return p_ != nullptr; }
  friend bool operator==(const Ref& a, const Ref& b) { return a.p_ == b.p_; }

 private:
  T* p_ = nullptr;
};

template <class T, class... Args>
Ref<T> make_ref(Args&&... args) {
  return Ref<T>(new T(std::forward<Args>(args)...));
}

enum class Tag : std::uint8_t {
  Empty,     // no term (unbound marker inside variables, unset env slots)
  Var,       // logic variable, possibly bound
  Int,
  Float,
  Atom,
  Compound,
  Obj,       // object reference @N
  Slot,      // clause-template variable placeholder; never seen by clients
};

class VarNode;
class CompoundNode;

class Term {
 public:
  Term() noexcept { u_.i = 0; }
  Term(const Term& o) noexcept : tag_(o.tag_), aux_(o.aux_), u_(o.u_) {
    if (holds_node()) u_.p->retain();
  }
  Term(Term&& o) noexcept : tag_(o.tag_), aux_(o.aux_), u_(o.u_) {
    o.tag_ = Tag::Empty;
    o.u_.i = 0;
  }
  Term& operator=(const Term& o) noexcept {
    if (o.holds_node()) o.u_.p->retain();
    drop();
    tag_ = o.tag_;
    aux_ = o.aux_;
    u_ = o.u_;
    return *this;
  }
  Term& operator=(Term&& o) noexcept {
    if (this != &o) {
      drop();
      tag_ = o.tag_;
      aux_ = o.aux_;
      u_ = o.u_;
      o.tag_ = Tag::Empty;
      o.u_.i = 0;
    }
    return *this;
  }
  ~Term() { drop(); }

  static Term integer(std::int64_t v) {
    Term t(Tag::Int);
    t.u_.i = v;
    return t;
  }
  static Term real(double v) {
    Term t(Tag::Float);
    t.u_.f = v;
    return t;
  }
  static Term atom(Symbol s) {
    Term t(Tag::Atom);
    t.aux_ = s.id();
    return t;
  }
  static Term atom(std::string_view name) { return atom(Symbol(name)); }
  static Term object(std::int64_t id) {
    Term t(Tag::Obj);
    t.u_.i = id;
    return t;
  }
  static Term slot(std::uint32_t index) {
    Term t(Tag::Slot);
    t.aux_ = index;
    return t;
  }
  static Term fresh_var();
  static Term compound(Symbol functor, std::span<const Term> args);
  static Term compound(Symbol functor, std::vector<Term>&& args);
  static Term compound(Symbol functor, std::initializer_list<Term> args) {
    return compound(functor, std::span<const Term>(args.begin(), args.size()));
  }
  static Term compound(std::string_view functor, std::initializer_list<Term> args) {
    return compound(Symbol(functor), args);
  }

  Tag tag() const noexcept { return tag_; }
  bool empty() const noexcept { return tag_ == Tag::Empty; }

  // Follows variable bindings until an unbound variable or a non-variable.
  const Term& deref() const noexcept;

  // Predicates below look at this cell only; call deref() first when the
  // term may be a bound variable.
  bool is_var() const noexcept { return tag_ == Tag::Var; }
  bool is_int() const noexcept { return tag_ == Tag::Int; }
  bool is_float() const noexcept { return tag_ == Tag::Float; }
  bool is_number() const noexcept { return is_int() || is_float(); }
  bool is_atom() const noexcept { return tag_ == Tag::Atom; }
  bool is_atom(Symbol s) const noexcept { return is_atom() && aux_ == s.id(); }
  bool is_compound() const noexcept { return tag_ == Tag::Compound; }
  bool is_compound(Symbol f, std::uint32_t n) const noexcept;
  bool is_object() const noexcept { return tag_ == Tag::Obj; }
  bool is_slot() const noexcept { return tag_ == Tag::Slot; }
  bool is_atomic() const noexcept {
    return tag_ == Tag::Int || tag_ == Tag::Float || tag_ == Tag::Atom || tag_ == Tag::Obj;
  }
  bool is_callable() const noexcept { return is_atom() || is_compound(); }

  std::int64_t int_value() const noexcept { return u_.i; }
  double float_value() const noexcept { return u_.f; }
  std::int64_t object_id() const noexcept { return u_.i; }
  std::uint32_t slot_index() const noexcept { return aux_; }
  // Atom name or compound functor.
  Symbol symbol() const noexcept;
  std::uint32_t arity() const noexcept;
  const Term& arg(std::uint32_t i) const noexcept;
  std::span<const Term> args() const noexcept;

  VarNode* var_node() const noexcept { return reinterpret_cast<VarNode*>(u_.p); }
  CompoundNode* compound_node() const noexcept {
    return reinterpret_cast<CompoundNode*>(u_.p);
  }
  // Identity of the heap node (variables and compounds), nullptr otherwise.
  const RcNode* node() const noexcept { return holds_node() ? u_.p : nullptr; }

  // True when the term provably contains no variables (cached per node).
  bool is_ground_fast() const noexcept;
  // Node count, saturating; variables count as one node without following
  // bindings.
  std::uint32_t size_hint() const noexcept;

 private:
  explicit Term(Tag t) noexcept : tag_(t) { u_.i = 0; }
  bool holds_node() const noexcept { return tag_ == Tag::Var || tag_ == Tag::Compound; }
  void drop() noexcept {
    if (holds_node()) u_.p->release();
  }

  Tag tag_ = Tag::Empty;
  std::uint32_t aux_ = 0;
  union {
    std::int64_t i;
    double f;
    RcNode* p;
  } u_;

  friend class CompoundNode;
};

static_assert(sizeof(Term) == 16);

class VarNode final : public RcNode {
 public:
  VarNode() : stamp_(next_stamp_++) {}

  bool bound() const noexcept { return !value_.empty(); }
  const Term& value() const noexcept { return value_; }
  std::uint64_t stamp() const noexcept { return stamp_; }

  // Raw binding; use Trail::bind so the change can be undone.
  void set(Term t) noexcept { value_ = std::move(t); }
  void reset() noexcept { value_ = Term(); }

  // Stamp the next variable will receive. Choicepoints record this value;
  // variables with a smaller stamp are older than the choicepoint.
  static std::uint64_t peek_stamp() noexcept { return next_stamp_; }

 private:
  Term value_;
  std::uint64_t stamp_;
  static inline std::uint64_t next_stamp_ = 1;
};

class CompoundNode final : public RcNode {
 public:
  static CompoundNode* allocate(Symbol functor, std::uint32_t arity);

  Symbol functor() const noexcept { return functor_; }
  std::uint32_t arity() const noexcept { return arity_; }
  Term* args() noexcept { return reinterpret_cast<Term*>(this + 1); }
  const Term* args() const noexcept { return reinterpret_cast<const Term*>(this + 1); }
  bool ground() const noexcept { return ground_; }
  bool has_slot() const noexcept { return has_slot_; }
  std::uint32_t size() const noexcept { return size_; }

  // Computes cached flags once the arguments are in place.
  void seal() noexcept;

 private:
  CompoundNode(Symbol f, std::uint32_t n) : functor_(f), arity_(n) {}
  ~CompoundNode() override;
  void dispose() noexcept override;

  Symbol functor_;
  std::uint32_t arity_;
  std::uint32_t size_ = 1;
  bool ground_ = false;
  bool has_slot_ = false;
};

static_assert(sizeof(CompoundNode) % alignof(Term) == 0);

inline const Term& Term::deref() const noexcept {
  const Term* t = this;
  while (t->tag_ == Tag::Var) {
    const Term& v = t->var_node()->value();
    if (v.empty()) break;
    t = &v;
  }
  return *t;
}

inline Term Term::fresh_var() {
  Term t(Tag::Var);
  t.u_.p = new VarNode();
  t.u_.p->retain();
  return t;
}

inline bool Term::is_compound(Symbol f, std::uint32_t n) const noexcept {
  return is_compound() && compound_node()->functor() == f && compound_node()->arity() == n;
}

inline Symbol Term::symbol() const noexcept {
  if (tag_ == Tag::Compound) return compound_node()->functor();
  return Symbol::from_id(aux_);
}

inline std::uint32_t Term::arity() const noexcept {
  return tag_ == Tag::Compound ? compound_node()->arity() : 0;
}

inline const Term& Term::arg(std::uint32_t i) const noexcept { return compound_node()->args()[i]; }

inline std::span<const Term> Term::args() const noexcept {
  if (tag_ != Tag::Compound) return {};
  return {compound_node()->args(), compound_node()->arity()};
}

inline bool Term::is_ground_fast() const noexcept {
  switch (tag_) {
    case Tag::Int:
    case Tag::Float:
    case Tag::Atom:
    case Tag::Obj:
      return true;
    case Tag::Compound:
      return compound_node()->ground();
    default:
      return false;
  }
}

inline std::uint32_t Term::size_hint() const noexcept {
  return tag_ == Tag::Compound ? compound_node()->size() : 1;
}

// Atom-level helpers.
inline bool same_float(double a, double b) noexcept {
  return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
}

// Builds [e1, e2, ... | tail].
Term make_list(std::span<const Term> elems, Term tail = Term::atom(atoms::nil));
Term make_list(std::initializer_list<Term> elems);
// Collects the elements of a proper list. Returns false for partial or
// improper lists.
bool list_to_vector(const Term& list, std::vector<Term>& out);

}  // namespace objlog
