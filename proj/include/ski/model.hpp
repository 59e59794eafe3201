#pragma once

// The graph model: elements of the universe G (naturals and pairs
// alpha -> b of a finite set and an element), canonical finite sets, and
// the application M . N on sets.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "ski/term.hpp"

namespace ski {

class GSet;
namespace detail {
struct ElemNode;
}

class GElem {
 public:
  static GElem nat(std::uint64_t value);
  static GElem arrow(GSet antecedent, GElem consequent);

  bool is_nat() const;
  bool is_arrow() const { return !is_nat(); }
  std::uint64_t nat_value() const;
  const GSet& antecedent() const;
  const GElem& consequent() const;

  std::size_t hash() const;
  // Least n with the element in G_n.
  std::size_t rank() const;
  // Largest natural occurring anywhere in the element, 0 if none.
  std::uint64_t max_nat() const;

  friend int compare(const GElem& a, const GElem& b);
  friend bool operator==(const GElem& a, const GElem& b) { return compare(a, b) == 0; }
  friend bool operator!=(const GElem& a, const GElem& b) { return compare(a, b) != 0; }
  friend bool operator<(const GElem& a, const GElem& b) { return compare(a, b) < 0; }

 private:
  explicit GElem(std::shared_ptr<const detail::ElemNode> n) : n_(std::move(n)) {}
  std::shared_ptr<const detail::ElemNode> n_;
};

struct GElemHash {
  std::size_t operator()(const GElem& e) const { return e.hash(); }
};

// Finite subset of G, stored sorted and duplicate-free.
class GSet {
 public:
  GSet() = default;
  GSet(std::vector<GElem> elems);  // canonicalizes
  GSet(std::initializer_list<GElem> elems) : GSet(std::vector<GElem>(elems)) {}

  const std::vector<GElem>& elems() const { return elems_; }
  std::size_t size() const { return elems_.size(); }
  bool empty() const { return elems_.empty(); }
  auto begin() const { return elems_.begin(); }
  auto end() const { return elems_.end(); }
  const GElem& operator[](std::size_t i) const { return elems_[i]; }

  bool contains(const GElem& e) const;
  bool subset_of(const GSet& other) const;
  GSet unite(const GSet& other) const;

  std::size_t hash() const;
  friend int compare(const GSet& a, const GSet& b);
  friend bool operator==(const GSet& a, const GSet& b) { return compare(a, b) == 0; }
  friend bool operator!=(const GSet& a, const GSet& b) { return compare(a, b) != 0; }
  friend bool operator<(const GSet& a, const GSet& b) { return compare(a, b) < 0; }

 private:
  std::vector<GElem> elems_;
};

namespace detail {
struct ElemNode {
  bool arrow = false;
  std::uint64_t value = 0;
  GSet antecedent;
  std::optional<GElem> consequent;
  std::size_t hash = 0;
  std::size_t rank = 0;
  std::uint64_t max_nat = 0;
};
}  // namespace detail

inline bool GElem::is_nat() const { return !n_->arrow; }
inline std::uint64_t GElem::nat_value() const { return n_->value; }
inline const GSet& GElem::antecedent() const { return n_->antecedent; }
inline const GElem& GElem::consequent() const { return *n_->consequent; }
inline std::size_t GElem::hash() const { return n_->hash; }
inline std::size_t GElem::rank() const { return n_->rank; }
inline std::uint64_t GElem::max_nat() const { return n_->max_nat; }

std::uint64_t max_nat(const GSet& s);

// Text form: naturals as digits, arrows as "({e1,e2} -> e)", "{}" for the
// empty set. The parser also accepts the arrow sign U+21A3 and U+2205.
std::string to_text(const GElem& e);
std::string to_text(const GSet& s);
GElem parse_elem(std::string_view text);
GSet parse_set(std::string_view text);

nlohmann::json to_json(const GElem& e);
nlohmann::json to_json(const GSet& s);
GElem elem_from_json(const nlohmann::json& j);
GSet set_from_json(const nlohmann::json& j);

// Direct pattern-membership tests for the denotations of K and S.
bool member_k(const GElem& e);
bool member_s(const GElem& e);

struct Bounds {
  std::size_t max_rank = 3;
  std::size_t max_set_size = 2;
  std::uint64_t max_nat = 1;
  std::size_t max_arity = 2;
};

// Canonical elements within the bounds, in canonical order. Sizes grow
// very quickly with max_rank; callers keep the bounds small.
std::vector<GElem> enumerate_g(std::size_t max_rank, std::size_t max_set_size,
                               std::uint64_t max_nat);

// The bounded universe split by rank: level r holds every element of rank <= r.
class Universe {
 public:
  explicit Universe(const Bounds& b);
  const Bounds& bounds() const { return bounds_; }
  const std::vector<GElem>& upto(std::size_t rank) const;
  bool contains(const GElem& e) const;

 private:
  Bounds bounds_;
  mutable std::vector<std::vector<GElem>> levels_;
};

// Subsets of `pool` with at most max_size elements (including the empty set).
std::vector<GSet> subsets_upto(const std::vector<GElem>& pool, std::size_t max_size);

// Operand of the application: an explicit set, the denotation of a closed
// {S,K} term, or an application of two operands.
struct SetExpr;
using SetExprPtr = std::shared_ptr<const SetExpr>;
struct SetExpr {
  struct Apply {
    SetExprPtr fn, arg;
  };
  std::variant<GSet, Term, Apply> node;

  static SetExprPtr ext(GSet s);
  static SetExprPtr denotation(Term t);
  static SetExprPtr apply(SetExprPtr f, SetExprPtr a);
};

struct BoundedSet {
  GSet set;
  // Set when the exact result may contain elements beyond the bounds.
  bool truncated = false;
};

// { s : exists finite alpha subset of N with (alpha -> s) in M }.
BoundedSet bullet(const SetExprPtr& m, const SetExprPtr& n, const Bounds& bounds);
BoundedSet bullet(const GSet& m, const GSet& n);
BoundedSet eval_setexpr(const SetExprPtr& x, const Bounds& bounds);

}  // namespace ski
