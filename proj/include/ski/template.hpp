#pragma once

// Symbolic templates describing the generic member of a denotation.
//
// An element pattern is a variable, a natural or an arrow (set -> elem).
// A set pattern is a set variable, the singleton {t} of an element
// variable, an explicit list, a union, or an indexed union
// Bigcup(g, body) = body_1 u ... u body_n where n is the arity of group g.
// The element family {p_i}_n is Bigcup(g, Explicit[p]).
//
// Variables and groups carry a scope: the group whose indices they vary
// over (-1 for none). Groups nest through their parent, so a group scoped
// under g has one arity per index of g.

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "ski/model.hpp"
#include "ski/term.hpp"

namespace ski {

struct TPat;
struct TSet;
using PatPtr = std::shared_ptr<const TPat>;
using SetPtr = std::shared_ptr<const TSet>;

struct TPat {
  enum class Kind : std::uint8_t { EVar, Nat, Arrow };
  Kind kind;
  int var = -1;
  std::uint64_t nat = 0;
  SetPtr set;
  PatPtr elem;

  static PatPtr evar(int id);
  static PatPtr natural(std::uint64_t k);
  static PatPtr arrow(SetPtr s, PatPtr e);
};

struct TSet {
  enum class Kind : std::uint8_t { SVar, Singleton, Explicit, Bigcup, Union };
  Kind kind;
  int var = -1;    // SVar id, or the element variable of a Singleton
  int group = -1;  // Bigcup
  std::vector<PatPtr> elems;  // Explicit
  SetPtr body;                // Bigcup
  std::vector<SetPtr> parts;  // Union

  static SetPtr svar(int id);
  static SetPtr singleton(int evar);
  static SetPtr explicit_set(std::vector<PatPtr> elems);
  static SetPtr bigcup(int group, SetPtr body);
  static SetPtr family(int group, PatPtr body) { return bigcup(group, explicit_set({std::move(body)})); }
  static SetPtr set_union(std::vector<SetPtr> parts);
};

bool pat_equal(const PatPtr& a, const PatPtr& b);
bool set_equal(const SetPtr& a, const SetPtr& b);

struct VarInfo {
  std::string name;
  int scope = -1;
};

struct GroupInfo {
  std::string name;
  int parent = -1;
  std::size_t min = 0;  // lower bound on the arity
};

struct Template {
  PatPtr root;
  std::vector<VarInfo> evars;
  std::vector<VarInfo> svars;
  std::vector<GroupInfo> groups;

  // Groups from the outermost down to g (empty for -1).
  std::vector<int> chain(int g) const;
};

enum class BaseAtom { K, S };
Template base_template(BaseAtom a);

// Template of the application of a term with template t1 to a term with
// template t2. Throws UnificationFailure (empty denotation) or
// UnsupportedShape.
Template compose(const Template& t1, const Template& t2);

// Template of a closed {S,K} term; results are cached by term structure.
Template template_of(const Term& t);

bool has_singleton_setvar(const Template& tpl);

// Human-readable form, e.g. "{t} ↣ t".
std::string to_text(const Template& tpl);
nlohmann::json to_json(const Template& tpl);
// Structural sanity: every variable sits inside the indexed unions of its
// scope chain and every referenced id is declared.
bool well_formed(const Template& tpl, std::string* why = nullptr);

// ---------------------------------------------------------------------------
// Bindings, matching, instantiation and bounded enumeration.

struct VarKey {
  int id;
  std::vector<std::uint32_t> path;  // one index per group of the scope chain
  friend auto operator<=>(const VarKey&, const VarKey&) = default;
};

struct Binding {
  std::map<VarKey, GElem> elems;
  std::map<VarKey, GSet> sets;
  std::map<VarKey, std::size_t> arities;
  friend bool operator==(const Binding&, const Binding&) = default;
};

std::string to_text(const Template& tpl, const Binding& b);

struct MatchOptions {
  // Extra indices allowed beyond the size of the matched set when a group's
  // arity is chosen.
  std::size_t arity_slack = 2;
  std::size_t max_results = 1 << 16;
};

// Every binding (one representative per set of index tuples) whose
// instantiation equals e.
std::vector<Binding> match_element(const Template& tpl, const GElem& e,
                                   const MatchOptions& opts = {});
bool member_via_template(const Template& tpl, const GElem& e, const MatchOptions& opts = {});
bool member_via_template(const Term& t, const GElem& e, const MatchOptions& opts = {});

GElem instantiate(const Template& tpl, const Binding& b);

// All instantiations inside the bounded universe.
GSet enumerate_template(const Template& tpl, const Bounds& bounds);

// The application of a denotation (given by its template) to a finite set.
BoundedSet template_apply(const Template& tpl, const GSet& arg, const Bounds& bounds);

}  // namespace ski
