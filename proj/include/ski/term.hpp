#pragma once

// Applicative terms of combinatory logic: atoms, variables and binary
// application. Terms are immutable and structurally shared.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace ski {

enum class Atom : std::uint8_t { S, K, B, I, J, L, M };

char atom_char(Atom a);
std::optional<Atom> atom_from_char(char c);
// Number of arguments the atom's contraction rule consumes.
int atom_arity(Atom a);

class Term {
 public:
  enum class Kind : std::uint8_t { Atom, Var, App };

  static Term atom(Atom a);
  static Term var(std::uint32_t index);
  static Term app(const Term& left, const Term& right);

  Kind kind() const { return node_->kind; }
  bool is_atom() const { return kind() == Kind::Atom; }
  bool is_var() const { return kind() == Kind::Var; }
  bool is_app() const { return kind() == Kind::App; }

  Atom atom_value() const { return node_->atom; }
  std::uint32_t var_index() const { return node_->var; }
  Term left() const { return Term(node_->left); }
  Term right() const { return Term(node_->right); }

  std::size_t hash() const { return node_->hash; }
  // Number of leaves (atoms plus variables).
  std::size_t leaves() const { return node_->leaves; }

  friend bool operator==(const Term& a, const Term& b);
  friend bool operator!=(const Term& a, const Term& b) { return !(a == b); }
  // Structural total order, used for deterministic containers.
  friend bool operator<(const Term& a, const Term& b);

 private:
  struct Node {
    Kind kind;
    Atom atom = Atom::S;
    std::uint32_t var = 0;
    std::shared_ptr<const Node> left, right;
    std::size_t hash = 0;
    std::size_t leaves = 1;
  };
  explicit Term(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

struct TermHash {
  std::size_t operator()(const Term& t) const { return t.hash(); }
};

// Left-associated application of head to args.
Term apply(Term head, const std::vector<Term>& args);

// Head symbol and argument list of the application spine.
struct Spine {
  Term head;
  std::vector<Term> args;
};
Spine spine(const Term& t);

Term parse_term(std::string_view text);

enum class PrintStyle { Minimal, Full };
std::string print_term(const Term& t, PrintStyle style = PrintStyle::Minimal);

nlohmann::json term_to_json(const Term& t);
Term term_from_json(const nlohmann::json& j);

struct TermStats {
  std::size_t size = 0;
  std::size_t s_count = 0;
  std::size_t k_count = 0;
  std::size_t var_count = 0;
  friend bool operator==(const TermStats&, const TermStats&) = default;
};
TermStats term_stats(const Term& t);

bool is_closed(const Term& t);
// True when every atom is S or K (no variables).
bool is_sk_combinator(const Term& t);
bool is_s_only(const Term& t);
std::uint32_t smallest_unused_var(const Term& t);

// Derived combinators written over S and K.
Term stdlib_lookup(std::string_view name);
std::vector<std::string> stdlib_names();
// Replaces the atoms B, I, L, M by their S/K definitions.
Term expand_derived(const Term& t);

// Every member of CL(S) with at most max_leaves leaves, grouped by leaf count.
std::vector<Term> enumerate_s_terms(std::size_t max_leaves);
// Every closed term over {S, K} with exactly n leaves.
std::vector<Term> enumerate_sk_terms(std::size_t leaves);

}  // namespace ski
