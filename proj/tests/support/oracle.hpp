#pragma once

// Independent membership oracle for denotations of closed {S,K} terms.
//
// Works directly from the definitions of [[K]] and [[S]] and the
// application M . N = {s : alpha finite subset of N, (alpha -> s) in M},
// splitting on the head of the application spine:
//   K             definition
//   K A           {(∅ -> x) : x in [[A]]}
//   K A B C..     [[A C ..]]                      (K . M . N = M)
//   S             definition
//   S A           P -> (σ -> s) with τ -> (cons P -> s) in [[A]], τ ∪ ants P = σ
//   S A B         σ -> s with τ -> (R -> s) in [[A]], each r in R has some
//                 (β -> r) in [[B]] with β ⊆ σ
//   S A B C ..    [[A C (B C) ..]]                 (S . M . N . L = M . L . (N . L))
// Only `S A B` is not exact: R ranges over subsets of a finite candidate
// pool built from the target element plus a small bounded universe.

#include <map>
#include <string>
#include <tuple>

#include "ski/model.hpp"
#include "ski/term.hpp"

namespace oracle {

struct Limits {
  std::size_t max_r_set = 2;     // |R| in the S A B case
  std::size_t pool_depth = 1;    // rounds of arrow building over sub-elements
  std::uint64_t extra_nats = 1;  // naturals above the target's largest
  // Every element of enumerate_g(universe_rank, 1, 1) also joins the pool.
  std::size_t universe_rank = 2;
};

class Oracle {
 public:
  explicit Oracle(Limits l = {});
  bool member(const ski::Term& t, const ski::GElem& e);
  std::size_t calls() const { return calls_; }

 private:
  bool member_spine(const ski::Term& head, const std::vector<ski::Term>& args, const ski::GElem& e);
  bool sab(const ski::Term& a, const ski::Term& b, const ski::GElem& e);
  std::vector<ski::GElem> pool(const ski::GElem& e);

  Limits limits_;
  std::size_t calls_ = 0;
  std::map<std::pair<std::string, std::string>, bool> memo_;
  std::vector<ski::GElem> universe_;
};

// Literal membership tests for the two base denotations.
bool in_k(const ski::GElem& e);
bool in_s(const ski::GElem& e);

}  // namespace oracle
