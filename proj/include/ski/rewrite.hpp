#pragma once

// One-step contraction for S, K, B, I, J, L, M and bounded reduction.

#include <cstddef>
#include <string>
#include <vector>

#include "json.hpp"
#include "ski/term.hpp"

namespace ski {

enum class Dir : std::uint8_t { Left, Right };

// Path from the root to the redex subterm (the application node that holds
// the head atom with exactly its rule's number of arguments).
using RedexPosition = std::vector<Dir>;

std::string position_to_string(const RedexPosition& p);

// All redex positions in leftmost-outermost (pre-order) order.
std::vector<RedexPosition> find_redexes(const Term& t);

// Subterm at the given position; throws NotARedex when the path leaves the tree.
Term subterm_at(const Term& t, const RedexPosition& p);

// Contracts the redex at p. Throws NotARedex if p does not address one.
Term contract(const Term& t, const RedexPosition& p);

// Contractum of a redex sitting exactly at the root of r, if r is one.
std::optional<Term> contract_root(const Term& r);

enum class Outcome { NormalForm, FuelExhausted, CycleDetected };
std::string outcome_name(Outcome o);

struct ReductionStep {
  Term term;
  RedexPosition redex;
};

struct ReductionTrace {
  std::vector<ReductionStep> steps;  // term before each contraction
  Outcome outcome = Outcome::NormalForm;
  Term final_term = Term::atom(Atom::S);
};

inline constexpr std::size_t kDefaultFuel = 10000;
inline constexpr std::size_t kDefaultWidth = 10000;

// Leftmost-outermost reduction; stops at a normal form, when fuel runs out,
// or at the first term already seen in this run.
ReductionTrace reduce(const Term& t, std::size_t fuel = kDefaultFuel);

nlohmann::json trace_to_json(const ReductionTrace& tr);

// Breadth-limited search over all redex choices. False means "not found
// within the bounds", never a proof of unreachability.
bool reduces_to(const Term& from, const Term& to, std::size_t fuel = kDefaultFuel,
                std::size_t width = kDefaultWidth);

enum class Verdict { Yes, NoWithinBounds };

// Does sigma x ->* x for a variable x not occurring in sigma?
Verdict identity_behavior(const Term& sigma, std::size_t fuel = kDefaultFuel,
                          std::size_t width = kDefaultWidth);

}  // namespace ski
