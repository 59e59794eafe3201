#pragma once

// B0-based elements, the B_mu substitution and the companion of a member of
// the denotation of an S-only combinator.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "ski/model.hpp"
#include "ski/template.hpp"
#include "ski/term.hpp"

namespace ski {

GElem b0();
GElem b_mu(std::uint64_t mu);

struct B0BaseDecomposition {
  std::vector<GSet> prefix;
  std::size_t depth = 0;
};

std::optional<B0BaseDecomposition> b0_base(const GElem& e);
GElem rebuild(const B0BaseDecomposition& d, const GElem& core);
GElem substitute_mu(const GElem& e, std::uint64_t mu);
std::uint64_t choose_mu(const GElem& e);

enum class CompanionCase { I, II };
std::string case_name(CompanionCase c);

struct CompanionCandidate {
  CompanionCase which;
  std::string variable;  // the replaced template variable
  std::string binding;   // text of the match it came from
  GElem value;
};

struct CompanionResult {
  GElem companion;  // first candidate in match order
  CompanionCase which;
  std::vector<CompanionCandidate> candidates;
  // Distinct companion values over all matches.
  std::vector<GElem> distinct;
  bool ambiguous() const { return distinct.size() > 1; }
};

// Throws PreconditionError (not S-only, not a member, no B0-base, mu too
// small) or NoCaseApplies.
CompanionResult companion_detail(const Term& sigma, const GElem& e, std::uint64_t mu);
GElem companion(const Term& sigma, const GElem& e, std::uint64_t mu);

struct ClosureRecord {
  Term sigma;
  GElem element;
  std::uint64_t mu = 0;
  CompanionResult result;
  // Every distinct companion value is again a member.
  bool member = false;
};

ClosureRecord closure_record(const Term& sigma, const GElem& e);
bool check_companion_closure(const Term& sigma, const GElem& e);

// One JSON line: {sigma, element, mu, case, companion, member}.
nlohmann::json to_json(const ClosureRecord& r);

}  // namespace ski
