#include "ski/companion.hpp"

#include <algorithm>

#include "ski/error.hpp"

namespace ski {

GElem b0() { return GElem::arrow(GSet{GElem::nat(0)}, GElem::nat(0)); }

GElem b_mu(std::uint64_t mu) {
  if (mu == 0) throw PreconditionError("mu must be at least 1");
  return GElem::arrow(GSet{GElem::nat(0)}, GElem::nat(mu));
}

std::optional<B0BaseDecomposition> b0_base(const GElem& e) {
  const GElem core = b0();
  B0BaseDecomposition d;
  GElem cur = e;
  while (cur != core) {
    if (!cur.is_arrow()) return std::nullopt;
    d.prefix.push_back(cur.antecedent());
    cur = cur.consequent();
  }
  d.depth = d.prefix.size();
  return d;
}

GElem rebuild(const B0BaseDecomposition& d, const GElem& core) {
  GElem cur = core;
  for (auto it = d.prefix.rbegin(); it != d.prefix.rend(); ++it) cur = GElem::arrow(*it, cur);
  return cur;
}

GElem substitute_mu(const GElem& e, std::uint64_t mu) {
  const auto d = b0_base(e);
  if (!d) throw PreconditionError("element has no B0-base: " + to_text(e));
  return rebuild(*d, b_mu(mu));
}

std::uint64_t choose_mu(const GElem& e) { return e.max_nat() + 1; }

std::string case_name(CompanionCase c) { return c == CompanionCase::I ? "i" : "ii"; }

namespace {

bool genuine_set_variables(const SetPtr& s) {
  switch (s->kind) {
    case TSet::Kind::SVar:
    case TSet::Kind::Bigcup: return true;
    case TSet::Kind::Union:
      return std::all_of(s->parts.begin(), s->parts.end(), genuine_set_variables);
    default: return false;
  }
}

// Walks the consequent spine of the template alongside the matched element
// until the B0 core is reached through a variable (case i) or as an arrow
// whose consequent variable carries the 0 (case ii).
std::optional<CompanionCandidate> classify(const Template& tpl, const Binding& b, const GElem& e,
                                           std::uint64_t mu) {
  PatPtr p = tpl.root;
  GElem x = e;
  const GElem core = b0();
  for (;;) {
    if (p->kind == TPat::Kind::EVar) {
      const VarKey key{p->var, {}};
      auto it = b.elems.find(key);
      if (it == b.elems.end() || !b0_base(it->second)) return std::nullopt;
      Binding nb = b;
      nb.elems.insert_or_assign(key, substitute_mu(it->second, mu));
      return CompanionCandidate{CompanionCase::I, tpl.evars[static_cast<std::size_t>(p->var)].name,
                                to_text(tpl, b), instantiate(tpl, nb)};
    }
    if (p->kind != TPat::Kind::Arrow || !x.is_arrow()) return std::nullopt;
    if (x == core && p->elem->kind == TPat::Kind::EVar && genuine_set_variables(p->set)) {
      const VarKey key{p->elem->var, {}};
      Binding nb = b;
      nb.elems.insert_or_assign(key, GElem::nat(mu));
      return CompanionCandidate{CompanionCase::II, tpl.evars[static_cast<std::size_t>(p->elem->var)].name,
                                to_text(tpl, b), instantiate(tpl, nb)};
    }
    p = p->elem;
    x = x.consequent();
  }
}

}  // namespace

CompanionResult companion_detail(const Term& sigma, const GElem& e, std::uint64_t mu) {
  if (!is_s_only(sigma)) throw PreconditionError("companions are defined for S-only combinators");
  if (!b0_base(e)) throw PreconditionError("element has no B0-base: " + to_text(e));
  if (mu <= e.max_nat()) throw PreconditionError("mu must exceed every natural in the element");
  const Template tpl = template_of(sigma);
  const auto matches = match_element(tpl, e);
  if (matches.empty()) throw PreconditionError("element is not a member: " + to_text(e));

  std::vector<CompanionCandidate> cands;
  for (const auto& b : matches)
    if (auto c = classify(tpl, b, e, mu)) cands.push_back(std::move(*c));
  if (cands.empty())
    throw NoCaseApplies("no companion case applies to " + to_text(e) + " in " + print_term(sigma));

  CompanionResult r{cands.front().value, cands.front().which, cands, {}};
  for (const auto& c : cands)
    if (std::find(r.distinct.begin(), r.distinct.end(), c.value) == r.distinct.end())
      r.distinct.push_back(c.value);
  return r;
}

GElem companion(const Term& sigma, const GElem& e, std::uint64_t mu) {
  return companion_detail(sigma, e, mu).companion;
}

ClosureRecord closure_record(const Term& sigma, const GElem& e) {
  const std::uint64_t mu = choose_mu(e);
  ClosureRecord rec{sigma, e, mu, companion_detail(sigma, e, mu), false};
  const Template tpl = template_of(sigma);
  rec.member = std::all_of(rec.result.distinct.begin(), rec.result.distinct.end(),
                           [&](const GElem& c) { return member_via_template(tpl, c); });
  return rec;
}

bool check_companion_closure(const Term& sigma, const GElem& e) { return closure_record(sigma, e).member; }

nlohmann::json to_json(const ClosureRecord& r) {
  nlohmann::json out = {{"sigma", print_term(r.sigma)},
                        {"element", to_text(r.element)},
                        {"mu", r.mu},
                        {"case", case_name(r.result.which)},
                        {"companion", to_text(r.result.companion)},
                        {"member", r.member}};
  if (r.result.ambiguous()) {
    auto all = nlohmann::json::array();
    for (const auto& c : r.result.distinct) all.push_back(to_text(c));
    out["candidates"] = all;
  }
  return out;
}

}  // namespace ski
