// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracle.hpp"
#include "ski/companion.hpp"
#include "ski/error.hpp"
#include "ski/experiments.hpp"
#include "ski/rewrite.hpp"
#include "ski/template.hpp"

using namespace ski;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Result {
  bool ok = false;
  std::string note;
};

const CaseRecord* find_case(const ExperimentReport& r, const std::string& name) {
  for (const auto& c : r.cases)
    if (c.name == name) return &c;
  return nullptr;
}

Term random_term(std::mt19937& rng, std::size_t leaves, const std::vector<Atom>& atoms) {
  if (leaves == 1) return Term::atom(atoms[rng() % atoms.size()]);
  const std::size_t l = 1 + rng() % (leaves - 1);
  return Term::app(random_term(rng, l, atoms), random_term(rng, leaves - l, atoms));
}

// Random canonical element; antecedents are built from shuffled, possibly
// duplicated members so canonicalization has work to do.
GElem random_elem(std::mt19937& rng, std::size_t depth, std::vector<GElem>* raw = nullptr) {
  if (depth == 0 || rng() % 3 == 0) return GElem::nat(rng() % 4);
  std::vector<GElem> ant;
  const std::size_t n = rng() % 4;
  for (std::size_t i = 0; i < n; ++i) ant.push_back(random_elem(rng, depth - 1));
  if (!ant.empty() && rng() % 2) ant.push_back(ant[rng() % ant.size()]);
  if (raw) *raw = ant;
  return GElem::arrow(GSet(ant), random_elem(rng, depth - 1));
}

GSet random_set(std::mt19937& rng, const std::vector<GElem>& pool, std::size_t max) {
  std::vector<GElem> out;
  const std::size_t n = rng() % (max + 1);
  for (std::size_t i = 0; i < n; ++i) out.push_back(pool[rng() % pool.size()]);
  return GSet(out);
}

Result golden_denotations() {
  const Config cfg;
  std::ostringstream note;
  bool ok = true;
  for (const char* name : {"eq15-skk", "ex2-ki", "ex2-kstarstar", "ex1-sk", "ex2-ss"}) {
    const auto t0 = Clock::now();
    const auto r = verify_paper(cfg, std::string(name));
    const double s = since(t0);
    const bool good = r.verdict == Verdict3::Pass && s < 1.0;
    ok = ok && good;
    note << name << (good ? " ok " : " FAILED ") << s << "s; ";
  }
  return {ok, note.str()};
}

Result application_laws() {
  const Config cfg;
  std::ostringstream note;
  bool ok = true;
  for (const char* name : {"thm1-k", "thm1-s"}) {
    const auto r = verify_paper(cfg, std::string(name));
    const auto* c = find_case(r, name);
    const std::size_t triples = c ? c->detail.value("triples", std::size_t{0}) : 0;
    const bool good = c && c->ok && !c->truncated && triples >= 200;
    ok = ok && good;
    note << name << " triples=" << triples << (good ? " ok; " : " FAILED; ");
  }
  return {ok, note.str()};
}

Result oracle_agreement() {
  const Bounds tb{3, 1, 1, 2};
  std::vector<GElem> universe = enumerate_g(2, 2, 2);
  const auto r3 = enumerate_g(3, 1, 1);
  universe.insert(universe.end(), r3.begin(), r3.end());
  std::size_t terms = 0, checks = 0, positives = 0, disagreements = 0;
  std::string first;
  for (std::size_t l = 1; l <= 4; ++l)
    for (const auto& t : enumerate_sk_terms(l)) {
      ++terms;
      oracle::Oracle o;
      const Template tpl = template_of(t);
      std::vector<GElem> els = universe;
      for (const auto& e : enumerate_template(tpl, tb)) els.push_back(e);
      for (const auto& e : els) {
        ++checks;
        const bool a = member_via_template(tpl, e);
        positives += a;
        if (a != o.member(t, e)) {
          if (first.empty()) first = print_term(t) + " " + to_text(e);
          ++disagreements;
        }
      }
    }
  std::ostringstream note;
  note << terms << " terms, " << checks << " checks, " << positives << " members, " << disagreements
       << " disagreements";
  if (!first.empty()) note << " (first: " << first << ")";
  return {disagreements == 0 && positives > 0, note.str()};
}

Result no_singleton() {
  std::size_t terms = 0, bad = 0;
  for (const auto& t : enumerate_s_terms(6)) {
    ++terms;
    const auto tpl = template_of(t);
    bad += !well_formed(tpl) || has_singleton_setvar(tpl);
  }
  const bool k = has_singleton_setvar(base_template(BaseAtom::K));
  std::ostringstream note;
  note << terms << " S-terms, " << bad << " with a singleton, K has one: " << (k ? "yes" : "no");
  return {bad == 0 && k && terms == 65, note.str()};
}

Result closure() {
  const auto t0 = Clock::now();
  const auto r = verify_paper(Config{}, std::string("thm3-sweep"));
  const double s = since(t0);
  const auto* c = find_case(r, "thm3-sweep");
  std::ostringstream note;
  if (c) note << "checked=" << c->detail.value("checked", std::size_t{0})
              << " failures=" << c->detail.value("failures", std::size_t{0})
              << " findings=" << c->detail.at("findings").size() << " ";
  note << s << "s";
  return {c && c->ok && s < 120.0, note.str()};
}

Result reductions() {
  const bool a = reduces_to(parse_term("SK(SKSK)"), parse_term("SKK"), 50, kDefaultWidth);
  const Term s0 = stdlib_lookup("Sigma0");
  const auto tr = reduce(Term::app(s0, Term::var(0)), 5000);
  const bool b = tr.outcome == ski::Outcome::NormalForm && tr.final_term == Term::var(0);
  const bool c = member_via_template(s0, b0());
  std::ostringstream note;
  note << "SK(SKSK)->SKK " << a << ", Sigma0 x->x in " << tr.steps.size() << " steps " << b
       << ", B0 in [[Sigma0]] " << c;
  return {a && b && c, note.str()};
}

Result identity_search() {
  const auto r = search_identity(6, 10000, 10000);
  std::ostringstream note;
  note << r.cases.size() << " terms, verdict " << verdict_name(r.verdict);
  return {r.verdict == Verdict3::Pass, note.str()};
}

Result properties() {
  std::mt19937 rng(2024);
  std::size_t bad_parse = 0, bad_canon = 0, bad_mono = 0, bad_contract = 0;

  const std::vector<Atom> ski_atoms{Atom::S, Atom::K, Atom::I, Atom::B, Atom::J, Atom::L, Atom::M};
  for (int i = 0; i < 10000; ++i) {
    Term t = random_term(rng, 1 + rng() % 14, ski_atoms);
    if (rng() % 2) t = Term::app(t, Term::var(rng() % 3));
    bad_parse += !(parse_term(print_term(t)) == t);
  }

  for (int i = 0; i < 10000; ++i) {
    std::vector<GElem> ant;
    const GElem e = random_elem(rng, 3, &ant);
    if (!e.is_nat()) {
      std::shuffle(ant.begin(), ant.end(), rng);
      bad_canon += !(GElem::arrow(GSet(ant), e.consequent()) == e);
      bad_canon += !(GElem::arrow(e.antecedent(), e.consequent()) == e);
    }
    bad_canon += !(parse_elem(to_text(e)) == e);
  }

  const auto pool = enumerate_g(2, 1, 1);
  for (int i = 0; i < 1000; ++i) {
    const GSet m = random_set(rng, pool, 4), n = random_set(rng, pool, 3);
    const GSet m2 = m.unite(random_set(rng, pool, 3)), n2 = n.unite(random_set(rng, pool, 3));
    bad_mono += !bullet(m, n).set.subset_of(bullet(m2, n2).set);
  }

  // One contraction step leaves the denotation unchanged: compared by exact
  // template membership over a fixed universe plus both enumerations.
  const std::vector<Atom> sk{Atom::S, Atom::K};
  const Bounds tb{3, 1, 1, 2};
  std::size_t pairs = 0;
  while (pairs < 50) {
    const Term t = random_term(rng, 3 + rng() % 4, sk);
    const auto rs = find_redexes(t);
    if (rs.empty()) continue;
    ++pairs;
    const Term u = contract(t, rs[rng() % rs.size()]);
    const Template a = template_of(t), b = template_of(u);
    std::vector<GElem> els = pool;
    for (const auto& e : enumerate_template(a, tb)) els.push_back(e);
    for (const auto& e : enumerate_template(b, tb)) els.push_back(e);
    for (const auto& e : els) bad_contract += member_via_template(a, e) != member_via_template(b, e);
  }

  std::ostringstream note;
  note << "parse " << bad_parse << ", canonical " << bad_canon << ", monotone " << bad_mono
       << ", contraction " << bad_contract << " failures";
  return {bad_parse + bad_canon + bad_mono + bad_contract == 0, note.str()};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Result()>>> criteria = {
      {"golden denotations", golden_denotations},
      {"application laws for K and S", application_laws},
      {"template membership agrees with the oracle", oracle_agreement},
      {"no singleton set variable in S-only templates", no_singleton},
      {"companion closure sweep", closure},
      {"reference reductions and B0 membership", reductions},
      {"identity search over S-only terms", identity_search},
      {"property suites", properties},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = Clock::now();
    Result o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.ok;
    std::cout << (o.ok ? "PASS " : "FAIL ") << i + 1 << " " << criteria[i].first << ": " << o.note << " ["
              << since(t0) << "s]" << std::endl;
  }
  return failed ? 1 : 0;
}
