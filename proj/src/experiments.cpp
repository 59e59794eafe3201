#include "ski/experiments.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <fstream>
#include <random>
#include <sstream>

#include "ski/error.hpp"
#include "ski/template.hpp"

namespace ski {

// ---------------------------------------------------------------------------
// Config

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

void apply_config_line(Config& c, const std::string& raw) {
  std::string line = raw.substr(0, raw.find('#'));
  line = trim(line);
  if (line.empty()) return;
  const auto eq = line.find('=');
  if (eq == std::string::npos) throw PreconditionError("config line without '=': " + raw);
  const std::string key = trim(line.substr(0, eq));
  const std::string val = trim(line.substr(eq + 1));
  std::size_t v = 0;
  try {
    std::size_t used = 0;
    v = std::stoull(val, &used);
    if (used != val.size()) throw std::invalid_argument(val);
  } catch (const std::exception&) {
    throw PreconditionError("config value for '" + key + "' is not a natural number: " + val);
  }
  if (key == "fuel") c.fuel = v;
  else if (key == "width") c.width = v;
  else if (key == "max_rank") c.bounds.max_rank = v;
  else if (key == "max_set_size") c.bounds.max_set_size = v;
  else if (key == "max_nat") c.bounds.max_nat = v;
  else if (key == "max_arity") c.bounds.max_arity = v;
  else if (key == "max_s") c.max_s = v;
  else throw PreconditionError("unknown config key: " + key);
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("cannot read config file " + path);
  Config c;
  std::string line;
  while (std::getline(in, line)) apply_config_line(c, line);
  return c;
}

nlohmann::json to_json(const Bounds& b) {
  return {{"max_rank", b.max_rank},
          {"max_set_size", b.max_set_size},
          {"max_nat", b.max_nat},
          {"max_arity", b.max_arity}};
}

// ---------------------------------------------------------------------------
// Reports

std::string verdict_name(Verdict3 v) {
  switch (v) {
    case Verdict3::Pass: return "pass";
    case Verdict3::Fail: return "fail";
    case Verdict3::InconclusiveBounds: return "inconclusive-bounds";
  }
  return "?";
}

void ExperimentReport::finish() {
  verdict = Verdict3::Pass;
  for (const auto& c : cases) {
    if (!c.ok) {
      verdict = Verdict3::Fail;
      return;
    }
    if (c.truncated) verdict = Verdict3::InconclusiveBounds;
  }
}

nlohmann::json to_json(const ExperimentReport& r) {
  auto cases = nlohmann::json::array();
  for (const auto& c : r.cases)
    cases.push_back({{"name", c.name}, {"ok", c.ok}, {"truncated", c.truncated}, {"detail", c.detail}});
  return {{"name", r.name},
          {"parameters", r.parameters},
          {"cases", cases},
          {"verdict", verdict_name(r.verdict)},
          {"wall_seconds", r.wall_seconds}};
}

namespace {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace

// ---------------------------------------------------------------------------
// Identity search

ExperimentReport search_identity(std::size_t max_s, std::size_t fuel, std::size_t width) {
  Stopwatch clock;
  ExperimentReport r;
  r.name = "search-identity";
  r.parameters = {{"max_s", max_s}, {"fuel", fuel}, {"width", width}};
  const GElem core = b0();
  for (const auto& t : enumerate_s_terms(max_s)) {
    CaseRecord c;
    c.name = print_term(t);
    const bool identity = identity_behavior(t, fuel, width) == Verdict::Yes;
    c.detail["identity"] = identity;
    bool b0_member = false;
    try {
      b0_member = member_via_template(template_of(t), core);
    } catch (const UnificationFailure&) {
      c.detail["denotation"] = "empty";
    }
    c.detail["b0_member"] = b0_member;
    if (b0_member) {
      // The companion of B0 must then also be a member, which is impossible
      // for a term that maps {0} to {0}.
      try {
        const auto rec = closure_record(t, core);
        c.detail["companion"] = to_json(rec);
      } catch (const Error& e) {
        c.detail["companion_error"] = e.what();
      }
    }
    c.ok = !identity;
    r.cases.push_back(std::move(c));
  }
  r.parameters["terms"] = r.cases.size();
  r.finish();
  r.wall_seconds = clock.seconds();
  return r;
}

// ---------------------------------------------------------------------------
// Closure sweep

bool ClosureSweep::ok() const {
  return findings.empty() &&
         std::all_of(records.begin(), records.end(), [](const ClosureRecord& r) { return r.member; });
}

ClosureSweep closure_sweep(std::size_t max_leaves, const Bounds& bounds) {
  ClosureSweep out;
  for (const auto& t : enumerate_s_terms(max_leaves)) {
    ++out.terms;
    GSet members;
    try {
      members = enumerate_template(template_of(t), bounds);
    } catch (const Error& e) {
      out.findings.push_back({{"sigma", print_term(t)}, {"error", e.what()}});
      continue;
    }
    for (const auto& e : members) {
      if (!b0_base(e)) continue;
      try {
        out.records.push_back(closure_record(t, e));
      } catch (const NoCaseApplies& err) {
        out.findings.push_back({{"sigma", print_term(t)}, {"element", to_text(e)}, {"error", err.what()}});
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Golden suite

namespace {

using CaseFn = CaseRecord (*)(const Config&);

// {({t} -> t) : t in the universe one rank below the bound}, optionally
// behind a prefix of empty antecedents.
GSet identity_family(const Bounds& b, std::size_t empties) {
  Universe u(b);
  if (b.max_rank < empties + 1) return {};
  std::vector<GElem> out;
  for (const auto& t : u.upto(b.max_rank - 1 - empties)) {
    GElem e = GElem::arrow({t}, t);
    for (std::size_t i = 0; i < empties; ++i) e = GElem::arrow({}, e);
    if (u.contains(e)) out.push_back(e);
  }
  return GSet(std::move(out));
}

Bounds golden_bounds(const Config& c) {
  Bounds b = c.bounds;
  b.max_rank = std::min<std::size_t>(b.max_rank, 4);
  b.max_set_size = std::min<std::size_t>(b.max_set_size, 1);
  b.max_nat = std::min<std::uint64_t>(b.max_nat, 1);
  return b;
}

std::string without_primes(std::string s) {
  const std::string prime = "′";
  for (auto pos = s.find(prime); pos != std::string::npos; pos = s.find(prime)) s.erase(pos, prime.size());
  return s;
}

CaseRecord golden(const std::string& name, const std::string& term, const std::string& text,
                  std::size_t empties, const Config& c) {
  CaseRecord r;
  r.name = name;
  const Term t = expand_derived(parse_term(term));
  const Template tpl = template_of(t);
  const Bounds b = golden_bounds(c);
  const GSet got = enumerate_template(tpl, b);
  const GSet want = identity_family(b, empties);
  r.detail = {{"term", print_term(t)}, {"template", to_text(tpl)}, {"bounds", to_json(b)}, {"size", got.size()}};
  r.ok = without_primes(to_text(tpl)) == text && got == want;
  return r;
}

CaseRecord eq15_skk(const Config& c) { return golden("eq15-skk", "SKK", "{t} ↣ t", 0, c); }
CaseRecord ex2_ki(const Config& c) { return golden("ex2-ki", "KI", "∅ ↣ ({t} ↣ t)", 1, c); }
CaseRecord ex2_kstarstar(const Config& c) {
  return golden("ex2-kstarstar", "K(K(SKK))", "∅ ↣ (∅ ↣ ({t} ↣ t))", 2, c);
}
CaseRecord ex1_sk(const Config& c) { return golden("ex1-sk", "SK", "∅ ↣ ({t} ↣ t)", 1, c); }

CaseRecord ex2_ss(const Config&) {
  CaseRecord r;
  r.name = "ex2-ss";
  const Template tpl = template_of(parse_term("SS"));
  r.detail["template"] = to_text(tpl);
  // Reference form up to renaming: {σ'_i ↣ (σ_i ↣ r_i)}_n ↣ ((τ' ∪ ∪σ'_i) ↣ ((τ ∪ ∪σ_i) ↣ s))
  // with τ' = {τ ↣ ({r_i}_n ↣ s)}.
  r.ok = to_text(tpl) ==
         "{σ_i ↣ (σ′_i ↣ r′_i)}_n ↣ (({τ′ ↣ ({r′_i}_n ↣ s′)} ∪ ∪σ_i) ↣ ((τ′ ∪ ∪σ′_i) ↣ s′))";
  return r;
}

std::vector<GSet> small_sets(std::size_t max_size) {
  return subsets_upto(enumerate_g(1, 2, 1), max_size);
}

CaseRecord application_law(const std::string& name, bool s_law, const Config& c) {
  CaseRecord r;
  r.name = name;
  Bounds b;
  b.max_rank = 3;
  b.max_set_size = 2;
  b.max_nat = 1;
  const auto grid = small_sets(1);
  const auto all = small_sets(2);
  std::vector<std::array<GSet, 3>> triples;
  for (const auto& m : grid)
    for (const auto& n : grid)
      for (const auto& l : s_law ? grid : std::vector<GSet>{GSet{}}) triples.push_back({m, n, l});
  std::mt19937_64 rng(c.fuel + (s_law ? 1 : 0));
  std::uniform_int_distribution<std::size_t> pick(0, all.size() - 1);
  for (int i = 0; i < 250; ++i) triples.push_back({all[pick(rng)], all[pick(rng)], all[pick(rng)]});
  std::size_t bad = 0, trunc = 0;
  const auto K = SetExpr::denotation(Term::atom(Atom::K));
  const auto S = SetExpr::denotation(Term::atom(Atom::S));
  for (const auto& [m, n, l] : triples) {
    const auto M = SetExpr::ext(m), N = SetExpr::ext(n), L = SetExpr::ext(l);
    if (!s_law) {
      const auto lhs = eval_setexpr(SetExpr::apply(SetExpr::apply(K, M), N), b);
      trunc += lhs.truncated;
      bad += lhs.set != m;
    } else {
      const auto lhs = eval_setexpr(SetExpr::apply(SetExpr::apply(SetExpr::apply(S, M), N), L), b);
      const auto rhs = bullet(bullet(m, l).set, bullet(n, l).set);
      trunc += lhs.truncated;
      bad += lhs.set != rhs.set;
    }
  }
  r.detail = {{"triples", triples.size()}, {"disagreements", bad}, {"truncated", trunc}};
  r.truncated = trunc > 0;
  r.ok = bad == 0;
  return r;
}

CaseRecord thm1_k(const Config& c) { return application_law("thm1-k", false, c); }
CaseRecord thm1_s(const Config& c) { return application_law("thm1-s", true, c); }

CaseRecord thm2_sweep(const Config& c) {
  CaseRecord r;
  r.name = "thm2-sweep";
  std::size_t terms = 0, with_singleton = 0;
  const std::size_t leaves = std::min<std::size_t>(c.max_s, 6);
  for (const auto& t : enumerate_s_terms(leaves)) {
    ++terms;
    with_singleton += has_singleton_setvar(template_of(t));
  }
  const bool k_has = has_singleton_setvar(base_template(BaseAtom::K));
  r.detail = {{"max_leaves", leaves}, {"terms", terms}, {"with_singleton", with_singleton}, {"k_has_singleton", k_has}};
  r.ok = with_singleton == 0 && k_has;
  return r;
}

CaseRecord thm3_sweep(const Config& c) {
  CaseRecord r;
  r.name = "thm3-sweep";
  Bounds b = c.bounds;
  b.max_rank = std::min<std::size_t>(b.max_rank, 4);
  b.max_set_size = std::min<std::size_t>(b.max_set_size, 1);
  b.max_nat = 0;
  b.max_arity = std::min<std::size_t>(b.max_arity, 1);
  const auto sweep = closure_sweep(4, b);
  std::size_t failures = 0;
  for (const auto& rec : sweep.records) failures += !rec.member;
  r.detail = {{"bounds", to_json(b)},
              {"terms", sweep.terms},
              {"checked", sweep.records.size()},
              {"failures", failures},
              {"findings", sweep.findings}};
  r.ok = sweep.ok() && !sweep.records.empty();
  return r;
}

CaseRecord sk_sksk(const Config& c) {
  CaseRecord r;
  r.name = "sk-sksk";
  r.ok = reduces_to(parse_term("SK(SKSK)"), parse_term("SKK"), std::min<std::size_t>(c.fuel, 50), c.width);
  return r;
}

CaseRecord sigma0_identity(const Config& c) {
  CaseRecord r;
  r.name = "sigma0-identity";
  const Term s0 = stdlib_lookup("Sigma0");
  const auto tr = reduce(Term::app(s0, Term::var(0)), std::min<std::size_t>(c.fuel, 5000));
  r.detail = {{"sigma0", print_term(s0)}, {"steps", tr.steps.size()}, {"outcome", outcome_name(tr.outcome)}};
  r.ok = tr.outcome == Outcome::NormalForm && tr.final_term == Term::var(0) &&
         !reduces_to(s0, parse_term("SKK"), std::min<std::size_t>(c.fuel, 50), 2000);
  return r;
}

CaseRecord thm4_sigma0(const Config&) {
  CaseRecord r;
  r.name = "thm4-sigma0";
  r.ok = member_via_template(stdlib_lookup("Sigma0"), b0());
  return r;
}

const std::vector<std::pair<std::string, CaseFn>>& registry() {
  static const std::vector<std::pair<std::string, CaseFn>> cases = {
      {"eq15-skk", eq15_skk},         {"ex2-ki", ex2_ki},
      {"ex2-kstarstar", ex2_kstarstar}, {"ex1-sk", ex1_sk},
      {"ex2-ss", ex2_ss},             {"thm1-k", thm1_k},
      {"thm1-s", thm1_s},             {"thm2-sweep", thm2_sweep},
      {"thm3-sweep", thm3_sweep},     {"sk-sksk", sk_sksk},
      {"sigma0-identity", sigma0_identity}, {"thm4-sigma0", thm4_sigma0},
  };
  return cases;
}

}  // namespace

std::vector<std::string> paper_case_names() {
  std::vector<std::string> out;
  for (const auto& [name, fn] : registry()) out.push_back(name);
  return out;
}

ExperimentReport verify_paper(const Config& config, const std::optional<std::string>& only) {
  Stopwatch clock;
  ExperimentReport r;
  r.name = "verify-paper";
  r.parameters = {{"fuel", config.fuel}, {"width", config.width}, {"bounds", to_json(config.bounds)}, {"max_s", config.max_s}};
  bool found = false;
  for (const auto& [name, fn] : registry()) {
    if (only && *only != name) continue;
    found = true;
    try {
      r.cases.push_back(fn(config));
    } catch (const Error& e) {
      r.cases.push_back({name, false, false, {{"error", e.what()}}});
    }
  }
  if (!found) throw PreconditionError("unknown case: " + only.value_or(""));
  r.finish();
  r.wall_seconds = clock.seconds();
  return r;
}

}  // namespace ski
