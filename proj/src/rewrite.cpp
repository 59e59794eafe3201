#include "ski/rewrite.hpp"

#include <algorithm>
#include <unordered_set>

#include "ski/error.hpp"

namespace ski {

std::string position_to_string(const RedexPosition& p) {
  if (p.empty()) return "root";
  std::string out;
  for (Dir d : p) out += d == Dir::Left ? 'L' : 'R';
  return out;
}

std::optional<Term> contract_root(const Term& r) {
  const Spine sp = spine(r);
  if (!sp.head.is_atom()) return std::nullopt;
  const auto& a = sp.args;
  if (static_cast<int>(a.size()) != atom_arity(sp.head.atom_value())) return std::nullopt;
  using T = Term;
  switch (sp.head.atom_value()) {
    case Atom::K: return a[0];
    case Atom::S: return T::app(T::app(a[0], a[2]), T::app(a[1], a[2]));
    case Atom::B: return T::app(a[0], T::app(a[1], a[2]));
    case Atom::I: return a[0];
    case Atom::J: return T::app(T::app(a[0], a[1]), T::app(T::app(a[0], a[3]), a[2]));
    case Atom::L: return T::app(a[0], T::app(a[1], a[1]));
    case Atom::M: return T::app(a[0], a[0]);
  }
  return std::nullopt;
}

namespace {

bool is_redex(const Term& t) {
  const Spine sp = spine(t);
  return sp.head.is_atom() &&
         static_cast<int>(sp.args.size()) == atom_arity(sp.head.atom_value());
}

void collect(const Term& t, RedexPosition& path, std::vector<RedexPosition>& out) {
  if (!t.is_app()) return;
  if (is_redex(t)) out.push_back(path);
  path.push_back(Dir::Left);
  collect(t.left(), path, out);
  path.back() = Dir::Right;
  collect(t.right(), path, out);
  path.pop_back();
}

bool first_redex(const Term& t, RedexPosition& path) {
  if (!t.is_app()) return false;
  if (is_redex(t)) return true;
  path.push_back(Dir::Left);
  if (first_redex(t.left(), path)) return true;
  path.back() = Dir::Right;
  if (first_redex(t.right(), path)) return true;
  path.pop_back();
  return false;
}

Term replace_at(const Term& t, const RedexPosition& p, std::size_t depth) {
  if (depth == p.size()) {
    auto r = contract_root(t);
    if (!r) throw NotARedex("no redex at position " + position_to_string(p));
    return *r;
  }
  if (!t.is_app()) throw NotARedex("position " + position_to_string(p) + " leaves the term");
  if (p[depth] == Dir::Left) return Term::app(replace_at(t.left(), p, depth + 1), t.right());
  return Term::app(t.left(), replace_at(t.right(), p, depth + 1));
}

}  // namespace

std::vector<RedexPosition> find_redexes(const Term& t) {
  std::vector<RedexPosition> out;
  RedexPosition path;
  collect(t, path, out);
  return out;
}

Term subterm_at(const Term& t, const RedexPosition& p) {
  Term cur = t;
  for (Dir d : p) {
    if (!cur.is_app()) throw NotARedex("position " + position_to_string(p) + " leaves the term");
    cur = d == Dir::Left ? cur.left() : cur.right();
  }
  return cur;
}

Term contract(const Term& t, const RedexPosition& p) { return replace_at(t, p, 0); }

std::string outcome_name(Outcome o) {
  switch (o) {
    case Outcome::NormalForm: return "normal-form";
    case Outcome::FuelExhausted: return "fuel-exhausted";
    case Outcome::CycleDetected: return "cycle-detected";
  }
  return "?";
}

ReductionTrace reduce(const Term& t, std::size_t fuel) {
  ReductionTrace tr;
  std::unordered_set<Term, TermHash> seen{t};
  Term cur = t;
  for (;;) {
    RedexPosition pos;
    if (!first_redex(cur, pos)) {
      tr.outcome = Outcome::NormalForm;
      break;
    }
    if (tr.steps.size() == fuel) {
      tr.outcome = Outcome::FuelExhausted;
      break;
    }
    Term next = contract(cur, pos);
    tr.steps.push_back({cur, pos});
    cur = next;
    if (!seen.insert(cur).second) {
      tr.outcome = Outcome::CycleDetected;
      break;
    }
  }
  tr.final_term = cur;
  return tr;
}

nlohmann::json trace_to_json(const ReductionTrace& tr) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : tr.steps) {
    nlohmann::json path = nlohmann::json::array();
    for (Dir d : s.redex) path.push_back(d == Dir::Left ? "left" : "right");
    steps.push_back({{"term", term_to_json(s.term)}, {"redex", path}});
  }
  steps.push_back({{"outcome", outcome_name(tr.outcome)}, {"final", term_to_json(tr.final_term)}});
  return steps;
}

bool reduces_to(const Term& from, const Term& to, std::size_t fuel, std::size_t width) {
  if (from == to) return true;
  std::unordered_set<Term, TermHash> visited{from};
  std::vector<Term> frontier{from};
  for (std::size_t level = 0; level < fuel && !frontier.empty(); ++level) {
    std::vector<Term> next;
    for (const auto& t : frontier) {
      for (const auto& p : find_redexes(t)) {
        Term u = contract(t, p);
        if (u == to) return true;
        if (visited.insert(u).second) next.push_back(u);
      }
    }
    // Deterministic cut: keep the smallest terms first, ties by structure.
    if (next.size() > width) {
      std::sort(next.begin(), next.end(), [](const Term& a, const Term& b) {
        if (a.leaves() != b.leaves()) return a.leaves() < b.leaves();
        return a < b;
      });
      next.erase(next.begin() + static_cast<std::ptrdiff_t>(width), next.end());
    }
    frontier = std::move(next);
  }
  return false;
}

Verdict identity_behavior(const Term& sigma, std::size_t fuel, std::size_t width) {
  if (!is_closed(sigma)) throw NotClosed("identity_behavior expects a combinator");
  const Term x = Term::var(smallest_unused_var(sigma));
  return reduces_to(Term::app(sigma, x), x, fuel, width) ? Verdict::Yes : Verdict::NoWithinBounds;
}

}  // namespace ski
