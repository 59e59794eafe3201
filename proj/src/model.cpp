#include "ski/model.hpp"

#include <algorithm>
#include <cctype>
#include <functional>

#include "ski/error.hpp"
#include "ski/template.hpp"

namespace ski {

namespace {

std::size_t mix(std::size_t h, std::size_t v) {
  return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

}  // namespace

GElem GElem::nat(std::uint64_t value) {
  auto n = std::make_shared<detail::ElemNode>();
  n->value = value;
  n->hash = mix(17, value);
  n->max_nat = value;
  return GElem(std::move(n));
}

GElem GElem::arrow(GSet antecedent, GElem consequent) {
  auto n = std::make_shared<detail::ElemNode>();
  n->arrow = true;
  n->hash = mix(mix(29, antecedent.hash()), consequent.hash());
  n->rank = consequent.rank();
  n->max_nat = consequent.max_nat();
  for (const auto& a : antecedent) {
    n->rank = std::max(n->rank, a.rank());
    n->max_nat = std::max(n->max_nat, a.max_nat());
  }
  n->rank += 1;
  n->antecedent = std::move(antecedent);
  n->consequent = std::move(consequent);
  return GElem(std::move(n));
}

int compare(const GElem& a, const GElem& b) {
  if (a.n_ == b.n_) return 0;
  if (a.is_nat() != b.is_nat()) return a.is_nat() ? -1 : 1;
  if (a.is_nat()) {
    if (a.nat_value() == b.nat_value()) return 0;
    return a.nat_value() < b.nat_value() ? -1 : 1;
  }
  if (int c = compare(a.antecedent(), b.antecedent()); c != 0) return c;
  return compare(a.consequent(), b.consequent());
}

GSet::GSet(std::vector<GElem> elems) : elems_(std::move(elems)) {
  std::sort(elems_.begin(), elems_.end());
  elems_.erase(std::unique(elems_.begin(), elems_.end()), elems_.end());
}

bool GSet::contains(const GElem& e) const {
  return std::binary_search(elems_.begin(), elems_.end(), e);
}

bool GSet::subset_of(const GSet& other) const {
  return std::includes(other.elems_.begin(), other.elems_.end(), elems_.begin(), elems_.end());
}

GSet GSet::unite(const GSet& other) const {
  GSet out;
  std::set_union(elems_.begin(), elems_.end(), other.elems_.begin(), other.elems_.end(),
                 std::back_inserter(out.elems_));
  return out;
}

std::size_t GSet::hash() const {
  std::size_t h = 41 + elems_.size();
  for (const auto& e : elems_) h = mix(h, e.hash());
  return h;
}

int compare(const GSet& a, const GSet& b) {
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i)
    if (int c = compare(a[i], b[i]); c != 0) return c;
  if (a.size() == b.size()) return 0;
  return a.size() < b.size() ? -1 : 1;
}

std::uint64_t max_nat(const GSet& s) {
  std::uint64_t m = 0;
  for (const auto& e : s) m = std::max(m, e.max_nat());
  return m;
}

// ---------------------------------------------------------------------------
// Text and JSON

std::string to_text(const GElem& e) {
  if (e.is_nat()) return std::to_string(e.nat_value());
  return "(" + to_text(e.antecedent()) + " -> " + to_text(e.consequent()) + ")";
}

std::string to_text(const GSet& s) {
  std::string out = "{";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ',';
    out += to_text(s[i]);
  }
  return out + "}";
}

namespace {

class ElemParser {
 public:
  explicit ElemParser(std::string_view t) : t_(t) {}

  GElem parse_whole_elem() {
    GElem e = elem();
    finish();
    return e;
  }
  GSet parse_whole_set() {
    GSet s = set();
    finish();
    return s;
  }

 private:
  void finish() {
    ws();
    if (p_ != t_.size()) throw ParseError("trailing input", p_);
  }
  void ws() {
    while (p_ < t_.size() && std::isspace(static_cast<unsigned char>(t_[p_]))) ++p_;
  }
  bool eat(std::string_view tok) {
    ws();
    if (t_.substr(p_, tok.size()) == tok) {
      p_ += tok.size();
      return true;
    }
    return false;
  }
  void expect(std::string_view tok) {
    if (!eat(tok)) throw ParseError("expected '" + std::string(tok) + "'", p_);
  }

  GElem elem() {
    ws();
    if (p_ >= t_.size()) throw ParseError("expected an element", p_);
    if (std::isdigit(static_cast<unsigned char>(t_[p_]))) {
      std::uint64_t v = 0;
      while (p_ < t_.size() && std::isdigit(static_cast<unsigned char>(t_[p_])))
        v = v * 10 + static_cast<std::uint64_t>(t_[p_++] - '0');
      return GElem::nat(v);
    }
    expect("(");
    GSet a = set();
    if (!eat("->") && !eat("\xe2\x86\xa3")) throw ParseError("expected '->'", p_);
    GElem b = elem();
    expect(")");
    return GElem::arrow(std::move(a), std::move(b));
  }

  GSet set() {
    if (eat("\xe2\x88\x85")) return {};
    expect("{");
    std::vector<GElem> xs;
    if (!eat("}")) {
      do {
        xs.push_back(elem());
      } while (eat(","));
      expect("}");
    }
    return GSet(std::move(xs));
  }

  std::string_view t_;
  std::size_t p_ = 0;
};

}  // namespace

GElem parse_elem(std::string_view text) { return ElemParser(text).parse_whole_elem(); }
GSet parse_set(std::string_view text) { return ElemParser(text).parse_whole_set(); }

nlohmann::json to_json(const GElem& e) {
  if (e.is_nat()) return {{"nat", e.nat_value()}};
  return {{"arrow", {{"set", to_json(e.antecedent())}, {"elem", to_json(e.consequent())}}}};
}

nlohmann::json to_json(const GSet& s) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& e : s) a.push_back(to_json(e));
  return a;
}

GElem elem_from_json(const nlohmann::json& j) {
  if (j.contains("nat")) return GElem::nat(j.at("nat").get<std::uint64_t>());
  if (j.contains("arrow")) {
    const auto& a = j.at("arrow");
    return GElem::arrow(set_from_json(a.at("set")), elem_from_json(a.at("elem")));
  }
  throw Error("element JSON: expected 'nat' or 'arrow'");
}

GSet set_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw Error("set JSON: expected an array");
  std::vector<GElem> xs;
  for (const auto& e : j) xs.push_back(elem_from_json(e));
  return GSet(std::move(xs));
}

// ---------------------------------------------------------------------------
// Membership in the denotations of K and S

bool member_k(const GElem& e) {
  if (!e.is_arrow() || e.antecedent().size() != 1) return false;
  const GElem& rest = e.consequent();
  return rest.is_arrow() && rest.antecedent().empty() && rest.consequent() == e.antecedent()[0];
}

// Members of [[S]] have the shape
//   {tau -> ({r_1..r_n} -> s)} -> ({sigma_1 -> r_1, ..., sigma_n -> r_n} -> (sigma -> s))
// with sigma = tau u sigma_1 u ... u sigma_n. Under set semantics any finite
// set P of arrows serves as the middle set with some indexing, the r-set is
// then exactly the set of consequents of P and the sigma_i union is the union
// of P's antecedents, so the existential over n and the indexing collapses
// to these two equalities.
bool member_s(const GElem& e) {
  if (!e.is_arrow() || e.antecedent().size() != 1) return false;
  const GElem& left = e.antecedent()[0];
  if (!left.is_arrow() || !left.consequent().is_arrow()) return false;
  const GSet& tau = left.antecedent();
  const GSet& rs = left.consequent().antecedent();
  const GElem& s = left.consequent().consequent();

  const GElem& mid = e.consequent();
  if (!mid.is_arrow() || !mid.consequent().is_arrow()) return false;
  const GSet& pairs = mid.antecedent();
  const GSet& sigma = mid.consequent().antecedent();
  if (mid.consequent().consequent() != s) return false;

  std::vector<GElem> conseqs;
  GSet ants = tau;
  for (const auto& p : pairs) {
    if (!p.is_arrow()) return false;
    conseqs.push_back(p.consequent());
    ants = ants.unite(p.antecedent());
  }
  return GSet(std::move(conseqs)) == rs && ants == sigma;
}

// ---------------------------------------------------------------------------
// Bounded universe

std::vector<GSet> subsets_upto(const std::vector<GElem>& pool, std::size_t max_size) {
  std::vector<GSet> out;
  std::vector<GElem> cur;
  std::function<void(std::size_t)> rec = [&](std::size_t from) {
    out.emplace_back(cur);
    if (cur.size() == max_size) return;
    for (std::size_t i = from; i < pool.size(); ++i) {
      cur.push_back(pool[i]);
      rec(i + 1);
      cur.pop_back();
    }
  };
  rec(0);
  return out;
}

Universe::Universe(const Bounds& b) : bounds_(b) {}

const std::vector<GElem>& Universe::upto(std::size_t rank) const {
  rank = std::min(rank, bounds_.max_rank);
  auto& levels = levels_;
  if (levels.empty()) {
    std::vector<GElem> nats;
    for (std::uint64_t v = 0; v <= bounds_.max_nat; ++v) nats.push_back(GElem::nat(v));
    levels.push_back(std::move(nats));
  }
  while (levels.size() <= rank) {
    const auto& prev = levels.back();
    std::vector<GElem> next = levels.front();
    for (const auto& a : subsets_upto(prev, bounds_.max_set_size))
      for (const auto& b : prev) next.push_back(GElem::arrow(a, b));
    std::sort(next.begin(), next.end());
    levels.push_back(std::move(next));
  }
  return levels[rank];
}

namespace {

bool within(const GElem& e, const Bounds& b) {
  if (e.rank() > b.max_rank || e.max_nat() > b.max_nat) return false;
  std::function<bool(const GElem&)> sets_ok = [&](const GElem& x) {
    if (x.is_nat()) return true;
    if (x.antecedent().size() > b.max_set_size) return false;
    for (const auto& a : x.antecedent())
      if (!sets_ok(a)) return false;
    return sets_ok(x.consequent());
  };
  return sets_ok(e);
}

}  // namespace

bool Universe::contains(const GElem& e) const { return within(e, bounds_); }

std::vector<GElem> enumerate_g(std::size_t max_rank, std::size_t max_set_size,
                               std::uint64_t max_nat) {
  Universe u(Bounds{max_rank, max_set_size, max_nat, 0});
  return u.upto(max_rank);
}

// ---------------------------------------------------------------------------
// Application

SetExprPtr SetExpr::ext(GSet s) { return std::make_shared<SetExpr>(SetExpr{std::move(s)}); }
SetExprPtr SetExpr::denotation(Term t) {
  return std::make_shared<SetExpr>(SetExpr{std::move(t)});
}
SetExprPtr SetExpr::apply(SetExprPtr f, SetExprPtr a) {
  return std::make_shared<SetExpr>(SetExpr{Apply{std::move(f), std::move(a)}});
}

BoundedSet bullet(const GSet& m, const GSet& n) {
  std::vector<GElem> out;
  for (const auto& x : m)
    if (x.is_arrow() && x.antecedent().subset_of(n)) out.push_back(x.consequent());
  return {GSet(std::move(out)), false};
}

namespace {

// Intermediate value of an evaluation. Partial applications of K and S to
// explicit sets stay symbolic while their value is infinite.
struct Value {
  enum class Kind { Ext, PartialK, PartialS, Denotation } kind;
  BoundedSet ext;
  std::vector<GSet> args;
  std::optional<Term> term;
};

BoundedSet cap_rank(BoundedSet r, const Bounds& b) {
  std::vector<GElem> kept;
  for (const auto& e : r.set) {
    if (e.rank() <= b.max_rank) {
      kept.push_back(e);
    } else {
      r.truncated = true;
    }
  }
  r.set = GSet(std::move(kept));
  return r;
}

// [[K]] . N: the only alpha that can precede a member of [[K]] is a
// singleton {t}, so the search ranges over t in N.
BoundedSet k_apply(const GSet& n) {
  std::vector<GElem> out;
  for (const auto& t : n) {
    const GElem x = GElem::arrow({}, t);
    if (member_k(GElem::arrow({t}, x))) out.push_back(x);
  }
  return {GSet(std::move(out)), false};
}

// ([[S]] . M) . N. Members of [[S]] . M are P -> (sigma -> s) for m in M;
// P is the alpha drawn from N. Only arrows of N whose consequent lies in
// m's r-set can be in P, which bounds the subset search.
BoundedSet s_apply2(const GSet& m, const GSet& n) {
  std::vector<GElem> out;
  for (const auto& left : m) {
    if (!left.is_arrow() || !left.consequent().is_arrow()) continue;
    const GSet& rs = left.consequent().antecedent();
    std::vector<GElem> pool;
    for (const auto& p : n)
      if (p.is_arrow() && rs.contains(p.consequent())) pool.push_back(p);
    for (const auto& pset : subsets_upto(pool, pool.size())) {
      GSet sigma = left.antecedent();
      for (const auto& p : pset) sigma = sigma.unite(p.antecedent());
      const GElem x = GElem::arrow(sigma, left.consequent().consequent());
      if (member_s(GElem::arrow({left}, GElem::arrow(pset, x)))) out.push_back(x);
    }
  }
  return {GSet(std::move(out)), false};
}

Value eval_value(const SetExprPtr& x, const Bounds& b);

BoundedSet to_set(const Value& v, const Bounds& b) {
  switch (v.kind) {
    case Value::Kind::Ext: return v.ext;
    case Value::Kind::PartialK:
      return {enumerate_template(base_template(BaseAtom::K), b), true};
    case Value::Kind::Denotation:
      return {enumerate_template(template_of(*v.term), b), true};
    case Value::Kind::PartialS: {
      if (v.args.empty()) return {enumerate_template(base_template(BaseAtom::S), b), true};
      // [[S]] . M restricted to the universe.
      Universe u(b);
      std::vector<GElem> out;
      for (const auto& x : u.upto(b.max_rank))
        for (const auto& m : v.args[0])
          if (member_s(GElem::arrow({m}, x))) {
            out.push_back(x);
            break;
          }
      return {GSet(std::move(out)), true};
    }
  }
  return {};
}

Value apply_value(const Value& f, const BoundedSet& arg, const Bounds& b) {
  Value out{Value::Kind::Ext, {}, {}, std::nullopt};
  switch (f.kind) {
    case Value::Kind::Ext:
      out.ext = bullet(f.ext.set, arg.set);
      out.ext.truncated = f.ext.truncated || arg.truncated;
      break;
    case Value::Kind::PartialK:
      out.ext = k_apply(arg.set);
      out.ext.truncated = arg.truncated;
      break;
    case Value::Kind::PartialS:
      if (f.args.empty()) {
        out.kind = Value::Kind::PartialS;
        out.args = {arg.set};
        out.ext.truncated = arg.truncated;
        return out;
      }
      out.ext = s_apply2(f.args[0], arg.set);
      out.ext.truncated = f.ext.truncated || arg.truncated;
      break;
    case Value::Kind::Denotation:
      out.ext = template_apply(template_of(*f.term), arg.set, b);
      out.ext.truncated = out.ext.truncated || arg.truncated;
      break;
  }
  out.ext = cap_rank(out.ext, b);
  return out;
}

// An application tree over denotations only is the denotation of the
// applied term.
std::optional<Term> as_term(const SetExprPtr& x) {
  if (const auto* t = std::get_if<Term>(&x->node)) return *t;
  if (const auto* ap = std::get_if<SetExpr::Apply>(&x->node)) {
    auto f = as_term(ap->fn);
    if (!f) return std::nullopt;
    auto a = as_term(ap->arg);
    if (!a) return std::nullopt;
    return Term::app(*f, *a);
  }
  return std::nullopt;
}

Value eval_value(const SetExprPtr& x, const Bounds& b) {
  if (std::holds_alternative<SetExpr::Apply>(x->node))
    if (auto t = as_term(x)) return eval_value(SetExpr::denotation(*t), b);
  if (const auto* s = std::get_if<GSet>(&x->node)) {
    return Value{Value::Kind::Ext, {*s, false}, {}, std::nullopt};
  }
  if (const auto* t = std::get_if<Term>(&x->node)) {
    if (!is_sk_combinator(*t))
      throw PreconditionError("denotations exist only for closed {S,K} terms: " + print_term(*t));
    if (t->is_atom()) {
      return Value{t->atom_value() == Atom::K ? Value::Kind::PartialK : Value::Kind::PartialS,
                   {}, {}, std::nullopt};
    }
    return Value{Value::Kind::Denotation, {}, {}, *t};
  }
  const auto& ap = std::get<SetExpr::Apply>(x->node);
  const Value f = eval_value(ap.fn, b);
  const BoundedSet arg = to_set(eval_value(ap.arg, b), b);
  return apply_value(f, arg, b);
}

}  // namespace

BoundedSet bullet(const SetExprPtr& m, const SetExprPtr& n, const Bounds& bounds) {
  return eval_setexpr(SetExpr::apply(m, n), bounds);
}

BoundedSet eval_setexpr(const SetExprPtr& x, const Bounds& bounds) {
  return to_set(eval_value(x, bounds), bounds);
}

}  // namespace ski
