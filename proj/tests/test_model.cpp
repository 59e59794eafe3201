#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "oracle.hpp"
#include "ski/model.hpp"
#include "ski/template.hpp"

using namespace ski;

namespace {

GElem N(std::uint64_t v) { return GElem::nat(v); }
GElem A(std::vector<GElem> s, GElem c) { return GElem::arrow(GSet(std::move(s)), std::move(c)); }
GElem E(const char* s) { return parse_elem(s); }

// Number of canonical elements with rank <= r, set sizes <= k, naturals <= m,
// computed by counting per rank: arrows of rank <= r have antecedent subsets
// and consequent drawn from rank <= r-1.
std::size_t count_g(std::size_t r, std::size_t k, std::uint64_t m) {
  std::size_t below = m + 1;
  for (std::size_t i = 1; i <= r; ++i) {
    std::size_t subsets = 0, choose = 1;
    for (std::size_t j = 0; j <= k && j <= below; ++j) {
      subsets += choose;
      choose = choose * (below - j) / (j + 1);
    }
    below = (m + 1) + subsets * below;
  }
  return below;
}

GSet random_set(std::mt19937& rng, const std::vector<GElem>& pool, std::size_t max) {
  std::vector<GElem> out;
  const std::size_t n = rng() % (max + 1);
  for (std::size_t i = 0; i < n; ++i) out.push_back(pool[rng() % pool.size()]);
  return GSet(out);
}

}  // namespace

TEST_CASE("canonical elements") {
  CHECK(N(0).is_nat());
  CHECK(A({N(0), N(0)}, N(1)) == A({N(0)}, N(1)));
  CHECK(A({N(0), N(0)}, N(1)).antecedent().size() == 1);
  CHECK(A({N(1), N(0)}, N(2)) == A({N(0), N(1)}, N(2)));
  CHECK(E("({1,0} -> 2)") == A({N(0), N(1)}, N(2)));
  CHECK(to_text(A({N(1), N(0)}, A({}, N(2)))) == "({0,1} -> ({} -> 2))");
}

TEST_CASE("order: naturals before arrows") {
  CHECK(N(5) < A({}, N(0)));
  CHECK(N(1) < N(2));
  CHECK(A({}, N(9)) < A({N(0)}, N(0)));
  const GSet s({A({N(0)}, N(0)), N(3), N(1), A({}, N(1))});
  CHECK(to_text(s) == "{1,3,({} -> 1),({0} -> 0)}");
}

TEST_CASE("rank and max_nat") {
  CHECK(N(7).rank() == 0);
  CHECK(A({}, N(0)).rank() == 1);
  CHECK(A({N(0)}, A({}, N(0))).rank() == 2);
  CHECK(A({N(0)}, N(0)).max_nat() == 0);
  CHECK(A({N(0), N(3)}, A({}, N(2))).max_nat() == 3);
  CHECK(A({N(1)}, N(2)).max_nat() == 2);
}

TEST_CASE("text and JSON round trips") {
  const auto all = enumerate_g(2, 2, 1);
  for (const auto& e : all) {
    CHECK(parse_elem(to_text(e)) == e);
    CHECK(elem_from_json(to_json(e)) == e);
  }
  CHECK(to_json(A({N(0)}, N(1))) ==
        nlohmann::json::parse(R"({"arrow":{"set":[{"nat":0}],"elem":{"nat":1}}})"));
}

TEST_CASE("member_k") {
  CHECK(member_k(E("({0} -> ({} -> 0))")));
  CHECK_FALSE(member_k(E("({0} -> ({} -> 1))")));
  CHECK_FALSE(member_k(E("({0,1} -> ({} -> 0))")));
}

TEST_CASE("member_s") {
  CHECK(member_s(E("({({} -> ({} -> 0))} -> ({} -> ({} -> 0)))")));
  CHECK(member_s(E("({({0} -> ({} -> 0))} -> ({} -> ({0} -> 0)))")));
  CHECK_FALSE(member_s(E("({} -> ({} -> ({1} -> 0)))")));
  // n = 2: τ = {0}, r = {1,2}, σ_1 = {3}, σ_2 = {}
  CHECK(member_s(E("({({0} -> ({1,2} -> 5))} -> ({({3} -> 1),({} -> 2)} -> ({0,3} -> 5)))")));
  CHECK_FALSE(member_s(E("({({0} -> ({1,2} -> 5))} -> ({({3} -> 1)} -> ({0,3} -> 5)))")));
}

TEST_CASE("member_k and member_s agree with the literal tests and with base templates") {
  const auto kt = base_template(BaseAtom::K);
  const auto st = base_template(BaseAtom::S);
  auto universe = enumerate_g(2, 2, 2);
  const auto r3 = enumerate_g(3, 1, 1);
  universe.insert(universe.end(), r3.begin(), r3.end());
  // Positive cases come from the enumerations of the base templates.
  for (const auto& e : enumerate_template(st, Bounds{3, 2, 1, 2})) universe.push_back(e);
  for (const auto& e : enumerate_template(kt, Bounds{3, 2, 2, 2})) universe.push_back(e);
  std::size_t pos_k = 0, pos_s = 0;
  for (const auto& e : universe) {
    const bool k = member_k(e), s = member_s(e);
    pos_k += k;
    pos_s += s;
    CHECK(k == oracle::in_k(e));
    CHECK(s == oracle::in_s(e));
    CHECK(k == member_via_template(kt, e));
    CHECK(s == member_via_template(st, e));
  }
  CHECK(pos_k > 10);
  CHECK(pos_s > 10);
}

TEST_CASE("bounded enumeration of the universe") {
  CHECK(enumerate_g(0, 0, 1) == std::vector<GElem>{N(0), N(1)});
  CHECK(enumerate_g(1, 1, 0) == std::vector<GElem>{N(0), A({}, N(0)), A({N(0)}, N(0))});
  CHECK(enumerate_g(1, 2, 1).size() == 10);
  for (std::size_t r = 0; r <= 2; ++r)
    for (std::size_t k = 0; k <= 2; ++k)
      for (std::uint64_t m = 0; m <= 2; ++m) {
        const auto all = enumerate_g(r, k, m);
        CAPTURE(r);
        CAPTURE(k);
        CAPTURE(m);
        CHECK(all.size() == count_g(r, k, m));
        CHECK(std::is_sorted(all.begin(), all.end()));
        CHECK(std::adjacent_find(all.begin(), all.end()) == all.end());
      }
}

TEST_CASE("bullet on explicit sets") {
  CHECK(bullet(GSet({A({}, N(5))}), GSet{}).set == GSet({N(5)}));
  CHECK(bullet(GSet({A({N(1)}, N(5)), A({N(0)}, N(6))}), GSet({N(0)})).set == GSet({N(6)}));
  CHECK(bullet(GSet({N(3)}), GSet({N(3)})).set.empty());
}

TEST_CASE("bullet on denotations") {
  const Bounds b{3, 2, 1, 2};
  const auto K = SetExpr::denotation(Term::atom(Atom::K));
  const auto S = SetExpr::denotation(Term::atom(Atom::S));
  const auto I = SetExpr::apply(SetExpr::apply(S, K), K);
  const auto r = bullet(K, SetExpr::ext(GSet({A({N(0)}, N(0))})), b);
  CHECK_FALSE(r.truncated);
  CHECK(r.set == GSet({A({}, A({N(0)}, N(0)))}));
  const auto i7 = bullet(I, SetExpr::ext(GSet({N(7)})), Bounds{1, 1, 7, 1});
  CHECK(i7.set == GSet({N(7)}));
  const auto d = bullet(SetExpr::denotation(parse_term("SKK")), SetExpr::ext(GSet({N(7)})), Bounds{1, 1, 7, 1});
  CHECK(d.set == GSet({N(7)}));
}

TEST_CASE("eval_setexpr") {
  const Bounds b{3, 2, 2, 2};
  const auto K = SetExpr::denotation(Term::atom(Atom::K));
  const auto S = SetExpr::denotation(Term::atom(Atom::S));
  const auto r = eval_setexpr(SetExpr::apply(SetExpr::apply(K, SetExpr::ext(GSet({N(0)}))),
                                             SetExpr::ext(GSet({N(1), N(2)}))),
                              b);
  CHECK(r.set == GSet({N(0)}));
  CHECK(eval_setexpr(SetExpr::ext(GSet({N(0), N(1)})), b).set == GSet({N(0), N(1)}));
  std::mt19937 rng(3);
  const auto pool = enumerate_g(1, 1, 1);
  for (int i = 0; i < 40; ++i) {
    const GSet m = random_set(rng, pool, 2), n = random_set(rng, pool, 2), l = random_set(rng, pool, 2);
    const auto lhs = eval_setexpr(
        SetExpr::apply(SetExpr::apply(SetExpr::apply(S, SetExpr::ext(m)), SetExpr::ext(n)), SetExpr::ext(l)),
        Bounds{3, 2, 1, 2});
    CHECK_FALSE(lhs.truncated);
    CHECK(lhs.set == bullet(bullet(m, l).set, bullet(n, l).set).set);
  }
}

TEST_CASE("bullet is monotone") {
  std::mt19937 rng(5);
  const auto pool = enumerate_g(2, 1, 1);
  for (int i = 0; i < 200; ++i) {
    const GSet m = random_set(rng, pool, 4), n = random_set(rng, pool, 3);
    const GSet m2 = m.unite(random_set(rng, pool, 3)), n2 = n.unite(random_set(rng, pool, 3));
    CHECK(bullet(m, n).set.subset_of(bullet(m2, n2).set));
  }
}
