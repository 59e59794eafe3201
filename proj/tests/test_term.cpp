#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>
#include <set>

#include "ski/error.hpp"
#include "ski/term.hpp"

using namespace ski;

namespace {

Term S() { return Term::atom(Atom::S); }
Term K() { return Term::atom(Atom::K); }
Term ap(const Term& a, const Term& b) { return Term::app(a, b); }

// Catalan numbers by the convolution recurrence.
std::vector<std::size_t> catalan(std::size_t n) {
  std::vector<std::size_t> c(n + 1, 0);
  c[0] = 1;
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = 0; j < i; ++j) c[i] += c[j] * c[i - 1 - j];
  return c;
}

Term random_term(std::mt19937& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, 9);
  const int r = pick(rng);
  if (depth == 0 || r < 4) {
    if (r < 2) return Term::var(static_cast<std::uint32_t>(rng() % 12));
    static const Atom atoms[] = {Atom::S, Atom::K, Atom::B, Atom::I, Atom::J, Atom::L, Atom::M};
    return Term::atom(atoms[rng() % 7]);
  }
  return ap(random_term(rng, depth - 1), random_term(rng, depth - 1));
}

}  // namespace

TEST_CASE("parse is left associative") {
  CHECK(parse_term("SKK") == ap(ap(S(), K()), K()));
  CHECK(parse_term("SK(KS)") == ap(ap(S(), K()), ap(K(), S())));
  CHECK(parse_term("S x0 x1 x2") == ap(ap(ap(S(), Term::var(0)), Term::var(1)), Term::var(2)));
}

TEST_CASE("parse accepts dots, whitespace and variable aliases") {
  CHECK(parse_term("S·K·K") == parse_term("SKK"));
  CHECK(parse_term(" ( ( S K ) K ) ") == parse_term("SKK"));
  CHECK(parse_term("xyzw") == parse_term("x0 x1 x2 x3"));
  CHECK(parse_term("x12").var_index() == 12);
}

TEST_CASE("parse errors carry a byte offset") {
  CHECK_THROWS_AS(parse_term(""), ParseError);
  CHECK_THROWS_AS(parse_term("S(K"), ParseError);
  CHECK_THROWS_AS(parse_term("SK)"), ParseError);
  CHECK_THROWS_AS(parse_term("SQ"), ParseError);
  try {
    parse_term("SKQ");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.offset() == 2);
  }
}

TEST_CASE("printing") {
  const Term skk = parse_term("SKK");
  CHECK(print_term(skk) == "SKK");
  CHECK(print_term(skk, PrintStyle::Full) == "((S·K)·K)");
  CHECK(print_term(parse_term("SK(KS)")) == "SK(KS)");
}

TEST_CASE("stdlib") {
  CHECK(stdlib_lookup("I") == parse_term("SKK"));
  CHECK(stdlib_lookup("M") == parse_term("S(SKK)(SKK)"));
  CHECK(stdlib_lookup("Kstarstar") == parse_term("K(K(SKK))"));
  CHECK(stdlib_lookup("B") == parse_term("S(KS)K"));
  CHECK(stdlib_lookup("L") == parse_term("((S((S(KS))K))(K((S((SK)K))((SK)K))))"));
  CHECK(stdlib_lookup("Sigma0") == parse_term("S(S(S(SK)(S(KK)(S(KK)(SKK))))(K(SKK)))K"));
  CHECK_THROWS_AS(stdlib_lookup("Q"), UnknownName);
  for (const auto& n : stdlib_names()) {
    CAPTURE(n);
    const Term t = stdlib_lookup(n);
    CHECK(term_stats(t).var_count == 0);
    CHECK(is_sk_combinator(t));
  }
}

TEST_CASE("term statistics") {
  CHECK(term_stats(S()) == TermStats{1, 1, 0, 0});
  CHECK(term_stats(parse_term("SKK")) == TermStats{3, 1, 2, 0});
  CHECK(term_stats(parse_term("S(SS)(SS)")) == TermStats{5, 5, 0, 0});
  CHECK(term_stats(parse_term("Sxy")).var_count == 2);
}

TEST_CASE("S-only enumeration follows the Catalan numbers") {
  CHECK(enumerate_s_terms(1) == std::vector<Term>{S()});
  CHECK(enumerate_s_terms(2) == std::vector<Term>{S(), ap(S(), S())});
  CHECK(enumerate_s_terms(3).size() == 4);
  const auto cat = catalan(8);
  const auto all = enumerate_s_terms(8);
  std::set<std::string> seen;
  std::vector<std::size_t> per(9, 0);
  std::size_t last = 0;
  for (const auto& t : all) {
    CHECK(is_s_only(t));
    CHECK(t.leaves() >= last);
    last = t.leaves();
    ++per[t.leaves()];
    CHECK(seen.insert(print_term(t)).second);
  }
  for (std::size_t n = 1; n <= 8; ++n) CHECK(per[n] == cat[n - 1]);
}

TEST_CASE("SK enumeration counts") {
  const auto cat = catalan(6);
  for (std::size_t n = 1; n <= 6; ++n)
    CHECK(enumerate_sk_terms(n).size() == cat[n - 1] * (std::size_t{1} << n));
}

TEST_CASE("round trip on random terms") {
  std::mt19937 rng(7);
  for (int i = 0; i < 2000; ++i) {
    const Term t = random_term(rng, 6);
    CHECK(parse_term(print_term(t)) == t);
    CHECK(parse_term(print_term(t, PrintStyle::Full)) == t);
    CHECK(term_from_json(term_to_json(t)) == t);
  }
}

TEST_CASE("JSON form") {
  const auto j = term_to_json(parse_term("Sx0"));
  CHECK(j == nlohmann::json::parse(R"({"app":[{"atom":"S"},{"var":0}]})"));
}

TEST_CASE("expansion of derived atoms") {
  CHECK(expand_derived(parse_term("Ix")) == parse_term("SKKx"));
  CHECK(is_sk_combinator(expand_derived(parse_term("BML"))));
}
