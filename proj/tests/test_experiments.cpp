#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <fstream>

#include "ski/error.hpp"
#include "ski/experiments.hpp"

using namespace ski;

TEST_CASE("config lines") {
  Config c;
  apply_config_line(c, "fuel = 77");
  apply_config_line(c, "  # comment");
  apply_config_line(c, "");
  apply_config_line(c, "max_rank=2  # trailing");
  apply_config_line(c, "max_nat=3");
  apply_config_line(c, "max_s=4");
  CHECK(c.fuel == 77);
  CHECK(c.bounds.max_rank == 2);
  CHECK(c.bounds.max_nat == 3);
  CHECK(c.max_s == 4);
  CHECK_THROWS_AS(apply_config_line(c, "colour=blue"), PreconditionError);
  CHECK_THROWS_AS(apply_config_line(c, "fuel"), PreconditionError);
}

TEST_CASE("config file") {
  const std::string path = "test_experiments.cfg";
  {
    std::ofstream out(path);
    out << "# sample\nwidth=12\nmax_set_size=1\n";
  }
  const Config c = load_config(path);
  CHECK(c.width == 12);
  CHECK(c.bounds.max_set_size == 1);
  std::remove(path.c_str());
  CHECK_THROWS(load_config("does-not-exist.cfg"));
}

TEST_CASE("report verdicts") {
  ExperimentReport r;
  r.cases.push_back({"a", true, false, {}});
  r.finish();
  CHECK(r.verdict == Verdict3::Pass);
  r.cases.push_back({"b", true, true, {}});
  r.finish();
  CHECK(r.verdict == Verdict3::InconclusiveBounds);
  r.cases.push_back({"c", false, false, {}});
  r.finish();
  CHECK(r.verdict == Verdict3::Fail);
  const auto j = to_json(r);
  CHECK(j.at("verdict") == "fail");
  CHECK(j.at("cases").size() == 3);
}

TEST_CASE("identity search on small terms") {
  const auto r3 = search_identity(3, 500, 500);
  CHECK(r3.verdict == Verdict3::Pass);
  CHECK(r3.cases.size() == 4);
  const auto r1 = search_identity(1, 500, 500);
  CHECK(r1.verdict == Verdict3::Pass);
  CHECK(r1.cases.size() == 1);
}

TEST_CASE("verify-paper single cases") {
  Config c;
  for (const char* name : {"eq15-skk", "ex2-ki", "ex2-kstarstar", "ex1-sk", "ex2-ss", "thm1-k", "sk-sksk",
                           "sigma0-identity", "thm4-sigma0"}) {
    CAPTURE(name);
    const auto r = verify_paper(c, std::string(name));
    REQUIRE(r.cases.size() == 1);
    CHECK(r.cases[0].ok);
    CHECK(r.verdict == Verdict3::Pass);
  }
  CHECK_THROWS_AS(verify_paper(c, std::string("no-such-case")), PreconditionError);
  CHECK(paper_case_names().size() == 12);
}

TEST_CASE("closure sweep on tiny terms") {
  const auto s = closure_sweep(2, Bounds{4, 1, 0, 1});
  CHECK(s.ok());
  CHECK(s.terms == 2);
  CHECK_FALSE(s.records.empty());
  CHECK(s.findings.empty());
}
