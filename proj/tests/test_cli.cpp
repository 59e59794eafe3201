#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace {

struct Run {
  int code;
  std::string out;
};

// Runs the CLI with the given argument string; stderr is discarded.
Run run(const std::string& args) {
  const std::string cmd = std::string("\"") + SKBENCH_EXE + "\" " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::string out;
  std::array<char, 4096> buf{};
  while (std::size_t n = std::fread(buf.data(), 1, buf.size(), p)) out.append(buf.data(), n);
  const int status = pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("parse") {
  CHECK(run("parse 'SK(KS)'").out == "SK(KS)\n");
  CHECK(run("parse --full SKK").out == "((S·K)·K)\n");
  const auto j = nlohmann::json::parse(run("--json parse SKK").out);
  CHECK(j.at("size") == 3);
  CHECK(j.at("s") == 1);
  CHECK(run("parse 'S(K'").code == 1);
  CHECK(run("parse Sigma0").out == "S(S(S(SK)(S(KK)(S(KK)(SKK))))(K(SKK)))K\n");
}

TEST_CASE("reduce") {
  const auto r = run("reduce --trace SKKx");
  CHECK(r.code == 0);
  CHECK(lines(r.out).size() == 3);
  CHECK(lines(r.out).back() == "x");
  CHECK(run("reduce MM").code == 2);
  CHECK(run("reduce Jxyzw").out == "xy(xwz)\n");
  CHECK(run("normal-form 'K(K(SKK))xyz'").out == "z\n");
  const auto j = nlohmann::json::parse(run("--json reduce SKKx").out);
  CHECK(j.at("outcome") == "normal-form");
  CHECK(j.at("steps") == 2);
  CHECK(run("reduce --fuel 1 'SKKx'").code == 2);
}

TEST_CASE("template") {
  CHECK(run("template SK").out == "∅ ↣ ({t} ↣ t)\n");
  CHECK(run("template SKK").out == "{t} ↣ t\n");
  CHECK(run("template SS").out ==
        "{σ_i ↣ (σ′_i ↣ r′_i)}_n ↣ (({τ′ ↣ ({r′_i}_n ↣ s′)} ∪ ∪σ_i) ↣ ((τ′ ∪ ∪σ′_i) ↣ s′))\n");
  CHECK(run("template --expand 'KI'").out == "∅ ↣ ({t} ↣ t)\n");
  CHECK(run("template 'Sx'").code == 1);
  const auto j = nlohmann::json::parse(run("--json template K").out);
  CHECK(j.at("root").contains("tarrow"));
}

TEST_CASE("member") {
  CHECK(run("member SKK '({0} -> 0)'").out == "true\n");
  CHECK(run("member K '({0} -> ({} -> 0))'").out == "true\n");
  CHECK(run("member SK '({0} -> 0)'").out == "false\n");
  CHECK(run(R"(member SKK '{"arrow":{"set":[{"nat":0}],"elem":{"nat":0}}}')").out == "true\n");
  CHECK(run("--json member SKK '({0} -> 1)'").out == "{\"member\":false}\n");
}

TEST_CASE("enumerate") {
  CHECK(lines(run("enumerate SKK --max-nat 1 --max-rank 1").out).size() == 2);
  CHECK(run("enumerate K --max-nat 0 --max-rank 2").out == "({0} -> ({} -> 0))\n");
  CHECK(run("enumerate SK --max-nat 0 --max-rank 2").out == "({} -> ({0} -> 0))\n");
  const auto j = nlohmann::json::parse(lines(run("--json enumerate K --max-nat 0 --max-rank 2").out).at(0));
  CHECK(j.contains("arrow"));
}

TEST_CASE("apply") {
  {
    std::ofstream m("cli_m.txt"), n("cli_n.txt");
    m << "{({} -> 5), ({1} -> 6), ({0} -> 7)}\n";
    n << "{0}\n";
  }
  CHECK(run("apply cli_m.txt cli_n.txt").out == "{5,7}\n");
  {
    std::ofstream n("cli_n.json");
    n << R"([{"nat":1}])";
  }
  CHECK(run("apply cli_m.txt cli_n.json").out == "{5,6}\n");
  std::remove("cli_m.txt");
  std::remove("cli_n.txt");
  std::remove("cli_n.json");
}

TEST_CASE("companion") {
  const auto r = run("companion S '({({} -> ({0} -> 0))} -> ({({0} -> 0)} -> ({0} -> 0)))'");
  CHECK(r.code == 0);
  CHECK(r.out == "({({} -> ({0} -> 1))} -> ({({0} -> 0)} -> ({0} -> 1)))   (case ii)\n");
  const auto j = nlohmann::json::parse(
      run("--json companion SSS '({({} -> ({} -> ({0} -> 0)))} -> ({} -> ({0} -> 0)))' --mu 3").out);
  CHECK(j.at("case") == "i");
  CHECK(j.at("mu") == 3);
  CHECK(run("companion SKK '({0} -> 0)'").code == 1);
}

TEST_CASE("closure-sweep") {
  const auto r = run("closure-sweep --max-leaves 2 --max-rank 4 --max-set-size 1 --max-nat 0 --max-arity 1");
  CHECK(r.code == 0);
  const auto ls = lines(r.out);
  REQUIRE_FALSE(ls.empty());
  for (const auto& l : ls) {
    const auto j = nlohmann::json::parse(l);
    CHECK(j.at("member") == true);
    CHECK(j.contains("sigma"));
    CHECK(j.contains("companion"));
  }
}

TEST_CASE("search-identity") {
  const auto r = run("--json search-identity --max-s 3 --fuel 500");
  CHECK(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j.at("verdict") == "pass");
  CHECK(j.at("cases").size() == 4);
}

TEST_CASE("verify-paper") {
  CHECK(lines(run("verify-paper --list").out).size() == 12);
  CHECK(run("verify-paper --case sigma0-identity").code == 0);
  const auto j = nlohmann::json::parse(run("--json verify-paper --case thm1-k").out);
  CHECK(j.at("verdict") == "pass");
  CHECK(run("verify-paper --case nope").code == 1);
}

TEST_CASE("config and usage errors") {
  {
    std::ofstream c("cli.cfg");
    c << "fuel=1\n";
  }
  CHECK(run("--config cli.cfg reduce SKKx").code == 2);
  {
    std::ofstream c("cli.cfg");
    c << "bogus=1\n";
  }
  CHECK(run("--config cli.cfg reduce SKKx").code == 1);
  std::remove("cli.cfg");
  CHECK(run("").code == 1);
  CHECK(run("frobnicate").code == 1);
}
