#pragma once

// Experiment drivers shared by the command-line tool and the test suites.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "ski/companion.hpp"
#include "ski/model.hpp"
#include "ski/rewrite.hpp"
#include "ski/term.hpp"

namespace ski {

// key=value settings; '#' starts a comment. Keys: fuel, width, max_rank,
// max_set_size, max_nat, max_arity, max_s.
struct Config {
  std::size_t fuel = kDefaultFuel;
  std::size_t width = kDefaultWidth;
  Bounds bounds;
  std::size_t max_s = 6;
};

Config load_config(const std::string& path);
// Applies one key=value line; throws PreconditionError on unknown keys.
void apply_config_line(Config& c, const std::string& line);
nlohmann::json to_json(const Bounds& b);

enum class Verdict3 { Pass, Fail, InconclusiveBounds };
std::string verdict_name(Verdict3 v);

struct CaseRecord {
  std::string name;
  bool ok = false;
  bool truncated = false;
  nlohmann::json detail;
};

struct ExperimentReport {
  std::string name;
  nlohmann::json parameters;
  std::vector<CaseRecord> cases;
  Verdict3 verdict = Verdict3::Pass;
  double wall_seconds = 0;

  // Pass only if every case is ok; truncation where exactness is required
  // makes the verdict inconclusive.
  void finish();
};

nlohmann::json to_json(const ExperimentReport& r);

// Every S-only term with at most max_s leaves: identity behaviour within
// fuel, plus membership of ({0} -> 0) and, on a hit, the companion witness.
ExperimentReport search_identity(std::size_t max_s, std::size_t fuel, std::size_t width);

// Companion closure over the B0-based members found in the bounded
// enumerations of all S-only terms with at most max_leaves leaves.
struct ClosureSweep {
  std::vector<ClosureRecord> records;
  std::vector<nlohmann::json> findings;  // no-case-applies and other errors
  std::size_t terms = 0;
  bool ok() const;
};
ClosureSweep closure_sweep(std::size_t max_leaves, const Bounds& bounds);

// Golden suite of reference results; `only` restricts to one case tag.
std::vector<std::string> paper_case_names();
ExperimentReport verify_paper(const Config& config, const std::optional<std::string>& only = {});

}  // namespace ski
