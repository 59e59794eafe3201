// skbench: command-line front end for the reduction engine, the graph model,
// templates and the experiment drivers.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "ski/companion.hpp"
#include "ski/error.hpp"
#include "ski/experiments.hpp"
#include "ski/model.hpp"
#include "ski/rewrite.hpp"
#include "ski/template.hpp"
#include "ski/term.hpp"

using namespace ski;

namespace {

enum Exit { kOk = 0, kUsage = 1, kBounded = 2, kSemantic = 3, kExperimentFail = 4 };

struct Options {
  bool json = false;
  std::string config_path;
  bool expand = false;
  // Flag overrides; 0 keeps the config value.
  std::size_t fuel = 0, width = 0, max_rank = 0, max_set_size = 0, max_arity = 0, max_s = 0;
  long long max_nat = -1;
};

Config effective_config(const Options& o) {
  Config c = o.config_path.empty() ? Config{} : load_config(o.config_path);
  if (o.fuel) c.fuel = o.fuel;
  if (o.width) c.width = o.width;
  if (o.max_rank) c.bounds.max_rank = o.max_rank;
  if (o.max_set_size) c.bounds.max_set_size = o.max_set_size;
  if (o.max_arity) c.bounds.max_arity = o.max_arity;
  if (o.max_nat >= 0) c.bounds.max_nat = static_cast<std::uint64_t>(o.max_nat);
  if (o.max_s) c.max_s = o.max_s;
  return c;
}

// A stdlib name (e.g. Sigma0) or term text.
Term read_term(const std::string& text, bool expand) {
  for (const auto& name : stdlib_names())
    if (name == text) return stdlib_lookup(name);
  Term t = parse_term(text);
  return expand ? expand_derived(t) : t;
}

GElem read_elem(const std::string& text) {
  const auto first = text.find_first_not_of(" \t");
  if (first != std::string::npos && text[first] == '{' && text.find('"') != std::string::npos)
    return elem_from_json(nlohmann::json::parse(text));
  return parse_elem(text);
}

GSet read_set_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '[') return set_from_json(nlohmann::json::parse(text));
  return parse_set(text);
}

int print_report(const ExperimentReport& r, bool json) {
  if (json) {
    std::cout << to_json(r).dump() << "\n";
  } else {
    for (const auto& c : r.cases)
      std::cout << (c.ok ? "ok   " : "FAIL ") << c.name << (c.truncated ? " (truncated)" : "") << "  "
                << c.detail.dump() << "\n";
    std::cout << r.name << ": " << verdict_name(r.verdict) << " (" << r.cases.size() << " cases, "
              << r.wall_seconds << " s)\n";
  }
  return r.verdict == Verdict3::Fail ? kExperimentFail : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Combinatory logic workbench: reduction, graph-model denotations and templates"};
  app.require_subcommand(1);
  Options o;
  app.add_flag("--json", o.json, "Machine-readable JSON output");
  app.add_option("--config", o.config_path, "key=value config file")->check(CLI::ExistingFile);

  auto add_term = [](CLI::App* sub, std::string& term) {
    sub->add_option("term", term, "Term text, e.g. \"S(KS)K\", or a stdlib name")->required();
  };
  auto add_bounds = [&](CLI::App* sub) {
    sub->add_option("--max-rank", o.max_rank, "Largest element rank");
    sub->add_option("--max-set-size", o.max_set_size, "Largest finite set");
    sub->add_option("--max-nat", o.max_nat, "Largest natural");
    sub->add_option("--max-arity", o.max_arity, "Largest indexed-union arity");
  };

  std::string term, elem, file_m, file_n, only_case;
  bool trace = false, full = false;
  std::uint64_t mu = 0;
  std::size_t max_leaves = 4;

  auto* parse = app.add_subcommand("parse", "Parse and print a term");
  add_term(parse, term);
  parse->add_flag("--full", full, "Fully parenthesized output");

  auto* reduce_cmd = app.add_subcommand("reduce", "Leftmost-outermost reduction");
  add_term(reduce_cmd, term);
  reduce_cmd->add_option("--fuel", o.fuel, "Step limit");
  reduce_cmd->add_flag("--trace", trace, "Print every step");

  auto* nf = app.add_subcommand("normal-form", "Print the normal form only");
  add_term(nf, term);
  nf->add_option("--fuel", o.fuel, "Step limit");

  auto* tpl_cmd = app.add_subcommand("template", "Template of the generic member of a denotation");
  add_term(tpl_cmd, term);
  tpl_cmd->add_flag("--expand", o.expand, "Expand B, I, L, M into S and K first");

  auto* member = app.add_subcommand("member", "Membership of an element in a denotation");
  add_term(member, term);
  member->add_option("element", elem, "Element text \"({0} -> 0)\" or JSON")->required();
  member->add_flag("--expand", o.expand, "Expand B, I, L, M into S and K first");

  auto* enumerate = app.add_subcommand("enumerate", "Members of a denotation within bounds");
  add_term(enumerate, term);
  enumerate->add_flag("--expand", o.expand, "Expand B, I, L, M into S and K first");
  add_bounds(enumerate);

  auto* apply_cmd = app.add_subcommand("apply", "M . N for explicit sets read from files");
  apply_cmd->add_option("m", file_m, "File holding M")->required()->check(CLI::ExistingFile);
  apply_cmd->add_option("n", file_n, "File holding N")->required()->check(CLI::ExistingFile);

  auto* comp = app.add_subcommand("companion", "B_mu companion of a B0-based member");
  add_term(comp, term);
  comp->add_option("element", elem, "Element text or JSON")->required();
  comp->add_option("--mu", mu, "Replacement natural (default: one above every natural in the element)");

  auto* sweep = app.add_subcommand("closure-sweep", "Companion closure over S-only terms");
  sweep->add_option("--max-leaves", max_leaves, "Largest number of S leaves");
  add_bounds(sweep);

  auto* search = app.add_subcommand("search-identity", "Bounded search for S-only identities");
  search->add_option("--max-s", o.max_s, "Largest number of S leaves");
  search->add_option("--fuel", o.fuel, "Reduction depth limit");
  search->add_option("--width", o.width, "Breadth limit per reduction level");

  auto* verify = app.add_subcommand("verify-paper", "Golden suite");
  verify->add_option("--case", only_case, "Run a single case");
  verify->add_flag("--list", full, "List case names");
  add_bounds(verify);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    const Config cfg = effective_config(o);

    if (parse->parsed()) {
      const Term t = read_term(term, false);
      if (o.json) {
        const auto st = term_stats(t);
        std::cout << nlohmann::json{{"term", term_to_json(t)},
                                    {"text", print_term(t)},
                                    {"size", st.size},
                                    {"s", st.s_count},
                                    {"k", st.k_count},
                                    {"vars", st.var_count}}
                         .dump()
                  << "\n";
      } else {
        std::cout << print_term(t, full ? PrintStyle::Full : PrintStyle::Minimal) << "\n";
      }
      return kOk;
    }

    if (reduce_cmd->parsed() || nf->parsed()) {
      const Term t = read_term(term, false);
      const auto tr = reduce(t, cfg.fuel);
      if (o.json) {
        std::cout << (trace ? trace_to_json(tr)
                            : nlohmann::json{{"outcome", outcome_name(tr.outcome)},
                                             {"steps", tr.steps.size()},
                                             {"final", term_to_json(tr.final_term)}})
                             .dump()
                  << "\n";
      } else {
        if (trace)
          for (const auto& s : tr.steps)
            std::cout << print_term(s.term) << "    [" << position_to_string(s.redex) << "]\n";
        std::cout << print_term(tr.final_term) << "\n";
        if (tr.outcome != Outcome::NormalForm) std::cerr << outcome_name(tr.outcome) << "\n";
      }
      return tr.outcome == Outcome::NormalForm ? kOk : kBounded;
    }

    if (tpl_cmd->parsed()) {
      const Template tpl = template_of(read_term(term, o.expand));
      std::cout << (o.json ? to_json(tpl).dump() : to_text(tpl)) << "\n";
      return kOk;
    }

    if (member->parsed()) {
      const bool yes = member_via_template(read_term(term, o.expand), read_elem(elem));
      std::cout << (o.json ? nlohmann::json{{"member", yes}}.dump() : std::string(yes ? "true" : "false")) << "\n";
      return kOk;
    }

    if (enumerate->parsed()) {
      const GSet s = enumerate_template(template_of(read_term(term, o.expand)), cfg.bounds);
      if (o.json) {
        for (const auto& e : s) std::cout << to_json(e).dump() << "\n";
      } else {
        for (const auto& e : s) std::cout << to_text(e) << "\n";
      }
      return kOk;
    }

    if (apply_cmd->parsed()) {
      const auto r = bullet(read_set_file(file_m), read_set_file(file_n));
      std::cout << (o.json ? to_json(r.set).dump() : to_text(r.set)) << "\n";
      return kOk;
    }

    if (comp->parsed()) {
      const Term t = read_term(term, false);
      const GElem e = read_elem(elem);
      const std::uint64_t m = mu ? mu : choose_mu(e);
      const auto r = companion_detail(t, e, m);
      if (o.json) {
        auto all = nlohmann::json::array();
        for (const auto& c : r.candidates)
          all.push_back({{"case", case_name(c.which)}, {"variable", c.variable}, {"value", to_text(c.value)}});
        std::cout << nlohmann::json{{"companion", to_text(r.companion)}, {"case", case_name(r.which)},
                                    {"mu", m}, {"candidates", all}}
                         .dump()
                  << "\n";
      } else {
        std::cout << to_text(r.companion) << "   (case " << case_name(r.which) << ")\n";
        if (r.ambiguous())
          for (const auto& d : r.distinct) std::cout << "  candidate " << to_text(d) << "\n";
      }
      return kOk;
    }

    if (sweep->parsed()) {
      const auto r = closure_sweep(max_leaves, cfg.bounds);
      for (const auto& rec : r.records) std::cout << to_json(rec).dump() << "\n";
      for (const auto& f : r.findings) std::cout << nlohmann::json{{"finding", f}}.dump() << "\n";
      if (!o.json)
        std::cerr << r.terms << " terms, " << r.records.size() << " members checked, " << r.findings.size()
                  << " findings\n";
      return r.ok() ? kOk : kExperimentFail;
    }

    if (search->parsed()) return print_report(search_identity(cfg.max_s, cfg.fuel, cfg.width), o.json);

    if (verify->parsed()) {
      if (full) {
        for (const auto& n : paper_case_names()) std::cout << n << "\n";
        return kOk;
      }
      return print_report(verify_paper(cfg, only_case.empty() ? std::nullopt : std::optional(only_case)), o.json);
    }
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kUsage;
  } catch (const UnknownName& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const UnificationFailure& e) {
    std::cerr << "empty denotation: " << e.what() << "\n";
    return kSemantic;
  } catch (const UnsupportedShape& e) {
    std::cerr << "unsupported template shape: " << e.what() << "\n";
    return kSemantic;
  } catch (const NoCaseApplies& e) {
    std::cerr << "no companion case: " << e.what() << "\n";
    return kSemantic;
  } catch (const PreconditionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSemantic;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "json error: " << e.what() << "\n";
    return kUsage;
  }
  return kOk;
}
