// spincorr: command-line front end for the correlation checkers.
//
// Exit codes: 0 all checks passed, 1 violation found (or an expected property
// failed), 2 input or usage error.

#include "spincorr/dynamics.hpp"
#include "spincorr/harness.hpp"
#include "spincorr/io.hpp"
#include "spincorr/measures.hpp"
#include "spincorr/three_site.hpp"
#include "spincorr/tilt_sampler.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

using namespace spincorr;

namespace {

constexpr int kOk = 0;
constexpr int kViolation = 1;
constexpr int kInputError = 2;

struct CommonFlags {
  std::string input;
  std::string format = "json";
  double tolerance = 1e-9;
  std::uint64_t seed = 1;
  std::size_t budget = 200;
  std::string mode = "exact";
  bool opt_in_n6 = false;
  std::vector<std::string> expect;
  std::vector<double> times;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

CheckOptions check_options(const CommonFlags& f) {
  CheckOptions o;
  o.tolerance = f.tolerance;
  o.allow_six_sites = f.opt_in_n6;
  return o;
}

Json envelope(const std::string& command, const CommonFlags& f) {
  Json j{{"format_version", kFormatVersion}, {"command", command}};
  if (!f.input.empty()) j["input"] = f.input;
  return j;
}

void emit(const Json& report, const std::string& format) {
  if (format == "markdown")
    std::cout << to_markdown(report);
  else
    std::cout << report.dump(2) << '\n';
}

Json require_input(const CommonFlags& f) {
  if (f.input.empty()) throw UsageError("--input is required");
  return read_json_file(f.input);
}

// Fails with a usage error when an --expect name is not one of `known`.
void validate_expectations(const CommonFlags& f, const std::set<std::string>& known) {
  for (const auto& e : f.expect)
    if (!known.count(e)) {
      std::string list;
      for (const auto& k : known) list += (list.empty() ? "" : ", ") + k;
      throw UsageError("unknown --expect property '" + e + "' (known: " + list + ")");
    }
}

int finish(Json& report, bool violation, const CommonFlags& f) {
  report["status"] = violation ? "violation" : "ok";
  emit(report, f.format);
  return violation ? kViolation : kOk;
}

template <class T>
Json measure_checks(const Measure<T>& mu, const CommonFlags& f, bool& chain_ok) {
  const CheckOptions opts = check_options(f);
  const auto assoc = is_associated(mu, opts);
  const auto lattice = satisfies_lattice(mu, opts);
  const auto down = is_downward_fkg(mu, opts);
  TiltSampler sampler(mu.sites(), f.seed);
  const auto dca = dca_falsify(mu, sampler, f.budget, opts);
  // lattice => DCA => downward FKG => associated; search_exhausted counts as
  // not refuted.
  chain_ok = (!lattice.holds() || !dca.fails()) && (dca.fails() || down.holds()) && (!down.holds() || assoc.holds());
  return Json{{"associated", to_json(assoc)},
              {"lattice", to_json(lattice)},
              {"downward_fkg", to_json(down)},
              {"dca", to_json(dca)}};
}

int run_check_measure(const CommonFlags& f) {
  validate_expectations(f, {"associated", "lattice", "downward_fkg", "dca"});
  const Json input = require_input(f);
  Json report = envelope("check-measure", f);
  bool chain_ok = true;
  Json checks;
  if (f.mode == "float" || is_float_measure(input)) {
    const FloatMeasure mu = parse_float_measure(input);
    report["mode"] = "float";
    checks = measure_checks(mu, f, chain_ok);
  } else {
    const ExactMeasure mu = normalize(parse_weights(input));
    report["mode"] = "exact";
    checks = measure_checks(mu, f, chain_ok);
    if (mu.sites() == 3) report["three_site"] = to_json(classify(ThreeSiteCoords::from_weights(mu.weights())));
  }
  report["checks"] = checks;
  report["chain_consistent"] = chain_ok;
  bool violation = !chain_ok;
  for (const auto& e : f.expect)
    if (checks[e]["verdict"] == "fails") violation = true;
  report["expected"] = f.expect;
  return finish(report, violation, f);
}

int run_check_rates(const CommonFlags& f) {
  validate_expectations(f, {"attractive", "independent-flips", "constant-deaths", "death-constant-on-nonzero",
                            "additive", "birth-submodular"});
  const RateTable r = parse_rate_table(require_input(f));
  Json report = envelope("check-rates", f);
  Json additive = Json::array(), submodular = Json::array();
  bool all_additive = true, all_submodular = true;
  for (int x = 0; x < r.sites(); ++x) {
    const auto d = additive_decomposition(r, x);
    all_additive = all_additive && d.additive;
    additive.push_back(to_json(d, r.sites()));
    const auto s = check_birth_submodularity(r, x);
    all_submodular = all_submodular && s.holds();
    submodular.push_back(to_json(s));
  }
  const auto attractive = is_attractive(r);
  const auto deaths = death_constant_on_nonzero(r);
  Json properties{{"attractive", attractive.holds()},
                  {"independent-flips", has_independent_flips(r)},
                  {"constant-deaths", has_constant_deaths(r)},
                  {"death-constant-on-nonzero", deaths.holds()},
                  {"additive", all_additive},
                  {"birth-submodular", all_submodular}};
  report["properties"] = properties;
  report["checks"] = Json{{"attractive", to_json(attractive)}, {"death_constant_on_nonzero", to_json(deaths)}};
  report["additive_decomposition"] = additive;
  report["birth_submodular"] = submodular;
  bool violation = false;
  for (const auto& e : f.expect)
    if (!properties[e].get<bool>()) violation = true;
  report["expected"] = f.expect;
  return finish(report, violation, f);
}

std::vector<double> grid_or_default(const CommonFlags& f, std::vector<double> fallback) {
  const auto& t = f.times.empty() ? fallback : f.times;
  for (double v : t)
    if (!(v >= 0) || !std::isfinite(v)) throw UsageError("--t values must be finite and >= 0");
  return t;
}

int run_evolve(const CommonFlags& f, const std::string& system_path) {
  const Json input = require_input(f);
  if (system_path.empty()) throw UsageError("--system is required");
  const RateTable r = parse_rate_table(read_json_file(system_path));
  const FloatMeasure mu = is_float_measure(input) ? parse_float_measure(input) : to_float(normalize(parse_weights(input)));
  if (mu.sites() != r.sites()) throw InputError("/n", "measure and system have different site counts");
  const Generator q = build_generator(r);
  Json report = envelope("evolve", f);
  report["system"] = system_path;
  Json results = Json::array();
  for (double t : grid_or_default(f, {0.0}))
    results.push_back(Json{{"t", t}, {"measure", to_json(semigroup_apply(q, mu, t))}});
  report["results"] = results;
  return finish(report, false, f);
}

int run_classify3(const CommonFlags& f) {
  validate_expectations(f, {"lattice", "dca", "downward_fkg", "associated"});
  const ThreeSiteCoords m = parse_three_site(require_input(f));
  const auto v = classify(m);
  Json report = envelope("classify3", f);
  report["coordinates"] = to_json(m);
  report["verdicts"] = to_json(v);
  const bool precondition = margins(m, InequalitySystem::top_covariance).holds() &&
                            margins(m, InequalitySystem::lower_lattice).holds();
  report["diagonal_bound"] = precondition ? Json(check_diagonal_bound(m)) : Json(nullptr);
  bool violation = false;
  for (const auto& e : f.expect)
    if (!report["verdicts"][e].get<bool>()) violation = true;
  report["expected"] = f.expect;
  return finish(report, violation, f);
}

int run_verify(const CommonFlags& f, const std::string& claim, const std::string& system_path,
               const std::string& family, std::size_t count) {
  ExperimentSpec spec;
  if (!f.input.empty()) {
    spec = parse_experiment_spec(read_json_file(f.input));
  } else {
    if (claim.empty() || system_path.empty()) throw UsageError("give --input, or --claim together with --system");
    try {
      spec.claim = preservation_claim_from_string(claim);
      spec.family = initial_family_from_string(family);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    spec.system = parse_rate_table(read_json_file(system_path));
    spec.measure_count = count;
    spec.seed = f.seed;
    if (spec.family == InitialFamily::explicit_measures) throw UsageError("the explicit family needs an --input spec");
  }
  if (!f.times.empty()) spec.times = grid_or_default(f, {});
  spec.check.tolerance = f.tolerance;
  spec.check.allow_six_sites = f.opt_in_n6;
  const auto outcome = verify_preservation(spec);
  Json report = envelope("verify-theorem", f);
  report["spec"] = to_json(spec);
  report["outcome"] = to_json(outcome);
  return finish(report, !outcome.all_hold(), f);
}

int run_search(const CommonFlags& f, const std::string& system_path, const std::string& target) {
  const std::string path = system_path.empty() ? f.input : system_path;
  if (path.empty()) throw UsageError("--system is required");
  const RateTable r = parse_rate_table(read_json_file(path));
  SearchOptions opts;
  opts.seed = f.seed;
  opts.budget = f.budget;
  opts.check = check_options(f);
  if (!f.times.empty()) opts.times = grid_or_default(f, {});
  ConverseTarget t;
  try {
    t = converse_target_from_string(target);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const auto outcome = search_counterexample(r, t, opts);
  Json report = envelope("search", f);
  report["system"] = path;
  report["outcome"] = to_json(outcome);
  return finish(report, outcome.found(), f);
}

int run_fixtures(const CommonFlags& f, const std::string& dir) {
  std::filesystem::create_directories(dir);
  Json report = envelope("fixtures", f);
  Json written = Json::array();
  for (const auto& [name, doc] : builtin_fixtures()) {
    const auto path = std::filesystem::path(dir) / name;
    std::ofstream out(path);
    if (!out) throw InputError(path.string(), "cannot write file");
    out << doc.dump(2) << '\n';
    written.push_back(path.string());
  }
  report["written"] = written;
  return finish(report, false, f);
}

void add_common(CLI::App* cmd, CommonFlags& f, bool with_input = true) {
  if (with_input) cmd->add_option("--input", f.input, "input JSON file");
  cmd->add_option("--format", f.format, "report format")->check(CLI::IsMember({"json", "markdown"}));
  cmd->add_option("--tolerance", f.tolerance, "margin tolerance for float measures");
  cmd->add_option("--seed", f.seed, "random seed");
  cmd->add_option("--budget", f.budget, "sampled tilts or random starts");
  cmd->add_option("--mode", f.mode, "arithmetic mode")->check(CLI::IsMember({"exact", "float"}));
  cmd->add_flag("--opt-in-n6", f.opt_in_n6, "allow the six-site association sweep");
  cmd->add_option("--expect", f.expect, "properties that must hold (comma list)")->delimiter(',');
  cmd->add_option("--t", f.times, "time grid (comma list)")->delimiter(',');
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Correlation inequalities for measures and spin systems on {0,1}^n"};
  app.require_subcommand(1);
  CommonFlags f;
  std::string system_path, claim, family = "random-lattice", target = "attractiveness", out_dir = "fixtures";
  std::size_t count = 10;

  auto* check_measure = app.add_subcommand("check-measure", "association, lattice, downward FKG and DCA");
  add_common(check_measure, f);
  auto* check_rates = app.add_subcommand("check-rates", "classify birth and death rates");
  add_common(check_rates, f);
  auto* evolve = app.add_subcommand("evolve", "apply the semigroup to a measure");
  add_common(evolve, f);
  evolve->add_option("--system", system_path, "rate table JSON");
  auto* classify3 = app.add_subcommand("classify3", "closed-form verdicts for three sites");
  add_common(classify3, f);
  auto* verify = app.add_subcommand("verify-theorem", "preservation experiment");
  add_common(verify, f);
  verify->add_option("--claim", claim, "preservation claim");
  verify->add_option("--system", system_path, "rate table JSON");
  verify->add_option("--family", family, "initial measure family");
  verify->add_option("--count", count, "number of random initial measures");
  auto* search = app.add_subcommand("search", "converse counterexample search");
  add_common(search, f);
  search->add_option("--system", system_path, "rate table JSON");
  search->add_option("--target", target, "rate condition whose failure is exploited");
  auto* fixtures = app.add_subcommand("fixtures", "write the fixture corpus");
  add_common(fixtures, f, false);
  fixtures->add_option("--output-dir", out_dir, "target directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    const auto parsed = app.get_subcommands();
    Json report = envelope(parsed.empty() ? "none" : parsed.front()->get_name(), f);
    report["status"] = "usage-error";
    report["error"] = Json{{"location", "arguments"}, {"message", e.what()}};
    emit(report, f.format == "markdown" ? f.format : "json");
    app.exit(e);
    return kInputError;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    if (command == "check-measure") return run_check_measure(f);
    if (command == "check-rates") return run_check_rates(f);
    if (command == "evolve") return run_evolve(f, system_path);
    if (command == "classify3") return run_classify3(f);
    if (command == "verify-theorem") return run_verify(f, claim, system_path, family, count);
    if (command == "search") return run_search(f, system_path, target);
    if (command == "fixtures") return run_fixtures(f, out_dir);
  } catch (const InputError& e) {
    Json report = envelope(command, f);
    report["status"] = "input-error";
    report["error"] = Json{{"location", e.location()}, {"message", e.message()}};
    emit(report, f.format);
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const UsageError& e) {
    Json report = envelope(command, f);
    report["status"] = "usage-error";
    report["error"] = Json{{"location", "arguments"}, {"message", e.what()}};
    emit(report, f.format);
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const BudgetExceeded& e) {
    Json report = envelope(command, f);
    report["status"] = "budget-exceeded";
    report["error"] = Json{{"location", "budget"}, {"message", e.what()}};
    emit(report, f.format);
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::invalid_argument& e) {
    Json report = envelope(command, f);
    report["status"] = "input-error";
    report["error"] = Json{{"location", "input"}, {"message", e.what()}};
    emit(report, f.format);
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  }
  return kInputError;
}
