#pragma once

// Randomized measure generators, preservation experiments over the
// semigroup, converse counterexample search, and constructors for the named
// example measures and spin systems.

#include "spincorr/dynamics.hpp"
#include "spincorr/lattice.hpp"
#include "spincorr/measures.hpp"
#include "spincorr/rational.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace spincorr {

enum class MeasureMode { generic, strictly_positive, lattice, product };
std::string to_string(MeasureMode m);
MeasureMode measure_mode_from_string(const std::string& name);

/// Exact random weights. `generic` may contain zeros; `lattice` draws
/// log-supermodular candidates (sometimes restricted to an interval of the
/// cube) and keeps the first one that passes satisfies_lattice, throwing
/// BudgetExceeded after `rejection_budget` rejected candidates.
WeightVector<Rational> random_measure(std::uint64_t seed, int n, MeasureMode mode,
                                      std::size_t rejection_budget = 1000);

// ---- named constructors ----

/// Law of (1{pi(i) != i})_i for a uniform permutation pi of k points, 2 <= k <= 5.
ExactMeasure derangement_measure(int k);

/// Two three-site weight vectors, as printed (unnormalized):
///   first:  a = b_i = 1/6, c_i = eps, d = 1/3    (DCA but not lattice)
///   second: a = 1/3, b_i = eps, c_i = d = 1/6    (associated but not downward FKG)
/// Throws std::domain_error, quoting the margins, if eps does not produce
/// exactly those verdicts.
std::pair<WeightVector<Rational>, WeightVector<Rational>> separating_measures(const Rational& eps);

/// beta(x, eta) = lambda * (occupied neighbours of x), delta(x, eta) = delta.
RateTable contact_process(int n, const std::vector<std::pair<int, int>>& edges,
                          const Rational& lambda, const Rational& delta);
std::vector<std::pair<int, int>> path_edges(int n);

/// Constant per-site rates.
RateTable independent_flips(const std::vector<Rational>& births, const std::vector<Rational>& deaths);

/// Three sites; a site is born at rate 1 when both others are occupied and
/// dies at rate 1 when both others are empty. All other rates vanish.
RateTable consensus_flip_system();

/// Only site u has a nonzero rate: beta(u, .) = birth.
RateTable single_site_birth_system(int n, int u, std::vector<Rational> birth);

/// Random increasing birth table at site u satisfying
/// beta(u, a OR b) + beta(u, a AND b) <= beta(u, a) + beta(u, b): either an
/// additive table or a capped weighted count.
RateTable random_submodular_birth_system(std::uint64_t seed, int n, int u);

/// Random rate table with rationals in [0, max_rate].
RateTable random_rate_table(std::uint64_t seed, int n, int max_rate = 3);

/// Product measure with P(eta(x) = 1) = marginals[x].
ExactMeasure product_measure(const std::vector<Rational>& marginals);

/// Point mass at c.
ExactMeasure point_mass(int n, ConfigIndex c);

// ---- preservation experiments ----

/// A preservation statement: a rate condition under which the semigroup
/// keeps a correlation property.
enum class PreservationClaim {
  attractive_association,     // attractive rates keep association
  independent_flips_lattice,  // independent flips keep the lattice condition
  additive_downward_fkg,      // constant deaths, additive births keep downward FKG
  submodular_dca,             // constant deaths, increasing submodular births keep DCA
};
std::string to_string(PreservationClaim c);
PreservationClaim preservation_claim_from_string(const std::string& name);
/// Property name used in reports: "associated", "lattice", "downward_fkg", "dca".
std::string preserved_property(PreservationClaim c);

enum class InitialFamily { explicit_measures, product, random_lattice, random_generic };
std::string to_string(InitialFamily f);
InitialFamily initial_family_from_string(const std::string& name);

struct ExperimentSpec {
  PreservationClaim claim = PreservationClaim::attractive_association;
  RateTable system = RateTable::zero(1);
  InitialFamily family = InitialFamily::explicit_measures;
  std::vector<ExactMeasure> initial;  // used when family == explicit_measures
  std::size_t measure_count = 10;     // drawn measures for the random families
  std::vector<double> times{0.1, 0.5, 1.0, 2.0};
  std::uint64_t seed = 1;
  std::size_t tilt_budget = 200;  // DCA searches on four or more sites
  CheckOptions check;
};

struct ExperimentCell {
  std::size_t measure = 0;  // index into ExperimentOutcome::measures
  double t = 0;
  PropertyReport report;
};

struct ExperimentOutcome {
  PreservationClaim claim = PreservationClaim::attractive_association;
  std::string property;
  bool hypotheses_hold = false;
  std::vector<std::string> hypothesis_failures;
  std::vector<ExactMeasure> measures;   // initial measures that have the property
  std::vector<std::size_t> skipped;     // draw indices whose measure lacked it
  std::vector<ExperimentCell> cells;    // one per (measure, t)
  std::optional<std::size_t> violation; // first cell that fails after re-verification

  bool all_hold() const { return !violation.has_value(); }
  /// A violation under satisfied hypotheses contradicts the claim.
  bool inconsistent() const { return violation.has_value() && hypotheses_hold; }
  double min_margin() const;
};

/// Evaluates the claimed property on mu S(t) for every initial measure and
/// grid time. Violations beyond the tolerance are re-evaluated with a
/// 1e-16 Poisson tail before being reported. Throws std::invalid_argument
/// for a negative or non-finite time.
ExperimentOutcome verify_preservation(const ExperimentSpec& spec);

/// Evaluates `property` on a float measure, as the experiments do.
PropertyReport check_evolved(const std::string& property, const FloatMeasure& mu,
                             std::uint64_t tilt_seed, std::size_t tilt_budget,
                             const CheckOptions& opts);

// ---- counterexample search ----

/// Rate conditions that are necessary for preservation; a system violating
/// one should admit an initial measure whose evolution loses the property.
enum class ConverseTarget {
  attractiveness,       // association from product measures
  birth_submodularity,  // downward FKG from product measures
  independent_flips,    // lattice condition from product or lattice measures
};
std::string to_string(ConverseTarget t);
ConverseTarget converse_target_from_string(const std::string& name);
std::string searched_property(ConverseTarget t);

struct SearchOptions {
  std::uint64_t seed = 1;
  std::size_t budget = 200;  // random initial measures after the derivative phase
  std::vector<double> times{1.0 / 64, 1.0 / 16, 1.0 / 4, 1.0};
  Rational epsilon{1, 1000};  // marginal of the background sites
  CheckOptions check;
};

struct DerivativeCertificate {
  Rational rho;     // marginal at the first site of the pair
  Rational lambda;  // marginal at the second site
  int x = 0, y = 0;
  ConfigIndex background = 0;  // gamma: occupied background sites
  SiteMask zero_sites = 0;     // conditioning set of the functional
  Rational value;              // functional at t = 0 (always 0)
  Rational derivative;         // strictly negative
};

struct SearchOutcome {
  ConverseTarget target = ConverseTarget::attractiveness;
  std::string property;
  Verdict verdict = Verdict::search_exhausted;  // fails when a witness was found
  std::optional<DerivativeCertificate> certificate;
  std::optional<ExactMeasure> initial;
  double t = 0;
  std::optional<PropertyReport> report;  // the property on initial S(t)
  std::size_t functionals_checked = 0;
  std::size_t evolutions_checked = 0;

  bool found() const { return verdict == Verdict::fails; }
};

/// Derivative-at-zero functionals on product measures over a 1/8 grid of
/// marginals first, then evolution of the most promising start on the time
/// grid, then random starts until the budget runs out.
SearchOutcome search_counterexample(const RateTable& r, ConverseTarget target,
                                    const SearchOptions& opts = {});

// ---- single-site facts ----

/// Minimum slacks over the sampled functions, configurations and times:
///   product:     [S h][S (f g h)] - [S (f h)][S (g h)] for increasing f, g and positive h
///   positivity:  min S h over configurations, for admissible tilts h
///   decreasing:  S h(lower) - S h(upper) over single-site raises
///   lattice:     S h(a OR b) S h(a AND b) - S h(a) S h(b)
///   ratio:       f_t(upper) - f_t(lower) with f_t = S(fh) / S h
/// Each h is scaled to maximum 1 before evolving.
struct FactsAudit {
  double product = 0;
  double positivity = 0;
  double decreasing = 0;
  double lattice = 0;
  double ratio = 0;
  std::size_t evaluations = 0;

  bool holds(double tolerance) const;
};

FactsAudit audit_single_site_facts(const RateTable& r, std::uint64_t seed, std::size_t triples,
                                   const std::vector<double>& times);

/// Random increasing function with values in [0, 1].
RealFunction<Rational> random_increasing_function(std::uint64_t seed, int n);

}  // namespace spincorr
