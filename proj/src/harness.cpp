#include "spincorr/harness.hpp"

#include "spincorr/random.hpp"
#include "spincorr/three_site.hpp"
#include "spincorr/tilt_sampler.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace spincorr {

namespace {

std::size_t at(int i) { return static_cast<std::size_t>(i); }

// Independent sub-seed for the i-th job of a seeded run.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t i) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (i + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

template <class E, std::size_t N>
E lookup(const std::array<std::pair<E, const char*>, N>& table, const std::string& name,
         const char* what) {
  for (const auto& [value, text] : table)
    if (name == text) return value;
  throw std::invalid_argument(std::string("unknown ") + what + " '" + name + "'");
}

template <class E, std::size_t N>
std::string name_of(const std::array<std::pair<E, const char*>, N>& table, E value) {
  for (const auto& [v, text] : table)
    if (v == value) return text;
  throw std::logic_error("unnamed enumerator");
}

constexpr std::array<std::pair<MeasureMode, const char*>, 4> kModes{{
    {MeasureMode::generic, "generic"},
    {MeasureMode::strictly_positive, "strictly-positive"},
    {MeasureMode::lattice, "lattice"},
    {MeasureMode::product, "product"},
}};

constexpr std::array<std::pair<PreservationClaim, const char*>, 4> kClaims{{
    {PreservationClaim::attractive_association, "attractive-association"},
    {PreservationClaim::independent_flips_lattice, "independent-flips-lattice"},
    {PreservationClaim::additive_downward_fkg, "additive-downward-fkg"},
    {PreservationClaim::submodular_dca, "submodular-dca"},
}};

constexpr std::array<std::pair<InitialFamily, const char*>, 4> kFamilies{{
    {InitialFamily::explicit_measures, "explicit"},
    {InitialFamily::product, "product"},
    {InitialFamily::random_lattice, "random-lattice"},
    {InitialFamily::random_generic, "random-generic"},
}};

constexpr std::array<std::pair<ConverseTarget, const char*>, 3> kTargets{{
    {ConverseTarget::attractiveness, "attractiveness"},
    {ConverseTarget::birth_submodularity, "birth-submodularity"},
    {ConverseTarget::independent_flips, "independent-flips"},
}};

std::vector<Rational> generic_weights(Rng& rng, int n, bool allow_zero) {
  std::vector<Rational> w(config_count(n));
  bool any = false;
  for (auto& v : w) {
    v = (allow_zero && rng.chance(1, 3)) ? 0 : rng.between(1, 20);
    any = any || sgn(v) != 0;
  }
  if (!any) w[rng.below(w.size())] = 1;
  return w;
}

std::vector<Rational> log_supermodular_weights(Rng& rng, int n) {
  const ConfigIndex count = config_count(n);
  std::vector<Rational> field(at(n));
  for (auto& r : field) {
    const long num = rng.between(1, 6);
    r = ratio(num, rng.between(1, 6));
  }
  std::vector<Rational> coupling(count, Rational(1));
  for (SiteMask a = 0; a < count; ++a) {
    if (std::popcount(a) < 2 || rng.chance(1, 2)) continue;
    const long m = rng.between(1, 2);
    coupling[a] = ratio(m + rng.between(1, 4), m);
  }
  // An interval [lo, hi] of the cube is a sublattice, so restricting keeps
  // the lattice condition.
  ConfigIndex lo = 0, hi = count - 1;
  if (rng.chance(1, 3)) {
    hi = static_cast<ConfigIndex>(rng.below(count));
    lo = hi & static_cast<ConfigIndex>(rng.below(count));
  }
  std::vector<Rational> w(count, Rational(0));
  for (ConfigIndex c = 0; c < count; ++c) {
    if ((c & lo) != lo || (c & ~hi) != 0) continue;
    Rational v = 1;
    for (int x = 0; x < n; ++x)
      if ((c >> x) & 1u) v *= field[at(x)];
    for (SiteMask a = 0; a < count; ++a)
      if (std::popcount(a) >= 2 && (c & a) == a) v *= coupling[a];
    w[c] = v;
  }
  return w;
}

}  // namespace

std::string to_string(MeasureMode m) { return name_of(kModes, m); }
MeasureMode measure_mode_from_string(const std::string& name) { return lookup(kModes, name, "measure mode"); }
std::string to_string(PreservationClaim c) { return name_of(kClaims, c); }
PreservationClaim preservation_claim_from_string(const std::string& name) {
  return lookup(kClaims, name, "preservation claim");
}
std::string to_string(InitialFamily f) { return name_of(kFamilies, f); }
InitialFamily initial_family_from_string(const std::string& name) {
  return lookup(kFamilies, name, "initial family");
}
std::string to_string(ConverseTarget t) { return name_of(kTargets, t); }
ConverseTarget converse_target_from_string(const std::string& name) {
  return lookup(kTargets, name, "converse target");
}

WeightVector<Rational> random_measure(std::uint64_t seed, int n, MeasureMode mode,
                                      std::size_t rejection_budget) {
  require_site_count(n);
  Rng rng(seed);
  switch (mode) {
    case MeasureMode::generic:
      return WeightVector<Rational>(n, generic_weights(rng, n, true));
    case MeasureMode::strictly_positive:
      return WeightVector<Rational>(n, generic_weights(rng, n, false));
    case MeasureMode::product: {
      std::vector<Rational> marginals(at(n));
      for (auto& p : marginals) p = ratio(rng.between(1, 7), 8);
      return product_measure(marginals).weights();
    }
    case MeasureMode::lattice:
      for (std::size_t attempt = 0; attempt <= rejection_budget; ++attempt) {
        auto candidate = rng.chance(1, 4) ? generic_weights(rng, n, true) : log_supermodular_weights(rng, n);
        WeightVector<Rational> w(n, std::move(candidate));
        if (satisfies_lattice(w).holds()) return w;
      }
      throw BudgetExceeded("lattice sampling rejected " + std::to_string(rejection_budget + 1) +
                           " candidates");
  }
  throw std::logic_error("unhandled measure mode");
}

ExactMeasure derangement_measure(int k) {
  if (k < 2 || k > 5) throw std::invalid_argument("derangement measure needs 2 <= k <= 5");
  std::vector<int> perm(at(k));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<Rational> counts(config_count(k), Rational(0));
  long total = 0;
  do {
    ConfigIndex c = 0;
    for (int i = 0; i < k; ++i)
      if (perm[at(i)] != i) c |= ConfigIndex{1} << i;
    counts[c] += 1;
    ++total;
  } while (std::next_permutation(perm.begin(), perm.end()));
  for (auto& v : counts) v /= total;
  return ExactMeasure(k, std::move(counts));
}

std::pair<WeightVector<Rational>, WeightVector<Rational>> separating_measures(const Rational& eps) {
  if (sgn(eps) <= 0) throw std::invalid_argument("eps must be positive");
  const Rational sixth(1, 6), third(1, 3);
  const ThreeSiteCoords first{sixth, sixth, sixth, sixth, eps, eps, eps, third};
  const ThreeSiteCoords second{third, eps, eps, eps, sixth, sixth, sixth, sixth};
  const auto v1 = classify(first);
  const auto v2 = classify(second);
  const bool first_ok = !v1.lattice && v1.dca && v1.downward_fkg && v1.associated;
  const bool second_ok = v2.associated && !v2.downward_fkg && !v2.dca && !v2.lattice;
  if (!first_ok || !second_ok) {
    std::ostringstream msg;
    msg << "eps = " << to_string(eps) << " does not separate the properties;";
    for (const auto* v : {&v1, &v2})
      for (const auto& m : v->margins)
        msg << ' ' << to_string(m.system) << "=[" << to_string(m.slacks[0]) << ',' << to_string(m.slacks[1])
            << ',' << to_string(m.slacks[2]) << ']';
    throw std::domain_error(msg.str());
  }
  return {first.to_weights(), second.to_weights()};
}

RateTable contact_process(int n, const std::vector<std::pair<int, int>>& edges, const Rational& lambda,
                          const Rational& delta) {
  require_site_count(n);
  if (sgn(lambda) < 0 || sgn(delta) < 0) throw std::invalid_argument("contact rates must be nonnegative");
  std::vector<SiteMask> neighbours(at(n), 0);
  for (auto [i, j] : edges) {
    if (i < 0 || j < 0 || i >= n || j >= n || i == j)
      throw std::invalid_argument("edge (" + std::to_string(i) + "," + std::to_string(j) + ") is invalid");
    neighbours[at(i)] |= SiteMask{1} << j;
    neighbours[at(j)] |= SiteMask{1} << i;
  }
  return RateTable::from_functions(
      n, [&](int x, ConfigIndex c) { return lambda * std::popcount(c & neighbours[at(x)]); },
      [&](int, ConfigIndex) { return delta; });
}

std::vector<std::pair<int, int>> path_edges(int n) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return e;
}

RateTable independent_flips(const std::vector<Rational>& births, const std::vector<Rational>& deaths) {
  if (births.size() != deaths.size()) throw std::invalid_argument("birth and death lists differ in length");
  const int n = static_cast<int>(births.size());
  return RateTable::from_functions(
      n, [&](int x, ConfigIndex) { return births[at(x)]; }, [&](int x, ConfigIndex) { return deaths[at(x)]; });
}

RateTable consensus_flip_system() {
  constexpr int n = 3;
  const SiteMask all = all_sites(n);
  return RateTable::from_functions(
      n,
      [&](int x, ConfigIndex c) { return Rational((c | (SiteMask{1} << x)) == all ? 1 : 0); },
      [&](int x, ConfigIndex c) { return Rational((c & ~(SiteMask{1} << x)) == 0 ? 1 : 0); });
}

RateTable single_site_birth_system(int n, int u, std::vector<Rational> birth) {
  require_site_count(n);
  if (u < 0 || u >= n) throw std::invalid_argument("site out of range");
  if (birth.size() != config_count(n)) throw std::invalid_argument("birth table needs 2^n entries");
  std::vector<std::vector<Rational>> b(at(n), std::vector<Rational>(config_count(n), Rational(0)));
  auto d = b;
  b[at(u)] = std::move(birth);
  return RateTable(n, std::move(b), std::move(d));
}

RateTable random_submodular_birth_system(std::uint64_t seed, int n, int u) {
  require_site_count(n);
  Rng rng(seed);
  const SiteMask others = all_sites(n) & ~(SiteMask{1} << u);
  std::vector<Rational> beta(config_count(n), Rational(0));
  if (rng.chance(1, 2)) {
    // Additive: sum over site sets A of c_A * 1{eta not identically 0 on A}.
    for (SiteMask a = others; a != 0; a = (a - 1) & others) {
      if (rng.chance(1, 2)) continue;
      const Rational coeff(rng.between(1, 4), rng.between(1, 2));
      for (ConfigIndex c = 0; c < beta.size(); ++c)
        if (c & a) beta[c] += coeff;
    }
  } else {
    // min(weighted count, cap) + base: a concave function of a modular one.
    std::vector<long> weight(at(n), 0);
    long sum = 0;
    for (int x = 0; x < n; ++x)
      if ((others >> x) & 1u) sum += weight[at(x)] = rng.between(0, 3);
    const long cap = rng.between(1, std::max(1L, sum));
    const long base = rng.between(0, 2);
    for (ConfigIndex c = 0; c < beta.size(); ++c) {
      long s = 0;
      for (int x = 0; x < n; ++x)
        if (((c & others) >> x) & 1u) s += weight[at(x)];
      beta[c] = Rational(std::min(s, cap) + base);
    }
  }
  auto r = single_site_birth_system(n, u, std::move(beta));
  if (!is_attractive(r).holds() || !check_birth_submodularity(r, u).holds())
    throw std::logic_error("random birth table is not increasing and submodular");
  return r;
}

RateTable random_rate_table(std::uint64_t seed, int n, int max_rate) {
  require_site_count(n);
  Rng rng(seed);
  auto draw = [&](int, ConfigIndex) { return ratio(rng.between(0, 2L * max_rate), 2); };
  std::vector<std::vector<Rational>> b(at(n)), d(at(n));
  for (int x = 0; x < n; ++x)
    for (ConfigIndex c = 0; c < config_count(n); ++c) {
      b[at(x)].push_back(draw(x, c));
      d[at(x)].push_back(draw(x, c));
    }
  return RateTable(n, std::move(b), std::move(d));
}

ExactMeasure product_measure(const std::vector<Rational>& marginals) {
  const int n = static_cast<int>(marginals.size());
  require_site_count(n);
  for (const auto& p : marginals)
    if (sgn(p) < 0 || p > 1) throw std::invalid_argument("marginals must lie in [0, 1]");
  std::vector<Rational> w(config_count(n));
  for (ConfigIndex c = 0; c < w.size(); ++c) {
    Rational v = 1;
    for (int x = 0; x < n; ++x) v *= ((c >> x) & 1u) ? marginals[at(x)] : 1 - marginals[at(x)];
    w[c] = v;
  }
  return ExactMeasure(n, std::move(w));
}

ExactMeasure point_mass(int n, ConfigIndex c) {
  require_site_count(n);
  if (c >= config_count(n)) throw std::invalid_argument("configuration out of range");
  std::vector<Rational> w(config_count(n), Rational(0));
  w[c] = 1;
  return ExactMeasure(n, std::move(w));
}

// ---- preservation experiments ----

std::string preserved_property(PreservationClaim c) {
  switch (c) {
    case PreservationClaim::attractive_association: return "associated";
    case PreservationClaim::independent_flips_lattice: return "lattice";
    case PreservationClaim::additive_downward_fkg: return "downward_fkg";
    case PreservationClaim::submodular_dca: return "dca";
  }
  throw std::logic_error("unhandled claim");
}

double ExperimentOutcome::min_margin() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& cell : cells) m = std::min(m, cell.report.margin.approx());
  return m;
}

namespace {

std::vector<std::string> hypothesis_failures(const RateTable& r, PreservationClaim claim) {
  std::vector<std::string> out;
  switch (claim) {
    case PreservationClaim::attractive_association:
      if (!is_attractive(r).holds()) out.emplace_back("rates are not attractive");
      break;
    case PreservationClaim::independent_flips_lattice:
      if (!has_independent_flips(r)) out.emplace_back("rates are not independent flips");
      break;
    case PreservationClaim::additive_downward_fkg:
      if (!has_constant_deaths(r)) out.emplace_back("death rates are not constant");
      for (int x = 0; x < r.sites(); ++x)
        if (!additive_decomposition(r, x).additive)
          out.emplace_back("birth rates at site " + std::to_string(x) + " are not additive");
      break;
    case PreservationClaim::submodular_dca:
      if (!has_constant_deaths(r)) out.emplace_back("death rates are not constant");
      if (!is_attractive(r).holds()) out.emplace_back("birth rates are not increasing");
      for (int x = 0; x < r.sites(); ++x)
        if (!check_birth_submodularity(r, x).holds())
          out.emplace_back("birth rates at site " + std::to_string(x) + " are not submodular");
      break;
  }
  return out;
}

// Whether an exact initial measure qualifies for the experiment.
bool initial_has(const std::string& property, const ExactMeasure& mu, std::uint64_t seed,
                 std::size_t tilt_budget, const CheckOptions& opts) {
  if (property == "associated") return is_associated(mu, opts).holds();
  if (property == "lattice") return satisfies_lattice(mu, opts).holds();
  if (property == "downward_fkg") return is_downward_fkg(mu, opts).holds();
  // Lattice certifies DCA; otherwise an unfalsified search is accepted.
  if (satisfies_lattice(mu, opts).holds()) return true;
  TiltSampler sampler(mu.sites(), seed);
  return !dca_falsify(mu, sampler, tilt_budget, opts).fails();
}

}  // namespace

PropertyReport check_evolved(const std::string& property, const FloatMeasure& mu, std::uint64_t tilt_seed,
                             std::size_t tilt_budget, const CheckOptions& opts) {
  if (property == "associated") return is_associated(mu, opts);
  if (property == "lattice") return satisfies_lattice(mu, opts);
  if (property == "downward_fkg") return is_downward_fkg(mu, opts);
  if (property == "dca") {
    TiltSampler sampler(mu.sites(), tilt_seed);
    return dca_falsify(mu, sampler, tilt_budget, opts);
  }
  throw std::invalid_argument("unknown property '" + property + "'");
}

ExperimentOutcome verify_preservation(const ExperimentSpec& spec) {
  for (double t : spec.times)
    if (!(t >= 0) || !std::isfinite(t)) throw std::invalid_argument("time grid values must be finite and >= 0");
  ExperimentOutcome out;
  out.claim = spec.claim;
  out.property = preserved_property(spec.claim);
  out.hypothesis_failures = hypothesis_failures(spec.system, spec.claim);
  out.hypotheses_hold = out.hypothesis_failures.empty();
  const int n = spec.system.sites();

  std::vector<ExactMeasure> candidates;
  if (spec.family == InitialFamily::explicit_measures) {
    candidates = spec.initial;
  } else {
    const MeasureMode mode = spec.family == InitialFamily::product          ? MeasureMode::product
                             : spec.family == InitialFamily::random_lattice ? MeasureMode::lattice
                                                                            : MeasureMode::generic;
    for (std::size_t i = 0; i < spec.measure_count; ++i)
      candidates.push_back(normalize(random_measure(derive_seed(spec.seed, i), n, mode)));
  }
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (candidates[i].sites() != n) throw std::invalid_argument("initial measure on a different site set");
    if (initial_has(out.property, candidates[i], derive_seed(spec.seed, 1000 + i), spec.tilt_budget, spec.check))
      out.measures.push_back(candidates[i]);
    else
      out.skipped.push_back(i);
  }

  const Generator q = build_generator(spec.system);
  UniformizationOptions tight;
  tight.tail_tolerance = 1e-16;
  for (std::size_t m = 0; m < out.measures.size(); ++m)
    for (std::size_t k = 0; k < spec.times.size(); ++k) {
      const double t = spec.times[k];
      const std::uint64_t tilt_seed = derive_seed(spec.seed, 2000 + m * spec.times.size() + k);
      ExperimentCell cell{m, t, check_evolved(out.property, semigroup_apply(q, out.measures[m], t), tilt_seed,
                                              spec.tilt_budget, spec.check)};
      if (cell.report.fails()) {
        cell.report = check_evolved(out.property, semigroup_apply(q, out.measures[m], t, tight), tilt_seed,
                                    spec.tilt_budget, spec.check);
        cell.report.details.emplace_back("reverified", "tail 1e-16");
        if (cell.report.fails() && !out.violation) out.violation = out.cells.size();
      }
      out.cells.push_back(std::move(cell));
    }
  return out;
}

// ---- counterexample search ----

std::string searched_property(ConverseTarget t) {
  switch (t) {
    case ConverseTarget::attractiveness: return "associated";
    case ConverseTarget::birth_submodularity: return "downward_fkg";
    case ConverseTarget::independent_flips: return "lattice";
  }
  throw std::logic_error("unhandled target");
}

namespace {

// mu(g_xy) mu(g) - mu(g_x) mu(g_y) for single configurations.
EventPolynomial singleton_determinant(int n, int x, int y, ConfigIndex g) {
  const ConfigIndex bx = ConfigIndex{1} << x, by = ConfigIndex{1} << y;
  EventPolynomial p;
  p.n = n;
  p.events = {MemberMask{1} << (g | bx | by), MemberMask{1} << g, MemberMask{1} << (g | bx),
              MemberMask{1} << (g | by)};
  p.terms = {{Rational(1), {0, 1}}, {Rational(-1), {2, 3}}};
  return p;
}

struct Candidate {
  DerivativeCertificate certificate;
  ExactMeasure measure;
};

}  // namespace

SearchOutcome search_counterexample(const RateTable& r, ConverseTarget target, const SearchOptions& opts) {
  const int n = r.sites();
  SearchOutcome out;
  out.target = target;
  out.property = searched_property(target);
  const Generator q = build_generator(r);
  UniformizationOptions tight;
  tight.tail_tolerance = 1e-16;

  auto try_evolution = [&](const ExactMeasure& mu, std::uint64_t tilt_seed) {
    for (double t : opts.times) {
      ++out.evolutions_checked;
      auto rep = check_evolved(out.property, semigroup_apply(q, mu, t), tilt_seed, 0, opts.check);
      if (!rep.fails()) continue;
      rep = check_evolved(out.property, semigroup_apply(q, mu, t, tight), tilt_seed, 0, opts.check);
      if (!rep.fails()) continue;
      out.verdict = Verdict::fails;
      out.initial = mu;
      out.t = t;
      out.report = std::move(rep);
      return true;
    }
    return false;
  };

  // Phase 1: functionals that vanish on product measures; a strictly
  // negative derivative at t = 0 means the property breaks for small t.
  if (n >= 2) {
    for (int x = 0; x < n; ++x)
      for (int y = x + 1; y < n; ++y) {
        const SiteMask pair = (SiteMask{1} << x) | (SiteMask{1} << y);
        const SiteMask rest = all_sites(n) & ~pair;
        for (ConfigIndex g = 0; g < config_count(n); ++g) {
          if (g & pair) continue;
          std::vector<SiteMask> zero_sets{0};
          if (target == ConverseTarget::birth_submodularity) {
            const SiteMask free = rest & ~g;
            for (SiteMask a = free; a != 0; a = (a - 1) & free) zero_sets.push_back(a);
            std::sort(zero_sets.begin(), zero_sets.end());
          }
          for (SiteMask zeros : zero_sets) {
            const EventPolynomial f = target == ConverseTarget::independent_flips
                                          ? singleton_determinant(n, x, y, g)
                                          : EventPolynomial::pair_determinant(n, x, y, zeros);
            for (int i = 1; i < 8; ++i)
              for (int j = 1; j < 8; ++j) {
                std::vector<Rational> marginals(at(n));
                for (int z = 0; z < n; ++z)
                  marginals[at(z)] = ((g >> z) & 1u) ? 1 - opts.epsilon : opts.epsilon;
                marginals[at(x)] = ratio(i, 8);
                marginals[at(y)] = ratio(j, 8);
                ExactMeasure mu = product_measure(marginals);
                ++out.functionals_checked;
                const Rational value = f.evaluate(mu);
                if (sgn(value) != 0) continue;
                const Rational d = derivative_at_zero(q, mu, f);
                if (sgn(d) >= 0) continue;
                Candidate c{{ratio(i, 8), ratio(j, 8), x, y, g, zeros, value, d}, std::move(mu)};
                if (!out.certificate) out.certificate = c.certificate;
                if (try_evolution(c.measure, derive_seed(opts.seed, out.functionals_checked))) {
                  out.certificate = c.certificate;
                  return out;
                }
              }
          }
        }
      }
  }

  // Phase 2: random starts.
  for (std::size_t i = 0; i < opts.budget; ++i) {
    const MeasureMode mode =
        (target == ConverseTarget::independent_flips && i % 2 == 1) ? MeasureMode::lattice : MeasureMode::product;
    const ExactMeasure mu = normalize(random_measure(derive_seed(opts.seed, i), n, mode));
    if (try_evolution(mu, derive_seed(opts.seed, 5000 + i))) return out;
  }
  return out;
}

// ---- single-site facts ----

bool FactsAudit::holds(double tolerance) const {
  return product >= -tolerance && positivity > 0 && decreasing >= -tolerance && lattice >= -tolerance &&
         ratio >= -tolerance;
}

RealFunction<Rational> random_increasing_function(std::uint64_t seed, int n) {
  require_site_count(n);
  Rng rng(seed);
  const ConfigIndex count = config_count(n);
  std::vector<Rational> values(count, Rational(0));
  Rational total = 0;
  const long terms = rng.between(1, 3);
  for (long k = 0; k < terms; ++k) {
    MemberMask generators = 0;
    const long picks = rng.between(1, 3);
    for (long p = 0; p < picks; ++p) generators |= MemberMask{1} << rng.below(count);
    const MemberMask up = up_closure(n, generators);
    const Rational coeff(rng.between(1, 4));
    total += coeff;
    for (ConfigIndex c = 0; c < count; ++c)
      if ((up >> c) & 1u) values[c] += coeff;
  }
  for (auto& v : values) v /= total;
  return RealFunction<Rational>(n, std::move(values));
}

namespace {

RealFunction<double> as_double(const RealFunction<Rational>& f) {
  std::vector<double> v;
  v.reserve(f.values.size());
  for (const auto& x : f.values) v.push_back(x.get_d());
  return RealFunction<double>(f.n, std::move(v));
}

RealFunction<double> scaled_to_unit_max(const RealFunction<Rational>& h) {
  const Rational top = *std::max_element(h.values.begin(), h.values.end());
  std::vector<Rational> v(h.values);
  for (auto& x : v) x /= top;
  return as_double(RealFunction<Rational>(h.n, std::move(v)));
}

RealFunction<double> pointwise(const RealFunction<double>& a, const RealFunction<double>& b) {
  std::vector<double> v(a.values.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a.values[i] * b.values[i];
  return RealFunction<double>(a.n, std::move(v));
}

}  // namespace

FactsAudit audit_single_site_facts(const RateTable& r, std::uint64_t seed, std::size_t triples,
                                   const std::vector<double>& times) {
  const int n = r.sites();
  const ConfigIndex count = config_count(n);
  const Generator q = build_generator(r);
  UniformizationOptions tight;
  tight.tail_tolerance = 1e-16;
  FactsAudit audit{};
  const double inf = std::numeric_limits<double>::infinity();
  audit.product = audit.positivity = audit.decreasing = audit.lattice = audit.ratio = inf;
  Rng rng(seed);
  const std::size_t deterministic_prefix = 1 + 3 * (count - 1);

  for (std::size_t k = 0; k < triples; ++k) {
    const auto f = as_double(random_increasing_function(rng.next(), n));
    const auto g = as_double(random_increasing_function(rng.next(), n));
    std::vector<Rational> positive(count);
    for (auto& v : positive) v = ratio(rng.between(1, 64), 64);
    const auto h = as_double(RealFunction<Rational>(n, std::move(positive)));
    TiltSampler sampler(n, rng.next());
    const std::size_t skip = rng.below(deterministic_prefix + 16);
    for (std::size_t s = 0; s < skip; ++s) sampler.next();
    const auto tilt = sampler.next();
    if (!is_valid_tilt(tilt)) throw std::logic_error("tilt sampler emitted an inadmissible tilt");
    const auto ht = scaled_to_unit_max(tilt);

    for (double t : times) {
      auto S = [&](const RealFunction<double>& u) { return semigroup_apply_function(q, u, t, tight); };
      const auto sh = S(h), sfgh = S(pointwise(pointwise(f, g), h)), sfh = S(pointwise(f, h)),
                 sgh = S(pointwise(g, h));
      const auto sht = S(ht), sfht = S(pointwise(f, ht));
      for (ConfigIndex c = 0; c < count; ++c) {
        audit.product = std::min(audit.product, sh(c) * sfgh(c) - sfh(c) * sgh(c));
        audit.positivity = std::min(audit.positivity, sht(c));
        for (int x = 0; x < n; ++x) {
          const ConfigIndex bit = ConfigIndex{1} << x;
          if (c & bit) continue;
          audit.decreasing = std::min(audit.decreasing, sht(c) - sht(c | bit));
          audit.ratio = std::min(audit.ratio, sfht(c | bit) / sht(c | bit) - sfht(c) / sht(c));
        }
        for (ConfigIndex d = c + 1; d < count; ++d)
          audit.lattice = std::min(audit.lattice, sht(c | d) * sht(c & d) - sht(c) * sht(d));
      }
      ++audit.evaluations;
    }
  }
  return audit;
}

}  // namespace spincorr
