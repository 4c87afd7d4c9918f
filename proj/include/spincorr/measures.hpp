#pragma once

// Probability measures on {0,1}^S and the correlation-property checkers:
// association, the FKG lattice condition, downward FKG and downward
// conditional association (DCA), plus stochastic domination.
//
// Every checker is instantiated for exact rationals and for doubles. Exact
// checks compare against zero; double checks (used on measures produced by
// the semigroup) flag a violation only below -tolerance.

#include "spincorr/lattice.hpp"
#include "spincorr/rational.hpp"

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace spincorr {

class TiltSampler;

/// Thrown when a brute-force sweep would exceed the configured size budget.
class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <class T>
class WeightVector {
 public:
  /// Throws std::invalid_argument on a negative weight, a zero total, or a
  /// length other than 2^n.
  WeightVector(int n, std::vector<T> weights);

  int sites() const { return n_; }
  const std::vector<T>& weights() const { return weights_; }
  const T& operator[](ConfigIndex c) const { return weights_[c]; }
  T total() const;
  bool strictly_positive() const;

 private:
  int n_;
  std::vector<T> weights_;
};

template <class T>
class Measure {
 public:
  /// Probabilities must sum to one: exactly for rationals, within 1e-12 for
  /// doubles.
  Measure(int n, std::vector<T> probabilities);

  int sites() const { return n_; }
  const std::vector<T>& probabilities() const { return p_; }
  const T& operator[](ConfigIndex c) const { return p_[c]; }
  T probability(MemberMask event) const;
  WeightVector<T> weights() const { return WeightVector<T>(n_, p_); }
  bool strictly_positive() const;

  friend bool operator==(const Measure&, const Measure&) = default;

 private:
  int n_;
  std::vector<T> p_;
};

using ExactMeasure = Measure<Rational>;
using FloatMeasure = Measure<double>;

template <class T>
Measure<T> normalize(const WeightVector<T>& w);

FloatMeasure to_float(const ExactMeasure& mu);

template <class T>
T expectation(const Measure<T>& mu, const RealFunction<T>& f);

/// E[fg] - E[f]E[g].
template <class T>
T covariance(const Measure<T>& mu, const RealFunction<T>& f, const RealFunction<T>& g);

enum class Verdict { holds, fails, search_exhausted };
std::string to_string(Verdict v);

struct Margin {
  std::variant<Rational, double> value{0.0};

  double approx() const;
  bool exact() const { return std::holds_alternative<Rational>(value); }
  std::string to_string() const;
};

struct UpSetPairWitness {
  UpSet first;
  UpSet second;
};
struct ConditionedWitness {
  SiteMask zero_sites;
  UpSet first;
  UpSet second;
};
struct ConfigPairWitness {
  Config first;
  Config second;
};
struct TiltWitness {
  std::vector<Rational> tilt;
  UpSet first;
  UpSet second;
};
struct SiteWitness {
  int site;
  Config first;
  Config second;
};
struct UpSetWitness {
  UpSet set;
};
struct InequalityWitness {
  std::string system;
  int index;
};

using Witness = std::variant<std::monostate, UpSetPairWitness, ConditionedWitness,
                             ConfigPairWitness, TiltWitness, SiteWitness, UpSetWitness,
                             InequalityWitness>;

struct PropertyReport {
  std::string property;
  Verdict verdict = Verdict::holds;
  Witness witness;
  Margin margin;
  std::vector<std::pair<std::string, std::string>> details;

  bool holds() const { return verdict == Verdict::holds; }
  bool fails() const { return verdict == Verdict::fails; }
  const std::string* detail(const std::string& key) const;
};

struct CheckOptions {
  double tolerance = 1e-9;  // double instantiations only
  bool full_margin = false;  // keep sweeping after the first violation
  bool allow_six_sites = false;
  unsigned workers = 1;
};

/// Brute force over all pairs of nontrivial up-sets. The witness is the first
/// violating pair (i < j) in enumeration order for any worker count; the
/// margin is the smallest covariance seen.
template <class T>
PropertyReport is_associated(const Measure<T>& mu, const CheckOptions& opts = {});

/// mu(a AND b) mu(a OR b) >= mu(a) mu(b), on the normalized measure. Strictly
/// positive inputs only need pairs differing at exactly two sites; otherwise
/// every incomparable pair is checked.
template <class T>
PropertyReport satisfies_lattice(const WeightVector<T>& w, const CheckOptions& opts = {});
template <class T>
PropertyReport satisfies_lattice(const Measure<T>& mu, const CheckOptions& opts = {}) {
  return satisfies_lattice(mu.weights(), opts);
}

/// mu conditioned on every site of `zero_sites` being 0. Throws
/// std::domain_error if that event has probability zero.
template <class T>
Measure<T> condition_zeros(const Measure<T>& mu, SiteMask zero_sites);

/// Every zero-conditioning with positive probability is associated. The
/// witness carries the conditioning set and up-sets of the full cube.
template <class T>
PropertyReport is_downward_fkg(const Measure<T>& mu, const CheckOptions& opts = {});

/// Weights proportional to h(eta) mu(eta). Throws if h has a nonpositive value.
template <class T>
Measure<T> tilt(const Measure<T>& mu, const RealFunction<T>& h);

/// Searches tilts from `sampler` for one whose tilted measure is not
/// associated. For n <= 3 the verdict is exact; for n >= 4 a search that
/// finds nothing reports Verdict::search_exhausted.
template <class T>
PropertyReport dca_falsify(const Measure<T>& mu, TiltSampler& sampler, std::size_t budget,
                           const CheckOptions& opts = {});

/// Holds iff lower(U) <= upper(U) for every up-set U.
template <class T>
PropertyReport stochastically_dominated(const Measure<T>& lower, const Measure<T>& upper,
                                        const CheckOptions& opts = {});

}  // namespace spincorr
