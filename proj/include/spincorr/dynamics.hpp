#pragma once

// Spin systems on {0,1}^S: rate tables, their generators, the semigroup
// acting on measures and functions, and the rate classifiers.

#include "spincorr/lattice.hpp"
#include "spincorr/measures.hpp"
#include "spincorr/rational.hpp"

#include <cstddef>
#include <functional>
#include <vector>

namespace spincorr {

/// Birth rates beta(x, eta) and death rates delta(x, eta). Neither depends on
/// eta(x): the constructor copies each value given at eta(x) = 0 onto the
/// configuration with site x occupied.
class RateTable {
 public:
  using RateFunction = std::function<Rational(int site, ConfigIndex config)>;

  RateTable(int n, std::vector<std::vector<Rational>> births,
            std::vector<std::vector<Rational>> deaths);

  /// Rates evaluated at eta(x) = 0 representatives.
  static RateTable from_functions(int n, const RateFunction& birth, const RateFunction& death);
  static RateTable zero(int n);

  int sites() const { return n_; }
  const Rational& birth(int site, ConfigIndex c) const { return births_[idx(site)][c]; }
  const Rational& death(int site, ConfigIndex c) const { return deaths_[idx(site)][c]; }
  const std::vector<Rational>& births(int site) const { return births_[idx(site)]; }
  const std::vector<Rational>& deaths(int site) const { return deaths_[idx(site)]; }

  /// Rate at which site x flips out of configuration c.
  const Rational& flip_rate(int site, ConfigIndex c) const {
    return ((c >> site) & 1u) ? death(site, c) : birth(site, c);
  }

  friend bool operator==(const RateTable&, const RateTable&) = default;

 private:
  static std::size_t idx(int site) { return static_cast<std::size_t>(site); }

  int n_;
  std::vector<std::vector<Rational>> births_;
  std::vector<std::vector<Rational>> deaths_;
};

/// Dense rate matrix of a single-flip Markov chain. Rows sum to zero exactly.
class Generator {
 public:
  int sites() const { return n_; }
  std::size_t dimension() const { return dim_; }
  const Rational& operator()(ConfigIndex from, ConfigIndex to) const { return q_[from * dim_ + to]; }
  double rate(ConfigIndex from, ConfigIndex to) const { return qd_[from * dim_ + to]; }
  const std::vector<double>& dense() const { return qd_; }
  double max_exit_rate() const;

  /// Row vector times Q, exactly.
  std::vector<Rational> left_apply(const std::vector<Rational>& row) const;

  friend Generator build_generator(const RateTable& r);
  friend Generator operator+(const Generator& lhs, const Generator& rhs);

 private:
  Generator(int n, std::vector<Rational> q);

  int n_;
  std::size_t dim_;
  std::vector<Rational> q_;
  std::vector<double> qd_;
};

Generator build_generator(const RateTable& r);
Generator operator+(const Generator& lhs, const Generator& rhs);

struct TransitionMatrix {
  std::size_t dimension = 0;
  std::vector<double> entries;  // row-major

  double operator()(std::size_t from, std::size_t to) const { return entries[from * dimension + to]; }
};

struct UniformizationOptions {
  double tail_tolerance = 1e-13;  // bound on the discarded Poisson mass
};

/// mu exp(tQ) by uniformization: Q = L (P - I) with L the largest exit rate,
/// summing Poisson(Lt)-weighted powers of P until the remaining weight is
/// below the tail tolerance. Throws std::invalid_argument for t < 0.
FloatMeasure semigroup_apply(const Generator& q, const FloatMeasure& mu, double t,
                             const UniformizationOptions& opts = {});
FloatMeasure semigroup_apply(const Generator& q, const ExactMeasure& mu, double t,
                             const UniformizationOptions& opts = {});

/// exp(tQ) f: the expectation of f(eta_t) from each starting configuration.
RealFunction<double> semigroup_apply_function(const Generator& q, const RealFunction<double>& f,
                                              double t, const UniformizationOptions& opts = {});

/// Dense exp(tQ) by Pade scaling and squaring, independent of the
/// uniformization path.
TransitionMatrix dense_exponential(const Generator& q, double t);

/// [S1(t/m) S2(t/m)]^m applied to mu.
FloatMeasure trotter_compose(const Generator& q1, const Generator& q2, const FloatMeasure& mu,
                             double t, int steps, const UniformizationOptions& opts = {});

PropertyReport is_attractive(const RateTable& r);
bool has_independent_flips(const RateTable& r);
bool has_constant_deaths(const RateTable& r);

/// Product of per-site two-state kernels. Throws std::invalid_argument unless
/// the rates are constant.
TransitionMatrix independent_flip_kernel(const RateTable& r, double t);

/// For every site x, delta(x, .) is constant over configurations whose other
/// sites are not all empty. The death rate of a lone particle is exempt.
PropertyReport death_constant_on_nonzero(const RateTable& r);

struct AdditiveDecomposition {
  int site = 0;
  /// coefficients[A] for each nonempty site set A (index 0 unused, always 0).
  std::vector<Rational> coefficients;
  bool reconstructs = false;
  bool additive = false;

  Rational evaluate(ConfigIndex c) const;
};

/// Moebius inversion of beta(x, .) onto the basis 1{eta not identically 0 on A}.
AdditiveDecomposition additive_decomposition(const RateTable& r, int site);

/// beta(u, a OR b) + beta(u, a AND b) <= beta(u, a) + beta(u, b) for all pairs,
/// checked on pairs that differ at exactly two sites (local submodularity
/// implies the global inequality).
PropertyReport check_birth_submodularity(const RateTable& r, int site);

/// Polynomial of degree <= 2 in event probabilities.
struct EventPolynomial {
  struct Term {
    Rational coefficient;
    std::vector<std::size_t> factors;  // indices into events, at most two
  };

  int n = 1;
  std::vector<MemberMask> events;
  std::vector<Term> terms;

  /// Throws std::invalid_argument when malformed.
  void validate() const;
  Rational evaluate(const ExactMeasure& mu) const;
  double evaluate(const FloatMeasure& mu) const;

  /// P(11)P(00) - P(10)P(01) for the pair (eta(x), eta(y)) on the event that
  /// every site of zero_sites is empty.
  static EventPolynomial pair_determinant(int n, int x, int y, SiteMask zero_sites = 0);
};

/// d/dt F(mu S(t)) at t = 0, exactly, using d/dt mu S(t) = mu Q at t = 0.
Rational derivative_at_zero(const Generator& q, const ExactMeasure& mu, const EventPolynomial& f);

}  // namespace spincorr
