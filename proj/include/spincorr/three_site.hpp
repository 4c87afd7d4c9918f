#pragma once

// Closed-form correlation classifier for measures on three sites.
//
// Coordinates use site strings (site 0 first):
//   a  = mu(111)
//   b1 = mu(011), b2 = mu(101), b3 = mu(110)
//   c1 = mu(100), c2 = mu(010), c3 = mu(001)
//   d  = mu(000)
// Each inequality system has three members obtained from the first by
// permuting sites. Slacks (left side minus right side) are evaluated on the
// normalized coordinates, so they do not change under positive scaling.

#include "spincorr/measures.hpp"
#include "spincorr/rational.hpp"

#include <array>
#include <string>
#include <vector>

namespace spincorr {

struct ThreeSiteCoords {
  Rational a, b1, b2, b3, c1, c2, c3, d;

  /// Requires n == 3.
  static ThreeSiteCoords from_weights(const WeightVector<Rational>& w);
  WeightVector<Rational> to_weights() const;
  Rational total() const { return a + b1 + b2 + b3 + c1 + c2 + c3 + d; }
  ThreeSiteCoords normalized() const;
};

enum class InequalitySystem {
  top_covariance,     // a(c2+c3+d) >= b1(b2+b3+c1): cov(eta(1), eta(2)eta(3)) >= 0
  bottom_covariance,  // d(b2+b3+a) >= c1(c2+c3+b1): cov(eta(1), 1{eta(2)+eta(3) >= 1}) >= 0
  pair_covariance,    // (b1+a)(c1+d) >= (c3+b2)(b3+c2): cov(eta(2), eta(3)) >= 0
  lower_lattice,      // b1 d >= c2 c3: association given a zero at one site
  upper_lattice,      // c1 a >= b2 b3: lattice condition for pairs meeting above a one
};

inline constexpr std::array<InequalitySystem, 5> kInequalitySystems{
    InequalitySystem::top_covariance, InequalitySystem::bottom_covariance,
    InequalitySystem::pair_covariance, InequalitySystem::lower_lattice,
    InequalitySystem::upper_lattice};

std::string to_string(InequalitySystem s);
InequalitySystem inequality_system_from_string(const std::string& name);

struct InequalityMargins {
  InequalitySystem system;
  std::array<Rational, 3> slacks;

  bool holds() const;
};

InequalityMargins margins(const ThreeSiteCoords& m, InequalitySystem system);

/// a d - b_i c_i for i = 1, 2, 3: the lattice condition on the three pairs
/// that differ at every site. Implied by the lower and upper lattice systems
/// when every coordinate is positive, but not when some vanish.
std::array<Rational, 3> diagonal_slacks(const ThreeSiteCoords& m);

struct ThreeSiteVerdicts {
  bool lattice = false;
  bool dca = false;
  bool downward_fkg = false;
  bool associated = false;
  std::vector<InequalityMargins> margins;
  std::array<Rational, 3> diagonal;
};

/// lattice     <=> lower & upper lattice systems and nonnegative diagonal slacks
/// dca, downward FKG <=> top covariance & pair covariance & lower lattice
/// associated  <=> top, bottom and pair covariance systems
ThreeSiteVerdicts classify(const ThreeSiteCoords& m);

/// Whether a d >= b_i c_i for every i. Always true when the top covariance and
/// lower lattice systems hold; throws std::invalid_argument when they do not.
bool check_diagonal_bound(const ThreeSiteCoords& m);

}  // namespace spincorr
