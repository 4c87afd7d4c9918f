#pragma once

#include "spincorr/lattice.hpp"
#include "spincorr/random.hpp"
#include "spincorr/rational.hpp"

#include <cstddef>
#include <cstdint>

namespace spincorr {

/// Strictly positive, decreasing, and h(a OR b) h(a AND b) >= h(a) h(b) for
/// all pairs. These are the admissible tilts in the definition of DCA.
bool is_valid_tilt(const RealFunction<Rational>& h);

/// prod_{x in zero_sites} (1 + eps - eta(x)). As eps -> 0 the tilted measure
/// tends to the measure conditioned on zeros over `zero_sites`.
RealFunction<Rational> zero_conditioning_tilt(int n, SiteMask zero_sites, const Rational& eps);

/// Deterministic stream of admissible tilts on {0,1}^n:
///   1. the constant function 1;
///   2. zero_conditioning_tilt for every nonempty site set and
///      eps in {1, 1/10, 1/100};
///   3. random members of
///        h(eta) = prod_x r_x^{eta(x)} * prod_{|A|>=2} s_A^{prod_{x in A} eta(x)}
///      with rational s_A >= 1 and 0 < r_x <= 1 / prod_{A containing x} s_A.
/// Family 3 is log-supermodular (nonnegative pair-and-higher interactions) and
/// decreasing (each r_x absorbs every interaction containing x), exactly, with
/// no floating point involved.
class TiltSampler {
 public:
  TiltSampler(int n, std::uint64_t seed);

  RealFunction<Rational> next();
  std::size_t emitted() const { return emitted_; }
  int sites() const { return n_; }

 private:
  RealFunction<Rational> random_member();

  int n_;
  Rng rng_;
  std::size_t emitted_ = 0;
};

}  // namespace spincorr
