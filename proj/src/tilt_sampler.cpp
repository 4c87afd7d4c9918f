#include "spincorr/tilt_sampler.hpp"

#include <array>
#include <bit>
#include <stdexcept>
#include <vector>

namespace spincorr {

bool is_valid_tilt(const RealFunction<Rational>& h) {
  for (const auto& v : h.values)
    if (sgn(v) <= 0) return false;
  RealFunction<Rational> negated = h;
  for (auto& v : negated.values) v = -v;
  if (!is_increasing(negated)) return false;
  const ConfigIndex count = config_count(h.n);
  for (ConfigIndex a = 0; a < count; ++a)
    for (ConfigIndex b = a + 1; b < count; ++b) {
      if ((a & b) == a || (a & b) == b) continue;
      if (h(a | b) * h(a & b) < h(a) * h(b)) return false;
    }
  return true;
}

RealFunction<Rational> zero_conditioning_tilt(int n, SiteMask zero_sites, const Rational& eps) {
  require_site_count(n);
  if (sgn(eps) <= 0) throw std::invalid_argument("tilt parameter must be positive");
  std::vector<Rational> values(config_count(n));
  for (ConfigIndex c = 0; c < values.size(); ++c) {
    Rational v = 1;
    for (int x = 0; x < n; ++x)
      if ((zero_sites >> x) & 1u) v *= 1 + eps - Rational((c >> x) & 1u);
    values[c] = v;
  }
  return RealFunction<Rational>(n, std::move(values));
}

TiltSampler::TiltSampler(int n, std::uint64_t seed) : n_(n), rng_(seed) { require_site_count(n); }

RealFunction<Rational> TiltSampler::next() {
  static const std::array<Rational, 3> kEps{Rational(1), Rational(1, 10), Rational(1, 100)};
  const std::size_t index = emitted_++;
  if (index == 0) return RealFunction<Rational>::constant(n_, Rational(1));
  const std::size_t product_count = (config_count(n_) - 1) * kEps.size();
  if (index - 1 < product_count) {
    const std::size_t k = index - 1;
    const auto sites = static_cast<SiteMask>(k / kEps.size() + 1);
    return zero_conditioning_tilt(n_, sites, kEps[k % kEps.size()]);
  }
  return random_member();
}

RealFunction<Rational> TiltSampler::random_member() {
  static const std::array<Rational, 5> kCoupling{Rational(1), Rational(5, 4), Rational(2),
                                                 Rational(4), Rational(16)};
  static const std::array<Rational, 5> kField{Rational(1), Rational(3, 4), Rational(1, 2),
                                              Rational(1, 8), Rational(1, 64)};
  const ConfigIndex count = config_count(n_);
  std::vector<Rational> coupling(count, Rational(1));
  // Interaction density varies per sample so that sparse and dense tilts
  // both appear.
  const auto density = static_cast<std::uint64_t>(rng_.between(1, 4));
  for (SiteMask a = 0; a < count; ++a) {
    if (std::popcount(a) < 2) continue;
    if (rng_.chance(density, 5)) coupling[a] = kCoupling[rng_.below(kCoupling.size())];
  }
  std::vector<Rational> field(static_cast<std::size_t>(n_));
  for (int x = 0; x < n_; ++x) {
    Rational bound = 1;
    for (SiteMask a = 0; a < count; ++a)
      if ((a >> x) & 1u) bound *= coupling[a];
    field[static_cast<std::size_t>(x)] = kField[rng_.below(kField.size())] / bound;
  }
  std::vector<Rational> values(count);
  for (ConfigIndex c = 0; c < count; ++c) {
    Rational v = 1;
    for (int x = 0; x < n_; ++x)
      if ((c >> x) & 1u) v *= field[static_cast<std::size_t>(x)];
    for (SiteMask a = 0; a < count; ++a)
      if (std::popcount(a) >= 2 && (c & a) == a) v *= coupling[a];
    values[c] = v;
  }
  return RealFunction<Rational>(n_, std::move(values));
}

}  // namespace spincorr
