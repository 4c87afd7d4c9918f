#include "spincorr/three_site.hpp"

#include <stdexcept>

namespace spincorr {

ThreeSiteCoords ThreeSiteCoords::from_weights(const WeightVector<Rational>& w) {
  if (w.sites() != 3) throw std::invalid_argument("three-site coordinates need n = 3");
  return ThreeSiteCoords{w[7], w[6], w[5], w[3], w[1], w[2], w[4], w[0]};
}

WeightVector<Rational> ThreeSiteCoords::to_weights() const {
  std::vector<Rational> w(8);
  w[7] = a;
  w[6] = b1;
  w[5] = b2;
  w[3] = b3;
  w[1] = c1;
  w[2] = c2;
  w[4] = c3;
  w[0] = d;
  return WeightVector<Rational>(3, std::move(w));
}

ThreeSiteCoords ThreeSiteCoords::normalized() const {
  const Rational t = total();
  if (sgn(t) <= 0) throw std::invalid_argument("three-site coordinates have zero total");
  return ThreeSiteCoords{a / t, b1 / t, b2 / t, b3 / t, c1 / t, c2 / t, c3 / t, d / t};
}

std::string to_string(InequalitySystem s) {
  switch (s) {
    case InequalitySystem::top_covariance: return "top_covariance";
    case InequalitySystem::bottom_covariance: return "bottom_covariance";
    case InequalitySystem::pair_covariance: return "pair_covariance";
    case InequalitySystem::lower_lattice: return "lower_lattice";
    case InequalitySystem::upper_lattice: return "upper_lattice";
  }
  return "unknown";
}

InequalitySystem inequality_system_from_string(const std::string& name) {
  for (auto s : kInequalitySystems)
    if (to_string(s) == name) return s;
  throw std::invalid_argument("unknown inequality system '" + name + "'");
}

bool InequalityMargins::holds() const {
  for (const auto& s : slacks)
    if (sgn(s) < 0) return false;
  return true;
}

InequalityMargins margins(const ThreeSiteCoords& raw, InequalitySystem system) {
  const ThreeSiteCoords m = raw.normalized();
  const auto& [a, b1, b2, b3, c1, c2, c3, d] = m;
  InequalityMargins out{system, {}};
  auto& s = out.slacks;
  switch (system) {
    case InequalitySystem::top_covariance:
      s[0] = a * (c2 + c3 + d) - b1 * (b2 + b3 + c1);
      s[1] = a * (c1 + c3 + d) - b2 * (b1 + b3 + c2);
      s[2] = a * (c1 + c2 + d) - b3 * (b1 + b2 + c3);
      break;
    case InequalitySystem::bottom_covariance:
      s[0] = d * (b2 + b3 + a) - c1 * (c2 + c3 + b1);
      s[1] = d * (b1 + b3 + a) - c2 * (c1 + c3 + b2);
      s[2] = d * (b1 + b2 + a) - c3 * (c1 + c2 + b3);
      break;
    case InequalitySystem::pair_covariance:
      s[0] = (b1 + a) * (c1 + d) - (c3 + b2) * (b3 + c2);
      s[1] = (b2 + a) * (c2 + d) - (c1 + b3) * (b1 + c3);
      s[2] = (b3 + a) * (c3 + d) - (c2 + b1) * (b2 + c1);
      break;
    case InequalitySystem::lower_lattice:
      s[0] = b1 * d - c2 * c3;
      s[1] = b2 * d - c1 * c3;
      s[2] = b3 * d - c1 * c2;
      break;
    case InequalitySystem::upper_lattice:
      s[0] = c1 * a - b2 * b3;
      s[1] = c2 * a - b1 * b3;
      s[2] = c3 * a - b1 * b2;
      break;
  }
  return out;
}

std::array<Rational, 3> diagonal_slacks(const ThreeSiteCoords& raw) {
  const ThreeSiteCoords m = raw.normalized();
  return {m.a * m.d - m.b1 * m.c1, m.a * m.d - m.b2 * m.c2, m.a * m.d - m.b3 * m.c3};
}

ThreeSiteVerdicts classify(const ThreeSiteCoords& m) {
  ThreeSiteVerdicts v;
  std::array<bool, 5> ok{};
  for (std::size_t i = 0; i < kInequalitySystems.size(); ++i) {
    v.margins.push_back(margins(m, kInequalitySystems[i]));
    ok[i] = v.margins.back().holds();
  }
  v.diagonal = diagonal_slacks(m);
  bool diagonal_ok = true;
  for (const auto& s : v.diagonal) diagonal_ok = diagonal_ok && sgn(s) >= 0;

  const bool top = ok[0], bottom = ok[1], pair = ok[2], lower = ok[3], upper = ok[4];
  v.lattice = lower && upper && diagonal_ok;
  v.downward_fkg = top && pair && lower;
  v.dca = v.downward_fkg;
  v.associated = top && bottom && pair;
  return v;
}

bool check_diagonal_bound(const ThreeSiteCoords& m) {
  if (!margins(m, InequalitySystem::top_covariance).holds() ||
      !margins(m, InequalitySystem::lower_lattice).holds())
    throw std::invalid_argument("diagonal bound needs the top covariance and lower lattice systems");
  for (const auto& s : diagonal_slacks(m))
    if (sgn(s) < 0) return false;
  return true;
}

}  // namespace spincorr
