#include "spincorr/dynamics.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace spincorr {

namespace {

void require_same_sites(int expected, int got) {
  if (expected != got) throw std::invalid_argument("site counts do not match");
}

void require_site(int n, int site) {
  if (site < 0 || site >= n) throw std::invalid_argument("site " + std::to_string(site) + " out of range");
}

Margin exact_margin(const Rational& r) { return Margin{std::variant<Rational, double>(r)}; }

}  // namespace

RateTable::RateTable(int n, std::vector<std::vector<Rational>> births,
                     std::vector<std::vector<Rational>> deaths)
    : n_(n), births_(std::move(births)), deaths_(std::move(deaths)) {
  require_site_count(n);
  const auto sites = static_cast<std::size_t>(n);
  if (births_.size() != sites || deaths_.size() != sites)
    throw std::invalid_argument("rate table needs one birth and one death table per site");
  for (int x = 0; x < n; ++x)
    for (auto* table : {&births_[idx(x)], &deaths_[idx(x)]}) {
      if (table->size() != config_count(n))
        throw std::invalid_argument("rate table for site " + std::to_string(x) + " needs 2^n entries");
      for (const auto& v : *table)
        if (sgn(v) < 0) throw std::invalid_argument("negative rate at site " + std::to_string(x));
      const ConfigIndex bit = ConfigIndex{1} << x;
      for (ConfigIndex c = 0; c < config_count(n); ++c)
        if (c & bit) (*table)[c] = (*table)[c & ~bit];
    }
}

RateTable RateTable::from_functions(int n, const RateFunction& birth, const RateFunction& death) {
  require_site_count(n);
  std::vector<std::vector<Rational>> b(static_cast<std::size_t>(n)), d(static_cast<std::size_t>(n));
  for (int x = 0; x < n; ++x) {
    const ConfigIndex bit = ConfigIndex{1} << x;
    for (ConfigIndex c = 0; c < config_count(n); ++c) {
      b[idx(x)].push_back((c & bit) ? Rational(0) : birth(x, c));
      d[idx(x)].push_back((c & bit) ? Rational(0) : death(x, c));
    }
  }
  return RateTable(n, std::move(b), std::move(d));
}

RateTable RateTable::zero(int n) {
  require_site_count(n);
  std::vector<std::vector<Rational>> z(static_cast<std::size_t>(n),
                                       std::vector<Rational>(config_count(n), Rational(0)));
  return RateTable(n, z, z);
}

Generator::Generator(int n, std::vector<Rational> q)
    : n_(n), dim_(config_count(n)), q_(std::move(q)), qd_(q_.size()) {
  for (std::size_t i = 0; i < q_.size(); ++i) qd_[i] = q_[i].get_d();
}

double Generator::max_exit_rate() const {
  double best = 0;
  for (std::size_t i = 0; i < dim_; ++i) best = std::max(best, -qd_[i * dim_ + i]);
  return best;
}

std::vector<Rational> Generator::left_apply(const std::vector<Rational>& row) const {
  if (row.size() != dim_) throw std::invalid_argument("row vector has the wrong dimension");
  std::vector<Rational> out(dim_, Rational(0));
  for (std::size_t i = 0; i < dim_; ++i) {
    if (sgn(row[i]) == 0) continue;
    for (std::size_t j = 0; j < dim_; ++j)
      if (sgn(q_[i * dim_ + j]) != 0) out[j] += row[i] * q_[i * dim_ + j];
  }
  return out;
}

Generator build_generator(const RateTable& r) {
  const int n = r.sites();
  const std::size_t dim = config_count(n);
  std::vector<Rational> q(dim * dim, Rational(0));
  for (ConfigIndex c = 0; c < dim; ++c) {
    Rational exit = 0;
    for (int x = 0; x < n; ++x) {
      const Rational& rate = r.flip_rate(x, c);
      q[c * dim + (c ^ (ConfigIndex{1} << x))] = rate;
      exit += rate;
    }
    q[c * dim + c] = -exit;
  }
  return Generator(n, std::move(q));
}

Generator operator+(const Generator& lhs, const Generator& rhs) {
  require_same_sites(lhs.n_, rhs.n_);
  std::vector<Rational> q(lhs.q_);
  for (std::size_t i = 0; i < q.size(); ++i) q[i] += rhs.q_[i];
  return Generator(lhs.n_, std::move(q));
}

namespace {

// Sum_k Poisson(L; k) step^k(v), with `step` applying the uniformized matrix
// P = I + Q / rate. The Poisson tail after term k is bounded by
// w_{k+1} / (1 - L / (k + 2)) once k + 2 > L.
template <class Step>
std::vector<double> uniformize(std::vector<double> v, double total_rate, double tail, Step step) {
  std::vector<double> acc(v.size(), 0.0);
  double weight = std::exp(-total_rate);
  for (long k = 0;; ++k) {
    for (std::size_t i = 0; i < v.size(); ++i) acc[i] += weight * v[i];
    const double next_weight = weight * total_rate / static_cast<double>(k + 1);
    const double kk = static_cast<double>(k + 2);
    if (kk > total_rate && next_weight / (1.0 - total_rate / kk) < tail) break;
    if (k > 1000000) throw std::runtime_error("uniformization failed to converge");
    v = step(v);
    weight = next_weight;
  }
  return acc;
}

// Splits long horizons so that exp(-L t) stays far from underflow.
constexpr double kMaxPoissonMean = 400.0;

std::vector<double> evolve_row(const Generator& q, std::vector<double> row, double t,
                               const UniformizationOptions& opts) {
  if (!(t >= 0) || !std::isfinite(t)) throw std::invalid_argument("time must be finite and >= 0");
  const double rate = q.max_exit_rate();
  if (rate == 0 || t == 0) return row;
  const std::size_t dim = q.dimension();
  const auto& dense = q.dense();
  auto step = [&](const std::vector<double>& v) {
    std::vector<double> out(v);
    for (std::size_t i = 0; i < dim; ++i) {
      if (v[i] == 0) continue;
      const double vi = v[i] / rate;
      for (std::size_t j = 0; j < dim; ++j) out[j] += vi * dense[i * dim + j];
    }
    return out;
  };
  const int pieces = static_cast<int>(std::ceil(rate * t / kMaxPoissonMean));
  const double dt = t / pieces;
  for (int p = 0; p < pieces; ++p) row = uniformize(std::move(row), rate * dt, opts.tail_tolerance, step);
  return row;
}

FloatMeasure renormalized(int n, std::vector<double> w) {
  for (auto& v : w) v = std::max(v, 0.0);
  return normalize(WeightVector<double>(n, std::move(w)));
}

}  // namespace

FloatMeasure semigroup_apply(const Generator& q, const FloatMeasure& mu, double t,
                             const UniformizationOptions& opts) {
  require_same_sites(q.sites(), mu.sites());
  return renormalized(mu.sites(), evolve_row(q, mu.probabilities(), t, opts));
}

FloatMeasure semigroup_apply(const Generator& q, const ExactMeasure& mu, double t,
                             const UniformizationOptions& opts) {
  return semigroup_apply(q, to_float(mu), t, opts);
}

RealFunction<double> semigroup_apply_function(const Generator& q, const RealFunction<double>& f,
                                              double t, const UniformizationOptions& opts) {
  require_same_sites(q.sites(), f.n);
  if (!(t >= 0) || !std::isfinite(t)) throw std::invalid_argument("time must be finite and >= 0");
  const double rate = q.max_exit_rate();
  if (rate == 0 || t == 0) return f;
  const std::size_t dim = q.dimension();
  const auto& dense = q.dense();
  auto step = [&](const std::vector<double>& v) {
    std::vector<double> out(v);
    for (std::size_t i = 0; i < dim; ++i) {
      double s = 0;
      for (std::size_t j = 0; j < dim; ++j) s += dense[i * dim + j] * v[j];
      out[i] += s / rate;
    }
    return out;
  };
  const int pieces = static_cast<int>(std::ceil(rate * t / kMaxPoissonMean));
  const double dt = t / pieces;
  std::vector<double> v = f.values;
  for (int p = 0; p < pieces; ++p) v = uniformize(std::move(v), rate * dt, opts.tail_tolerance, step);
  return RealFunction<double>(f.n, std::move(v));
}

TransitionMatrix dense_exponential(const Generator& q, double t) {
  if (!(t >= 0) || !std::isfinite(t)) throw std::invalid_argument("time must be finite and >= 0");
  const auto dim = static_cast<Eigen::Index>(q.dimension());
  Eigen::MatrixXd m(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j)
      m(i, j) = t * q.rate(static_cast<ConfigIndex>(i), static_cast<ConfigIndex>(j));
  const Eigen::MatrixXd e = m.exp();
  TransitionMatrix out{q.dimension(), std::vector<double>(q.dimension() * q.dimension())};
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j)
      out.entries[static_cast<std::size_t>(i * dim + j)] = e(i, j);
  return out;
}

FloatMeasure trotter_compose(const Generator& q1, const Generator& q2, const FloatMeasure& mu,
                             double t, int steps, const UniformizationOptions& opts) {
  require_same_sites(q1.sites(), q2.sites());
  require_same_sites(q1.sites(), mu.sites());
  if (steps < 1) throw std::invalid_argument("Trotter composition needs at least one step");
  const double dt = t / steps;
  FloatMeasure out = mu;
  for (int k = 0; k < steps; ++k) out = semigroup_apply(q2, semigroup_apply(q1, out, dt, opts), dt, opts);
  return out;
}

PropertyReport is_attractive(const RateTable& r) {
  const int n = r.sites();
  PropertyReport rep{"attractive", Verdict::holds, {}, exact_margin(Rational(0)), {}};
  bool any = false;
  Rational min_slack = 0;
  for (int x = 0; x < n; ++x)
    for (ConfigIndex c = 0; c < config_count(n); ++c)
      for (int y = 0; y < n; ++y) {
        const ConfigIndex bit = ConfigIndex{1} << y;
        if (y == x || (c & bit)) continue;
        const Rational birth_slack = r.birth(x, c | bit) - r.birth(x, c);
        const Rational death_slack = r.death(x, c) - r.death(x, c | bit);
        for (const auto* slack : {&birth_slack, &death_slack}) {
          if (!any || *slack < min_slack) min_slack = *slack;
          any = true;
          if (!rep.fails() && sgn(*slack) < 0) {
            rep.verdict = Verdict::fails;
            rep.witness = SiteWitness{x, Config(n, c), Config(n, c | bit)};
            rep.details.emplace_back("rate", slack == &birth_slack ? "birth" : "death");
          }
        }
      }
  rep.margin = exact_margin(min_slack);
  return rep;
}

bool has_independent_flips(const RateTable& r) {
  for (int x = 0; x < r.sites(); ++x) {
    const auto& b = r.births(x);
    const auto& d = r.deaths(x);
    if (std::adjacent_find(b.begin(), b.end(), std::not_equal_to<>()) != b.end()) return false;
    if (std::adjacent_find(d.begin(), d.end(), std::not_equal_to<>()) != d.end()) return false;
  }
  return true;
}

bool has_constant_deaths(const RateTable& r) {
  for (int x = 0; x < r.sites(); ++x) {
    const auto& d = r.deaths(x);
    if (std::adjacent_find(d.begin(), d.end(), std::not_equal_to<>()) != d.end()) return false;
  }
  return true;
}

TransitionMatrix independent_flip_kernel(const RateTable& r, double t) {
  if (!has_independent_flips(r)) throw std::invalid_argument("rates are not independent flips");
  if (!(t >= 0) || !std::isfinite(t)) throw std::invalid_argument("time must be finite and >= 0");
  const int n = r.sites();
  // kernel[x][from][to] for the two-state chain at site x.
  std::vector<std::array<std::array<double, 2>, 2>> kernel(static_cast<std::size_t>(n));
  for (int x = 0; x < n; ++x) {
    const double birth = r.birth(x, 0).get_d();
    const double death = r.death(x, 0).get_d();
    const double total = birth + death;
    const double mixing = total > 0 ? -std::expm1(-total * t) / total : t;
    auto& k = kernel[static_cast<std::size_t>(x)];
    k[0][1] = birth * mixing;
    k[0][0] = 1 - k[0][1];
    k[1][0] = death * mixing;
    k[1][1] = 1 - k[1][0];
  }
  const std::size_t dim = config_count(n);
  TransitionMatrix out{dim, std::vector<double>(dim * dim)};
  for (ConfigIndex from = 0; from < dim; ++from)
    for (ConfigIndex to = 0; to < dim; ++to) {
      double p = 1;
      for (int x = 0; x < n; ++x) p *= kernel[static_cast<std::size_t>(x)][(from >> x) & 1u][(to >> x) & 1u];
      out.entries[from * dim + to] = p;
    }
  return out;
}

PropertyReport death_constant_on_nonzero(const RateTable& r) {
  const int n = r.sites();
  PropertyReport rep{"death_constant_on_nonzero", Verdict::holds, {}, exact_margin(Rational(0)), {}};
  for (int x = 0; x < n; ++x) {
    const ConfigIndex bit = ConfigIndex{1} << x;
    std::optional<ConfigIndex> reference;
    for (ConfigIndex c = 0; c < config_count(n); ++c) {
      // Representatives with eta(x) = 0; the all-empty representative is the
      // lone-particle rate and is exempt.
      if ((c & bit) || c == 0) continue;
      if (!reference) {
        reference = c;
        continue;
      }
      if (r.death(x, c) != r.death(x, *reference)) {
        rep.verdict = Verdict::fails;
        rep.witness = SiteWitness{x, Config(n, *reference | bit), Config(n, c | bit)};
        return rep;
      }
    }
  }
  return rep;
}

Rational AdditiveDecomposition::evaluate(ConfigIndex c) const {
  Rational s = 0;
  for (SiteMask a = 1; a < coefficients.size(); ++a)
    if (c & a) s += coefficients[a];
  return s;
}

AdditiveDecomposition additive_decomposition(const RateTable& r, int site) {
  const int n = r.sites();
  require_site(n, site);
  const SiteMask everything = all_sites(n);
  const auto& beta = r.births(site);
  // G(D) = f(S) - f(S \ D) is the zeta transform of the coefficients; invert
  // it over the subset lattice one site at a time.
  std::vector<Rational> g(config_count(n));
  for (SiteMask d = 0; d < g.size(); ++d) g[d] = beta[everything] - beta[everything & ~d];
  for (int x = 0; x < n; ++x)
    for (SiteMask a = 0; a < g.size(); ++a)
      if (a & (SiteMask{1} << x)) g[a] -= g[a & ~(SiteMask{1} << x)];

  AdditiveDecomposition out{site, std::move(g), true, true};
  out.coefficients[0] = 0;
  for (ConfigIndex c = 0; c < config_count(n); ++c)
    if (out.evaluate(c) != beta[c]) out.reconstructs = false;
  out.additive = out.reconstructs;
  for (const auto& v : out.coefficients)
    if (sgn(v) < 0) out.additive = false;
  return out;
}

PropertyReport check_birth_submodularity(const RateTable& r, int site) {
  const int n = r.sites();
  require_site(n, site);
  PropertyReport rep{"birth_submodular", Verdict::holds, {}, exact_margin(Rational(0)), {}};
  bool any = false;
  Rational min_slack = 0;
  for (ConfigIndex g = 0; g < config_count(n); ++g)
    for (int v = 0; v < n; ++v)
      for (int w = v + 1; w < n; ++w) {
        const ConfigIndex bv = ConfigIndex{1} << v, bw = ConfigIndex{1} << w;
        if ((g & bv) || (g & bw)) continue;
        const Rational slack =
            r.birth(site, g | bv) + r.birth(site, g | bw) - r.birth(site, g | bv | bw) - r.birth(site, g);
        if (!any || slack < min_slack) min_slack = slack;
        any = true;
        if (!rep.fails() && sgn(slack) < 0) {
          rep.verdict = Verdict::fails;
          rep.witness = SiteWitness{site, Config(n, g | bv), Config(n, g | bw)};
        }
      }
  rep.margin = exact_margin(min_slack);
  return rep;
}

void EventPolynomial::validate() const {
  require_site_count(n);
  const MemberMask full = full_member_mask(n);
  for (MemberMask e : events)
    if ((e & ~full) != 0) throw std::invalid_argument("malformed functional: event outside the configuration space");
  for (const auto& term : terms) {
    if (term.factors.size() > 2) throw std::invalid_argument("malformed functional: degree above 2");
    for (std::size_t f : term.factors)
      if (f >= events.size()) throw std::invalid_argument("malformed functional: unknown event index");
  }
}

Rational EventPolynomial::evaluate(const ExactMeasure& mu) const {
  validate();
  require_same_sites(n, mu.sites());
  Rational total = 0;
  for (const auto& term : terms) {
    Rational v = term.coefficient;
    for (std::size_t f : term.factors) v *= mu.probability(events[f]);
    total += v;
  }
  return total;
}

double EventPolynomial::evaluate(const FloatMeasure& mu) const {
  validate();
  require_same_sites(n, mu.sites());
  double total = 0;
  for (const auto& term : terms) {
    double v = term.coefficient.get_d();
    for (std::size_t f : term.factors) v *= mu.probability(events[f]);
    total += v;
  }
  return total;
}

EventPolynomial EventPolynomial::pair_determinant(int n, int x, int y, SiteMask zero_sites) {
  require_site_count(n);
  require_site(n, x);
  require_site(n, y);
  if (x == y) throw std::invalid_argument("pair determinant needs distinct sites");
  if (zero_sites & ((SiteMask{1} << x) | (SiteMask{1} << y)))
    throw std::invalid_argument("conditioning sites must avoid the pair");
  EventPolynomial p;
  p.n = n;
  p.events.assign(4, 0);  // 11, 00, 10, 01 in (eta(x), eta(y))
  for (ConfigIndex c = 0; c < config_count(n); ++c) {
    if (c & zero_sites) continue;
    const unsigned vx = (c >> x) & 1u, vy = (c >> y) & 1u;
    const std::size_t slot = vx && vy ? 0 : (!vx && !vy ? 1 : (vx ? 2 : 3));
    p.events[slot] |= MemberMask{1} << c;
  }
  p.terms = {{Rational(1), {0, 1}}, {Rational(-1), {2, 3}}};
  return p;
}

Rational derivative_at_zero(const Generator& q, const ExactMeasure& mu, const EventPolynomial& f) {
  f.validate();
  require_same_sites(q.sites(), mu.sites());
  require_same_sites(f.n, mu.sites());
  const std::vector<Rational> flow = q.left_apply(mu.probabilities());
  auto mass = [](const std::vector<Rational>& v, MemberMask event) {
    Rational s = 0;
    for (MemberMask m = event; m != 0; m &= m - 1) s += v[static_cast<std::size_t>(std::countr_zero(m))];
    return s;
  };
  Rational total = 0;
  for (const auto& term : f.terms) {
    if (term.factors.size() == 1) {
      total += term.coefficient * mass(flow, f.events[term.factors[0]]);
    } else if (term.factors.size() == 2) {
      const MemberMask e0 = f.events[term.factors[0]], e1 = f.events[term.factors[1]];
      total += term.coefficient * (mass(flow, e0) * mu.probability(e1) + mu.probability(e0) * mass(flow, e1));
    }
  }
  return total;
}

}  // namespace spincorr
