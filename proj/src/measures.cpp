#include "spincorr/measures.hpp"

#include "spincorr/three_site.hpp"
#include "spincorr/tilt_sampler.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

namespace spincorr {

namespace {

using Int128 = __int128;

mpz_class to_mpz(Int128 v) {
  const bool negative = v < 0;
  const unsigned __int128 u = negative ? -static_cast<unsigned __int128>(v)
                                       : static_cast<unsigned __int128>(v);
  mpz_class hi(static_cast<unsigned long>(u >> 64));
  mpz_class lo(static_cast<unsigned long>(u & ~std::uint64_t{0}));
  mpz_class r = (hi << 64) + lo;
  return negative ? mpz_class(-r) : r;
}

template <class T>
bool is_zero(const T& v) {
  return v == T(0);
}

template <class T>
bool negative_beyond(const T& v, double tolerance) {
  if constexpr (std::is_same_v<T, double>)
    return v < -tolerance;
  else
    return sgn(v) < 0;
}

// Sum of weights over a membership mask using one lookup per byte.
template <class S>
class SubsetSums {
 public:
  explicit SubsetSums(const std::vector<S>& w) : bytes_((w.size() + 7) / 8), table_(bytes_ * 256, S(0)) {
    for (std::size_t b = 0; b < bytes_; ++b)
      for (unsigned v = 1; v < 256; ++v) {
        const std::size_t low = b * 8 + static_cast<std::size_t>(std::countr_zero(v));
        table_[b * 256 + v] = table_[b * 256 + (v & (v - 1))];
        if (low < w.size()) table_[b * 256 + v] += w[low];
      }
  }

  S operator()(MemberMask m) const {
    S s(0);
    for (std::size_t b = 0; b < bytes_; ++b) {
      const auto byte = static_cast<unsigned>((m >> (8 * b)) & 0xffu);
      if (byte) s += table_[b * 256 + byte];
    }
    return s;
  }

 private:
  std::size_t bytes_;
  std::vector<S> table_;
};

template <class S>
struct PairSweep {
  bool violated = false;
  std::size_t first = 0;
  std::size_t second = 0;
  S first_value{};
  S min_value{};
  bool any_pair = false;
};

// Scaled covariance total * w(U and V) - w(U) w(V) over pairs i < j of `sets`.
template <class S, class Bad>
PairSweep<S> sweep_pairs(const std::vector<MemberMask>& sets, const SubsetSums<S>& sums,
                         const S& total, bool full, unsigned workers, Bad bad) {
  const std::size_t m = sets.size();
  std::vector<S> single(m);
  for (std::size_t i = 0; i < m; ++i) single[i] = sums(sets[i]);

  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(m, 1))));
  std::vector<PairSweep<S>> partial(workers);
  std::atomic<std::size_t> stop_row{std::numeric_limits<std::size_t>::max()};

  auto run = [&](unsigned w) {
    PairSweep<S>& out = partial[w];
    for (std::size_t i = w; i < m; i += workers) {
      if (!full && i > stop_row.load(std::memory_order_relaxed)) break;
      for (std::size_t j = i + 1; j < m; ++j) {
        S cov = total * sums(sets[i] & sets[j]);
        cov -= single[i] * single[j];
        if (!out.any_pair || cov < out.min_value) out.min_value = cov;
        out.any_pair = true;
        if (!out.violated && bad(cov)) {
          out.violated = true;
          out.first = i;
          out.second = j;
          out.first_value = cov;
          std::size_t cur = stop_row.load();
          while (i < cur && !stop_row.compare_exchange_weak(cur, i)) {
          }
          if (!full) return;
        }
      }
    }
  };

  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run, w);
    for (auto& t : pool) t.join();
  }

  PairSweep<S> result;
  for (const auto& p : partial) {
    if (p.any_pair && (!result.any_pair || p.min_value < result.min_value)) result.min_value = p.min_value;
    result.any_pair = result.any_pair || p.any_pair;
    if (p.violated && (!result.violated || std::pair(p.first, p.second) < std::pair(result.first, result.second))) {
      result.violated = true;
      result.first = p.first;
      result.second = p.second;
      result.first_value = p.first_value;
    }
  }
  return result;
}

std::vector<MemberMask> nontrivial_up_sets(int n) {
  const auto& all = up_set_masks(n);
  const MemberMask full = full_member_mask(n);
  std::vector<MemberMask> out;
  out.reserve(all.size());
  for (MemberMask m : all)
    if (m != 0 && m != full) out.push_back(m);
  return out;
}

template <class T>
struct AssociationResult {
  bool violated = false;
  MemberMask first = 0;
  MemberMask second = 0;
  T margin{0};
};

void require_association_budget(int n, const CheckOptions& opts) {
  if (n > 5 && !opts.allow_six_sites)
    throw BudgetExceeded("association sweep on " + std::to_string(n) +
                         " sites needs the six-site opt-in");
}

// Association of the measure proportional to `weights` on n sites.
template <class T>
AssociationResult<T> association_of(int n, const std::vector<T>& weights, const CheckOptions& opts) {
  require_association_budget(n, opts);
  AssociationResult<T> out;
  const auto sets = nontrivial_up_sets(n);
  if (sets.size() < 2) return out;

  auto finish = [&](const auto& sweep, auto to_margin) {
    const auto& chosen = (sweep.violated && !opts.full_margin) ? sweep.first_value : sweep.min_value;
    out.margin = to_margin(chosen);
    if (sweep.violated) {
      out.violated = true;
      out.first = sets[sweep.first];
      out.second = sets[sweep.second];
    }
  };

  if constexpr (std::is_same_v<T, double>) {
    double total = 0;
    for (double w : weights) total += w;
    std::vector<double> p(weights.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = weights[i] / total;
    SubsetSums<double> sums(p);
    const double tol = opts.tolerance;
    auto sweep = sweep_pairs<double>(sets, sums, 1.0, opts.full_margin, opts.workers,
                                     [tol](double c) { return c < -tol; });
    finish(sweep, [](double c) { return c; });
  } else {
    const ScaledIntegers scaled = to_common_denominator(weights);
    mpz_class total = 0;
    for (const auto& v : scaled.numerators) total += v;
    const mpz_class total_sq = total * total;
    auto exact_margin = [&](const mpz_class& c) {
      Rational r(c, total_sq);
      r.canonicalize();
      return r;
    };
    if (mpz_sizeinbase(total.get_mpz_t(), 2) <= 62) {
      std::vector<Int128> w;
      w.reserve(scaled.numerators.size());
      for (const auto& v : scaled.numerators) w.push_back(static_cast<Int128>(v.get_si()));
      SubsetSums<Int128> sums(w);
      auto sweep = sweep_pairs<Int128>(sets, sums, static_cast<Int128>(total.get_si()), opts.full_margin,
                                       opts.workers, [](Int128 c) { return c < 0; });
      finish(sweep, [&](Int128 c) { return exact_margin(to_mpz(c)); });
    } else {
      SubsetSums<mpz_class> sums(scaled.numerators);
      auto sweep = sweep_pairs<mpz_class>(sets, sums, total, opts.full_margin, opts.workers,
                                          [](const mpz_class& c) { return sgn(c) < 0; });
      finish(sweep, [&](const mpz_class& c) { return exact_margin(c); });
    }
  }
  return out;
}

// Scatters the low bits of `sub` onto the set bits of `positions`.
ConfigIndex deposit(ConfigIndex sub, SiteMask positions) {
  ConfigIndex out = 0;
  for (SiteMask p = positions; p != 0; p &= p - 1, sub >>= 1)
    if (sub & 1u) out |= p & (~p + 1);
  return out;
}

MemberMask embed_up_set(int n, MemberMask sub_members, SiteMask free_sites) {
  MemberMask full = 0;
  for (MemberMask m = sub_members; m != 0; m &= m - 1)
    full |= MemberMask{1} << deposit(static_cast<ConfigIndex>(std::countr_zero(m)), free_sites);
  return up_closure(n, full);
}

template <class T>
Margin make_margin(const T& v) {
  return Margin{std::variant<Rational, double>(v)};
}

}  // namespace

// ---------------------------------------------------------------------------

template <class T>
WeightVector<T>::WeightVector(int n, std::vector<T> weights) : n_(n), weights_(std::move(weights)) {
  require_site_count(n);
  if (weights_.size() != config_count(n))
    throw std::invalid_argument("weight vector needs 2^n = " + std::to_string(config_count(n)) +
                                " entries, got " + std::to_string(weights_.size()));
  for (const auto& w : weights_) {
    if constexpr (std::is_same_v<T, double>)
      if (!std::isfinite(w)) throw std::invalid_argument("non-finite weight");
    if (w < T(0)) throw std::invalid_argument("negative weight");
  }
  if (!(total() > T(0))) throw std::invalid_argument("weights have zero total");
}

template <class T>
T WeightVector<T>::total() const {
  T s(0);
  for (const auto& w : weights_) s += w;
  return s;
}

template <class T>
bool WeightVector<T>::strictly_positive() const {
  return std::all_of(weights_.begin(), weights_.end(), [](const T& w) { return w > T(0); });
}

template <class T>
Measure<T>::Measure(int n, std::vector<T> probabilities) : n_(n), p_(std::move(probabilities)) {
  WeightVector<T> check(n, p_);
  const T total = check.total();
  if constexpr (std::is_same_v<T, double>) {
    if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("probabilities do not sum to 1");
  } else {
    if (total != 1) throw std::invalid_argument("probabilities do not sum to 1");
  }
}

template <class T>
T Measure<T>::probability(MemberMask event) const {
  T s(0);
  for (MemberMask m = event; m != 0; m &= m - 1) {
    const auto c = static_cast<ConfigIndex>(std::countr_zero(m));
    if (c < p_.size()) s += p_[c];
  }
  return s;
}

template <class T>
bool Measure<T>::strictly_positive() const {
  return std::all_of(p_.begin(), p_.end(), [](const T& w) { return w > T(0); });
}

template <class T>
Measure<T> normalize(const WeightVector<T>& w) {
  const T total = w.total();
  std::vector<T> p(w.weights());
  for (auto& v : p) v /= total;
  if constexpr (std::is_same_v<T, double>) {
    // Absorb rounding so the sum-to-one invariant holds tightly.
    double s = 0;
    for (double v : p) s += v;
    for (auto& v : p) v /= s;
  }
  return Measure<T>(w.sites(), std::move(p));
}

FloatMeasure to_float(const ExactMeasure& mu) {
  std::vector<double> p;
  p.reserve(mu.probabilities().size());
  for (const auto& v : mu.probabilities()) p.push_back(v.get_d());
  return normalize(WeightVector<double>(mu.sites(), std::move(p)));
}

template <class T>
T expectation(const Measure<T>& mu, const RealFunction<T>& f) {
  if (f.n != mu.sites()) throw std::invalid_argument("function and measure on different site sets");
  T s(0);
  for (ConfigIndex c = 0; c < f.values.size(); ++c) s += mu[c] * f(c);
  return s;
}

template <class T>
T covariance(const Measure<T>& mu, const RealFunction<T>& f, const RealFunction<T>& g) {
  if (f.n != mu.sites() || g.n != mu.sites())
    throw std::invalid_argument("function and measure on different site sets");
  T fg(0);
  for (ConfigIndex c = 0; c < f.values.size(); ++c) fg += mu[c] * f(c) * g(c);
  return T(fg - expectation(mu, f) * expectation(mu, g));
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::holds: return "holds";
    case Verdict::fails: return "fails";
    case Verdict::search_exhausted: return "falsified-only-search-exhausted";
  }
  return "unknown";
}

double Margin::approx() const {
  return std::visit([](const auto& v) { return to_double(v); }, value);
}

std::string Margin::to_string() const {
  if (const auto* r = std::get_if<Rational>(&value)) return spincorr::to_string(*r);
  std::ostringstream os;
  os.precision(17);
  os << std::get<double>(value);
  return os.str();
}

const std::string* PropertyReport::detail(const std::string& key) const {
  for (const auto& [k, v] : details)
    if (k == key) return &v;
  return nullptr;
}

template <class T>
PropertyReport is_associated(const Measure<T>& mu, const CheckOptions& opts) {
  const auto r = association_of(mu.sites(), mu.probabilities(), opts);
  PropertyReport rep{"associated", r.violated ? Verdict::fails : Verdict::holds, {}, make_margin(r.margin), {}};
  if (r.violated)
    rep.witness = UpSetPairWitness{UpSet(mu.sites(), r.first), UpSet(mu.sites(), r.second)};
  return rep;
}

template <class T>
PropertyReport satisfies_lattice(const WeightVector<T>& w, const CheckOptions& opts) {
  const int n = w.sites();
  const Measure<T> mu = normalize(w);
  const bool positive = w.strictly_positive();
  PropertyReport rep{"lattice", Verdict::holds, {}, make_margin(T(0)), {}};
  rep.details.emplace_back("strictly_positive", positive ? "true" : "false");
  rep.details.emplace_back("pairs", positive ? "two-site" : "all");

  bool any = false;
  T min_slack(0);
  auto visit = [&](ConfigIndex a, ConfigIndex b) {
    T slack = mu[a & b] * mu[a | b];
    slack -= mu[a] * mu[b];
    if (!any || slack < min_slack) min_slack = slack;
    any = true;
    if (!rep.fails() && negative_beyond(slack, opts.tolerance)) {
      rep.verdict = Verdict::fails;
      rep.witness = ConfigPairWitness{Config(n, a), Config(n, b)};
      if (!opts.full_margin) {
        min_slack = slack;
        return false;
      }
    }
    return true;
  };

  const ConfigIndex count = config_count(n);
  if (positive) {
    for (ConfigIndex g = 0; g < count; ++g)
      for (int x = 0; x < n; ++x)
        for (int y = x + 1; y < n; ++y) {
          const ConfigIndex bx = ConfigIndex{1} << x, by = ConfigIndex{1} << y;
          if ((g & bx) || (g & by)) continue;
          if (!visit(g | bx, g | by)) goto done;
        }
  } else {
    for (ConfigIndex a = 0; a < count; ++a)
      for (ConfigIndex b = a + 1; b < count; ++b) {
        if ((a & b) == a || (a & b) == b) continue;
        if (!visit(a, b)) goto done;
      }
  }
done:
  rep.margin = make_margin(min_slack);
  return rep;
}

template <class T>
Measure<T> condition_zeros(const Measure<T>& mu, SiteMask zero_sites) {
  if ((zero_sites & ~all_sites(mu.sites())) != 0)
    throw std::invalid_argument("conditioning sites out of range");
  std::vector<T> w(mu.probabilities().size(), T(0));
  T total(0);
  for (ConfigIndex c = 0; c < w.size(); ++c)
    if ((c & zero_sites) == 0) {
      w[c] = mu[c];
      total += mu[c];
    }
  if (!(total > T(0)))
    throw std::domain_error("conditioning on a zero-probability event");
  return normalize(WeightVector<T>(mu.sites(), std::move(w)));
}

template <class T>
PropertyReport is_downward_fkg(const Measure<T>& mu, const CheckOptions& opts) {
  const int n = mu.sites();
  require_association_budget(n, opts);
  PropertyReport rep{"downward_fkg", Verdict::holds, {}, make_margin(T(0)), {}};
  bool any = false;
  T min_margin(0);
  int skipped = 0;
  for (SiteMask zeros = 0; zeros < config_count(n); ++zeros) {
    const SiteMask free_sites = all_sites(n) & ~zeros;
    const int free_count = std::popcount(free_sites);
    std::vector<T> projected(config_count(free_count > 0 ? free_count : 1), T(0));
    T total(0);
    for (ConfigIndex sub = 0; sub < config_count(free_count > 0 ? free_count : 1); ++sub) {
      if (free_count == 0 && sub > 0) break;
      projected[sub] = mu[deposit(sub, free_sites)];
      total += projected[sub];
    }
    if (is_zero(total) || total < T(0)) {
      ++skipped;
      continue;
    }
    if (free_count == 0) continue;
    const auto r = association_of(free_count, projected, opts);
    if (!any || r.margin < min_margin) min_margin = r.margin;
    any = true;
    if (r.violated && !rep.fails()) {
      rep.verdict = Verdict::fails;
      rep.witness = ConditionedWitness{zeros, UpSet(n, embed_up_set(n, r.first, free_sites)),
                                       UpSet(n, embed_up_set(n, r.second, free_sites))};
      if (!opts.full_margin) {
        min_margin = r.margin;
        break;
      }
    }
  }
  rep.margin = make_margin(min_margin);
  rep.details.emplace_back("skipped_zero_probability_events", std::to_string(skipped));
  return rep;
}

template <class T>
Measure<T> tilt(const Measure<T>& mu, const RealFunction<T>& h) {
  if (h.n != mu.sites()) throw std::invalid_argument("tilt on a different site set");
  std::vector<T> w(mu.probabilities());
  for (ConfigIndex c = 0; c < w.size(); ++c) {
    if (!(h(c) > T(0))) throw std::invalid_argument("tilt must be strictly positive");
    w[c] *= h(c);
  }
  return normalize(WeightVector<T>(mu.sites(), std::move(w)));
}

namespace {

template <class T>
RealFunction<T> convert_tilt(const RealFunction<Rational>& h) {
  if constexpr (std::is_same_v<T, double>) {
    std::vector<double> v;
    v.reserve(h.values.size());
    for (const auto& x : h.values) v.push_back(x.get_d());
    return RealFunction<double>(h.n, std::move(v));
  } else {
    return h;
  }
}

// Exact DCA verdict where one is known: everything holds on a single site,
// the 2x2 determinant decides on two sites, and on three sites the
// inequality classifier (exact) or the equivalent downward-FKG sweep
// (floating point) decides.
template <class T>
std::optional<bool> known_dca_verdict(const Measure<T>& mu, const CheckOptions& opts) {
  const int n = mu.sites();
  if (n == 1) return true;
  if (n > 3) return std::nullopt;
  if constexpr (std::is_same_v<T, Rational>) {
    if (n == 2) return mu[3] * mu[0] >= mu[1] * mu[2];
    return classify(ThreeSiteCoords::from_weights(mu.weights())).dca;
  } else {
    return is_downward_fkg(mu, opts).holds();
  }
}

}  // namespace

template <class T>
PropertyReport dca_falsify(const Measure<T>& mu, TiltSampler& sampler, std::size_t budget,
                           const CheckOptions& opts) {
  const int n = mu.sites();
  if (sampler.sites() != n) throw std::invalid_argument("tilt sampler on a different site set");
  PropertyReport rep{"dca", Verdict::holds, {}, make_margin(T(0)), {}};
  bool any = false;
  T min_margin(0);
  std::size_t tried = 0;
  CheckOptions inner = opts;
  inner.full_margin = false;

  auto try_tilt = [&](const RealFunction<Rational>& h) {
    const auto r = is_associated(tilt(mu, convert_tilt<T>(h)), inner);
    const T m = std::get<T>(r.margin.value);
    if (!any || m < min_margin) min_margin = m;
    any = true;
    if (r.fails()) {
      const auto& pair = std::get<UpSetPairWitness>(r.witness);
      rep.verdict = Verdict::fails;
      rep.witness = TiltWitness{h.values, pair.first, pair.second};
      return true;
    }
    return false;
  };

  for (; tried < budget; ++tried) {
    const auto h = sampler.next();
    if (!is_valid_tilt(h)) throw std::logic_error("tilt sampler emitted an inadmissible tilt");
    if (try_tilt(h)) {
      ++tried;
      break;
    }
  }

  const auto known = known_dca_verdict(mu, opts);
  if (known.has_value()) {
    rep.details.emplace_back("certified", n <= 2 ? "closed-form" : "three-site");
    if (*known && rep.fails())
      throw std::logic_error("sampled tilt contradicts the exact DCA verdict");
    if (!*known && !rep.fails()) {
      // Push a zero-conditioning tilt towards its limit until the tilted
      // measure inherits the conditioned measure's negative covariance.
      const auto down = is_downward_fkg(mu, opts);
      const auto* where = std::get_if<ConditionedWitness>(&down.witness);
      if (where == nullptr) throw std::logic_error("DCA fails but no downward-FKG witness exists");
      Rational eps(1, 2);
      for (int k = 0; k < 200 && !rep.fails(); ++k, eps /= 2) try_tilt(zero_conditioning_tilt(n, where->zero_sites, eps));
      if (!rep.fails()) throw std::logic_error("could not realize a DCA witness from the conditioning limit");
    }
  } else if (!rep.fails()) {
    rep.verdict = Verdict::search_exhausted;
  }
  rep.margin = make_margin(min_margin);
  rep.details.emplace_back("tilts_tried", std::to_string(tried));
  return rep;
}

template <class T>
PropertyReport stochastically_dominated(const Measure<T>& lower, const Measure<T>& upper,
                                        const CheckOptions& opts) {
  if (lower.sites() != upper.sites()) throw std::invalid_argument("measures on different site sets");
  const int n = lower.sites();
  SubsetSums<T> lo(lower.probabilities()), hi(upper.probabilities());
  PropertyReport rep{"stochastically_dominated", Verdict::holds, {}, make_margin(T(0)), {}};
  bool any = false;
  T min_slack(0);
  for (MemberMask m : nontrivial_up_sets(n)) {
    T slack = hi(m) - lo(m);
    if (!any || slack < min_slack) min_slack = slack;
    any = true;
    if (!rep.fails() && negative_beyond(slack, opts.tolerance)) {
      rep.verdict = Verdict::fails;
      rep.witness = UpSetWitness{UpSet(n, m)};
      if (!opts.full_margin) {
        min_slack = slack;
        break;
      }
    }
  }
  rep.margin = make_margin(min_slack);
  return rep;
}

#define SPINCORR_INSTANTIATE(T)                                                                \
  template class WeightVector<T>;                                                              \
  template class Measure<T>;                                                                   \
  template Measure<T> normalize(const WeightVector<T>&);                                       \
  template T expectation(const Measure<T>&, const RealFunction<T>&);                           \
  template T covariance(const Measure<T>&, const RealFunction<T>&, const RealFunction<T>&);    \
  template PropertyReport is_associated(const Measure<T>&, const CheckOptions&);               \
  template PropertyReport satisfies_lattice(const WeightVector<T>&, const CheckOptions&);      \
  template Measure<T> condition_zeros(const Measure<T>&, SiteMask);                            \
  template PropertyReport is_downward_fkg(const Measure<T>&, const CheckOptions&);             \
  template Measure<T> tilt(const Measure<T>&, const RealFunction<T>&);                         \
  template PropertyReport dca_falsify(const Measure<T>&, TiltSampler&, std::size_t,            \
                                      const CheckOptions&);                                    \
  template PropertyReport stochastically_dominated(const Measure<T>&, const Measure<T>&,       \
                                                   const CheckOptions&);

SPINCORR_INSTANTIATE(Rational)
SPINCORR_INSTANTIATE(double)

#undef SPINCORR_INSTANTIATE

}  // namespace spincorr
