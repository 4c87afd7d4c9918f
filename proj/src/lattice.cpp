#include "spincorr/lattice.hpp"

#include "spincorr/rational.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <mutex>
#include <stdexcept>

namespace spincorr {

void require_site_count(int n) {
  if (n < 1 || n > kMaxSites)
    throw std::invalid_argument("site count " + std::to_string(n) + " outside [1, " +
                                std::to_string(kMaxSites) + "]");
}

SiteSet::SiteSet(int n) : n_(n) { require_site_count(n); }

Config::Config(int n, ConfigIndex bits) : n_(n), bits_(bits) {
  require_site_count(n);
  if (bits >= spincorr::config_count(n))
    throw std::invalid_argument("configuration mask out of range for " + std::to_string(n) +
                                " sites");
}

Config Config::from_string(std::string_view sites) {
  ConfigIndex bits = 0;
  for (std::size_t i = 0; i < sites.size(); ++i) {
    if (sites[i] == '1')
      bits |= ConfigIndex{1} << i;
    else if (sites[i] != '0')
      throw std::invalid_argument("configuration string must be 0/1: '" + std::string(sites) + "'");
  }
  return Config(static_cast<int>(sites.size()), bits);
}

bool Config::leq(const Config& other) const {
  if (n_ != other.n_) throw std::invalid_argument("configurations over different site sets");
  return (bits_ & ~other.bits_) == 0;
}

std::string config_string(int n, ConfigIndex bits) {
  std::string s(static_cast<std::size_t>(n), '0');
  for (int x = 0; x < n; ++x)
    if ((bits >> x) & 1u) s[static_cast<std::size_t>(x)] = '1';
  return s;
}

std::string Config::to_string() const { return config_string(n_, bits_); }

std::pair<Config, Config> meet_join(const Config& a, const Config& b) {
  if (a.sites() != b.sites()) throw std::invalid_argument("meet/join of mismatched site counts");
  return {Config(a.sites(), a.bits() & b.bits()), Config(a.sites(), a.bits() | b.bits())};
}

Config flip(const Config& a, std::span<const int> sites) {
  ConfigIndex toggle = 0;
  for (int x : sites) {
    if (x < 0 || x >= a.sites())
      throw std::invalid_argument("flip site " + std::to_string(x) + " out of range");
    if ((toggle >> x) & 1u) throw std::invalid_argument("flip sites must be distinct");
    toggle |= ConfigIndex{1} << x;
  }
  return Config(a.sites(), a.bits() ^ toggle);
}

bool is_up_closed(int n, MemberMask members) {
  const ConfigIndex count = config_count(n);
  for (ConfigIndex c = 0; c < count; ++c) {
    if (!((members >> c) & 1u)) continue;
    for (int x = 0; x < n; ++x) {
      ConfigIndex up = c | (ConfigIndex{1} << x);
      if (!((members >> up) & 1u)) return false;
    }
  }
  return true;
}

MemberMask up_closure(int n, MemberMask members) {
  const ConfigIndex count = config_count(n);
  // Ascending index order visits every configuration after all of its
  // single-bit predecessors.
  for (ConfigIndex c = 0; c < count; ++c) {
    if (!((members >> c) & 1u)) continue;
    for (int x = 0; x < n; ++x) members |= MemberMask{1} << (c | (ConfigIndex{1} << x));
  }
  return members;
}

UpSet::UpSet(int n, MemberMask members) : n_(n), members_(members) {
  require_site_count(n);
  if ((members & ~full_member_mask(n)) != 0)
    throw std::invalid_argument("up-set members outside the configuration space");
  if (!is_up_closed(n, members)) throw std::invalid_argument("set is not upward closed");
}

int UpSet::size() const { return std::popcount(members_); }

std::vector<ConfigIndex> UpSet::elements() const {
  std::vector<ConfigIndex> out;
  for (MemberMask m = members_; m != 0; m &= m - 1)
    out.push_back(static_cast<ConfigIndex>(std::countr_zero(m)));
  return out;
}

namespace {

// Up-sets on n sites split by the top site into (bottom half, top half)
// = (U0, U1) with U0 a subset of U1, both up-sets on n - 1 sites.
std::vector<MemberMask> build_up_sets(int n, const std::vector<MemberMask>& smaller) {
  const unsigned half = 1u << (n - 1);
  std::vector<MemberMask> out;
  for (MemberMask lower : smaller)
    for (MemberMask upper : smaller)
      if ((lower & ~upper) == 0) out.push_back(lower | (upper << half));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

const std::vector<MemberMask>& up_set_masks(int n) {
  require_site_count(n);
  static std::array<std::vector<MemberMask>, kMaxSites + 1> cache;
  static std::array<std::once_flag, kMaxSites + 1> once;
  std::call_once(once[static_cast<std::size_t>(n)], [n] {
    // Zero sites: the empty set and the single point.
    const std::vector<MemberMask> base{0, 1};
    const auto& smaller = n == 1 ? base : up_set_masks(n - 1);
    cache[static_cast<std::size_t>(n)] = build_up_sets(n, smaller);
  });
  return cache[static_cast<std::size_t>(n)];
}

std::vector<UpSet> enumerate_up_sets(const SiteSet& s) {
  const auto& masks = up_set_masks(s.size());
  std::vector<UpSet> out;
  out.reserve(masks.size());
  for (MemberMask m : masks) out.emplace_back(s.size(), m);
  return out;
}

template <class T>
RealFunction<T>::RealFunction(int sites, std::vector<T> v) : n(sites), values(std::move(v)) {
  require_site_count(sites);
  if (values.size() != config_count(sites))
    throw std::invalid_argument("function needs one value per configuration");
}

template <class T>
RealFunction<T> RealFunction<T>::constant(int sites, const T& c) {
  require_site_count(sites);
  return RealFunction(sites, std::vector<T>(config_count(sites), c));
}

template <class T>
RealFunction<T> RealFunction<T>::coordinate(int sites, int site) {
  require_site_count(sites);
  if (site < 0 || site >= sites) throw std::invalid_argument("site out of range");
  std::vector<T> v(config_count(sites));
  for (ConfigIndex c = 0; c < v.size(); ++c) v[c] = T((c >> site) & 1u);
  return RealFunction(sites, std::move(v));
}

template <class T>
RealFunction<T> RealFunction<T>::indicator(int sites, MemberMask members) {
  require_site_count(sites);
  std::vector<T> v(config_count(sites));
  for (ConfigIndex c = 0; c < v.size(); ++c) v[c] = T((members >> c) & 1u);
  return RealFunction(sites, std::move(v));
}

template <class T>
std::optional<OrderViolation> find_increase_violation(const RealFunction<T>& f) {
  const ConfigIndex count = config_count(f.n);
  for (ConfigIndex c = 0; c < count; ++c)
    for (int x = f.n - 1; x >= 0; --x) {
      const ConfigIndex bit = ConfigIndex{1} << x;
      if (c & bit) continue;
      if (f.values[c] > f.values[c | bit])
        return OrderViolation{Config(f.n, c), Config(f.n, c | bit)};
    }
  return std::nullopt;
}

template <class T>
T LayerDecomposition<T>::evaluate(ConfigIndex c) const {
  T total = constant;
  for (const auto& [coefficient, set] : terms)
    if (set.contains(c)) total += coefficient;
  return total;
}

template <class T>
LayerDecomposition<T> decompose_increasing(const RealFunction<T>& f) {
  if (auto v = find_increase_violation(f))
    throw std::invalid_argument("function is not increasing: f(" + v->lower.to_string() +
                                ") > f(" + v->upper.to_string() + ")");
  std::vector<T> levels = f.values;
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

  LayerDecomposition<T> out{levels.front(), {}};
  for (std::size_t i = 1; i < levels.size(); ++i) {
    MemberMask members = 0;
    for (ConfigIndex c = 0; c < f.values.size(); ++c)
      if (f.values[c] >= levels[i]) members |= MemberMask{1} << c;
    out.terms.emplace_back(T(levels[i] - levels[i - 1]), UpSet(f.n, members));
  }
  return out;
}

template struct RealFunction<Rational>;
template struct RealFunction<double>;
template struct LayerDecomposition<Rational>;
template struct LayerDecomposition<double>;
template std::optional<OrderViolation> find_increase_violation(const RealFunction<Rational>&);
template std::optional<OrderViolation> find_increase_violation(const RealFunction<double>&);
template LayerDecomposition<Rational> decompose_increasing(const RealFunction<Rational>&);
template LayerDecomposition<double> decompose_increasing(const RealFunction<double>&);

}  // namespace spincorr
