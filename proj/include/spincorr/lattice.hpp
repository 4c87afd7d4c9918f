#pragma once

// Configurations of {0,1}^S for a finite site set S = {0, ..., n-1}.
//
// A configuration is an n-bit mask with site x stored in bit x. Text forms
// list sites in order, so "110" has sites 0 and 1 occupied (mask 0b011).
// Up-sets are stored as membership bitsets over the 2^n configuration
// indices, which caps n at 6 (one 64-bit word).

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace spincorr {

inline constexpr int kMaxSites = 6;

using ConfigIndex = std::uint32_t;
using SiteMask = std::uint32_t;
using MemberMask = std::uint64_t;

/// Validates a site count; throws std::invalid_argument outside [1, kMaxSites].
void require_site_count(int n);

inline ConfigIndex config_count(int n) { return ConfigIndex{1} << n; }
inline SiteMask all_sites(int n) { return config_count(n) - 1; }
inline MemberMask full_member_mask(int n) {
  return n == kMaxSites ? ~MemberMask{0} : (MemberMask{1} << config_count(n)) - 1;
}

class SiteSet {
 public:
  explicit SiteSet(int n);
  int size() const { return n_; }
  ConfigIndex config_count() const { return spincorr::config_count(n_); }

 private:
  int n_;
};

class Config {
 public:
  Config(int n, ConfigIndex bits);

  /// Site-ordered 0/1 string, e.g. "110" -> sites 0 and 1 occupied.
  static Config from_string(std::string_view sites);

  int sites() const { return n_; }
  ConfigIndex bits() const { return bits_; }
  bool operator[](int site) const { return (bits_ >> site) & 1u; }
  bool leq(const Config& other) const;
  std::string to_string() const;

  friend bool operator==(const Config&, const Config&) = default;

 private:
  int n_;
  ConfigIndex bits_;
};

std::string config_string(int n, ConfigIndex bits);

/// (a AND b, a OR b). Throws on mismatched site counts.
std::pair<Config, Config> meet_join(const Config& a, const Config& b);

/// Complements the listed sites. Sites must be distinct and < n.
Config flip(const Config& a, std::span<const int> sites);

bool is_up_closed(int n, MemberMask members);

/// Smallest up-set containing `members`.
MemberMask up_closure(int n, MemberMask members);

class UpSet {
 public:
  /// Throws std::invalid_argument if `members` is not upward closed.
  UpSet(int n, MemberMask members);

  int sites() const { return n_; }
  MemberMask members() const { return members_; }
  bool contains(ConfigIndex c) const { return (members_ >> c) & 1u; }
  int size() const;
  std::vector<ConfigIndex> elements() const;

  friend bool operator==(const UpSet&, const UpSet&) = default;

 private:
  int n_;
  MemberMask members_;
};

/// Every up-set of {0,1}^n as a membership mask, ascending by mask value.
/// Computed once per n and shared; n = 6 yields 7828354 entries.
const std::vector<MemberMask>& up_set_masks(int n);

/// Every up-set of {0,1}^n, including the empty and the full set, in
/// ascending membership-mask order.
std::vector<UpSet> enumerate_up_sets(const SiteSet& s);

template <class T>
struct RealFunction {
  int n = 1;
  std::vector<T> values;

  RealFunction() = default;
  RealFunction(int sites, std::vector<T> v);
  static RealFunction constant(int sites, const T& c);
  static RealFunction coordinate(int sites, int site);
  static RealFunction indicator(int sites, MemberMask members);

  const T& operator()(ConfigIndex c) const { return values[c]; }
};

struct OrderViolation {
  Config lower;
  Config upper;
};

/// First single-bit pair (lower <= upper) with f(lower) > f(upper), scanning
/// lower configurations in ascending index order and, for each, the
/// highest site first. Checking single-bit pairs suffices by transitivity.
template <class T>
std::optional<OrderViolation> find_increase_violation(const RealFunction<T>& f);

template <class T>
bool is_increasing(const RealFunction<T>& f) {
  return !find_increase_violation(f).has_value();
}

template <class T>
struct LayerDecomposition {
  T constant;
  std::vector<std::pair<T, UpSet>> terms;  // coefficient > 0, distinct up-sets

  T evaluate(ConfigIndex c) const;
};

/// Layer-cake form f = c0 + sum_i c_i 1_{U_i} with U_i = {f >= v_i} over the
/// sorted distinct values v_i. Throws std::invalid_argument if f is not
/// increasing.
template <class T>
LayerDecomposition<T> decompose_increasing(const RealFunction<T>& f);

}  // namespace spincorr
