#include "oracles.hpp"
#include "spincorr/harness.hpp"
#include "spincorr/measures.hpp"
#include "spincorr/three_site.hpp"
#include "spincorr/tilt_sampler.hpp"

#include <doctest.h>

#include <bit>
#include <stdexcept>

using namespace spincorr;

namespace {

ExactMeasure measure(int n, std::vector<Rational> w) { return normalize(WeightVector<Rational>(n, std::move(w))); }

Rational up_set_covariance(const ExactMeasure& mu, const UpSet& u, const UpSet& v) {
  return covariance(mu, RealFunction<Rational>::indicator(mu.sites(), u.members()),
                    RealFunction<Rational>::indicator(mu.sites(), v.members()));
}

ExactMeasure zero_restricted(const ExactMeasure& mu, SiteMask zeros) {
  std::vector<Rational> w(mu.probabilities());
  for (ConfigIndex c = 0; c < w.size(); ++c)
    if (c & zeros) w[c] = 0;
  return measure(mu.sites(), std::move(w));
}

// A fails report must carry a witness that is a strict violation in exact
// arithmetic.
bool witness_is_strict_violation(const PropertyReport& r, const ExactMeasure& mu) {
  if (const auto* p = std::get_if<UpSetPairWitness>(&r.witness)) return up_set_covariance(mu, p->first, p->second) < 0;
  if (const auto* p = std::get_if<ConditionedWitness>(&r.witness))
    return up_set_covariance(zero_restricted(mu, p->zero_sites), p->first, p->second) < 0;
  if (const auto* p = std::get_if<ConfigPairWitness>(&r.witness)) {
    const ConfigIndex a = p->first.bits(), b = p->second.bits();
    return mu[a & b] * mu[a | b] < mu[a] * mu[b];
  }
  if (const auto* p = std::get_if<TiltWitness>(&r.witness))
    return up_set_covariance(tilt(mu, RealFunction<Rational>(mu.sites(), p->tilt)), p->first, p->second) < 0;
  return false;
}

ExactMeasure random_exact(std::uint64_t seed, int n) {
  const MeasureMode modes[] = {MeasureMode::generic, MeasureMode::strictly_positive, MeasureMode::lattice,
                               MeasureMode::product};
  return normalize(random_measure(seed, n, modes[seed % 4]));
}

}  // namespace

TEST_SUITE("measures") {
  TEST_CASE("weight vectors reject bad input") {
    CHECK_THROWS_AS(WeightVector<Rational>(2, {1, 1, 1}), std::invalid_argument);
    CHECK_THROWS_AS(WeightVector<Rational>(1, {Rational(-1), Rational(2)}), std::invalid_argument);
    CHECK_THROWS_AS(WeightVector<Rational>(1, {0, 0}), std::invalid_argument);
    CHECK_THROWS_AS(ExactMeasure(1, {Rational(1, 2), Rational(1, 3)}), std::invalid_argument);
    CHECK_THROWS_AS(FloatMeasure(1, {0.5, 0.5 + 1e-9}), std::invalid_argument);
  }

  TEST_CASE("normalize") {
    const auto u = measure(2, {1, 1, 1, 1});
    for (ConfigIndex c = 0; c < 4; ++c) CHECK(u[c] == Rational(1, 4));
    const auto point = measure(2, {2, 0, 0, 0});
    CHECK(point[0] == 1);
    const std::vector<Rational> w{3, 1, 4, 1, 5, 9, 2, 6};
    std::vector<Rational> scaled(w);
    for (auto& v : scaled) v *= 7;
    CHECK(measure(3, w) == measure(3, scaled));
  }

  TEST_CASE("expectation and covariance") {
    const auto u1 = measure(1, {1, 1});
    const auto eta0 = RealFunction<Rational>::coordinate(1, 0);
    CHECK(covariance(u1, eta0, eta0) == Rational(1, 4));
    const auto prod = product_measure({Rational(1, 3), Rational(3, 4), Rational(1, 5)});
    CHECK(covariance(prod, RealFunction<Rational>::coordinate(3, 0), RealFunction<Rational>::coordinate(3, 2)) == 0);
    CHECK(expectation(prod, RealFunction<Rational>::coordinate(3, 1)) == Rational(3, 4));
  }

  TEST_CASE("three-site covariance identity") {
    // cov(eta(0), eta(1) eta(2)) = a(c2 + c3 + d) - b1(b2 + b3 + c1) on normalized weights.
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const auto mu = random_exact(seed, 3);
      const auto m = ThreeSiteCoords::from_weights(mu.weights());
      std::vector<Rational> both(8, Rational(0));
      both[6] = both[7] = 1;
      const Rational cov =
          covariance(mu, RealFunction<Rational>::coordinate(3, 0), RealFunction<Rational>(3, both));
      CHECK(cov == m.a * (m.c2 + m.c3 + m.d) - m.b1 * (m.b2 + m.b3 + m.c1));
    }
  }

  TEST_CASE("association: products hold, two sites reduce to one determinant") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto mu = normalize(random_measure(seed, 3, MeasureMode::product));
      CHECK(is_associated(mu).holds());
    }
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      const auto mu = normalize(random_measure(seed, 2, MeasureMode::generic));
      CHECK(is_associated(mu).holds() == (mu[3] * mu[0] >= mu[1] * mu[2]));
    }
  }

  TEST_CASE("association agrees with the brute-force oracle") {
    for (std::uint64_t seed = 0; seed < 150; ++seed) {
      const int n = seed < 120 ? 3 : 4;
      const auto mu = random_exact(seed, n);
      CheckOptions full;
      full.full_margin = true;
      const auto r = is_associated(mu, full);
      CHECK(r.holds() == oracle::associated(mu));
      CHECK(std::get<Rational>(r.margin.value) == oracle::min_up_set_covariance(mu));
      if (r.fails()) CHECK(witness_is_strict_violation(r, mu));
    }
  }

  TEST_CASE("association witness does not depend on the worker count") {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
      const auto mu = random_exact(seed * 4, 4);
      CheckOptions one, many;
      many.workers = 4;
      const auto a = is_associated(mu, one), b = is_associated(mu, many);
      CHECK(a.verdict == b.verdict);
      if (a.fails()) {
        const auto& wa = std::get<UpSetPairWitness>(a.witness);
        const auto& wb = std::get<UpSetPairWitness>(b.witness);
        CHECK(wa.first == wb.first);
        CHECK(wa.second == wb.second);
      }
    }
  }

  TEST_CASE("association on five sites and the six-site opt-in") {
    CHECK(is_associated(derangement_measure(5)).holds());
    const auto uniform6 = measure(6, std::vector<Rational>(64, Rational(1)));
    CHECK_THROWS_AS(is_associated(uniform6), BudgetExceeded);
  }

  TEST_CASE("lattice condition") {
    const auto prod = product_measure({Rational(1, 3), Rational(3, 4), Rational(1, 5)});
    const auto r = satisfies_lattice(prod);
    CHECK(r.holds());
    CHECK(std::get<Rational>(r.margin.value) == 0);
    CHECK(*r.detail("strictly_positive") == "true");

    const auto [first, second] = separating_measures(Rational(1, 100));
    const auto f = satisfies_lattice(first);
    REQUIRE(f.fails());
    const auto& pair = std::get<ConfigPairWitness>(f.witness);
    const auto [meet, join] = meet_join(pair.first, pair.second);
    CHECK(join.bits() == 7u);               // pairs meeting above a one
    CHECK(std::popcount(meet.bits()) == 1);
    CHECK(witness_is_strict_violation(f, normalize(first)));

    const auto d3 = satisfies_lattice(derangement_measure(3));
    CHECK(d3.fails());
    CHECK(*d3.detail("strictly_positive") == "false");
  }

  TEST_CASE("lattice condition agrees with the all-pairs oracle") {
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
      const int n = 2 + static_cast<int>(seed % 3);
      const auto w = random_measure(seed, n, seed % 2 ? MeasureMode::lattice : MeasureMode::generic);
      const auto r = satisfies_lattice(w);
      CHECK(r.holds() == oracle::lattice(w.weights()));
      if (r.fails()) CHECK(witness_is_strict_violation(r, normalize(w)));
    }
  }

  TEST_CASE("conditioning on zeros") {
    const auto mu = random_exact(5, 3);
    CHECK(condition_zeros(mu, 0) == mu);
    const auto prod = product_measure({Rational(1, 3), Rational(3, 4), Rational(1, 5)});
    CHECK(condition_zeros(prod, 0b010) == product_measure({Rational(1, 3), Rational(0), Rational(1, 5)}));
    // Derangements of three points with point 1 fixed are derangements of two.
    const auto d = condition_zeros(derangement_measure(3), 0b010);
    CHECK(d[0] == Rational(1, 2));
    CHECK(d[0b101] == Rational(1, 2));
    CHECK_THROWS_AS(condition_zeros(measure(2, {0, 1, 1, 1}), 0b11), std::domain_error);
  }

  TEST_CASE("downward FKG") {
    CHECK(is_downward_fkg(derangement_measure(3)).holds());
    const auto [first, second] = separating_measures(Rational(1, 100));
    const auto r = is_downward_fkg(normalize(second));
    REQUIRE(r.fails());
    CHECK(witness_is_strict_violation(r, normalize(second)));
    // (D) fails: conditioning on a single zero exposes it.
    CHECK(std::popcount(std::get<ConditionedWitness>(r.witness).zero_sites) == 1);
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
      const auto mu = normalize(random_measure(seed, 3, MeasureMode::strictly_positive));
      if (satisfies_lattice(mu).holds()) CHECK(is_downward_fkg(mu).holds());
    }
  }

  TEST_CASE("downward FKG agrees with the oracle and skips null events") {
    for (std::uint64_t seed = 0; seed < 150; ++seed) {
      const int n = seed < 120 ? 3 : 4;
      const auto mu = random_exact(seed + 1000, n);
      const auto r = is_downward_fkg(mu);
      CHECK(r.holds() == oracle::downward_fkg(mu));
      if (r.fails()) CHECK(witness_is_strict_violation(r, mu));
    }
    // Every conditioning on a nonempty set is null for the point mass at 11.
    const auto r = is_downward_fkg(point_mass(2, 0b11));
    CHECK(r.holds());
    CHECK(*r.detail("skipped_zero_probability_events") == "3");
  }

  TEST_CASE("tilts") {
    const auto mu = random_exact(9, 3);
    CHECK(tilt(mu, RealFunction<Rational>::constant(3, Rational(1))) == mu);
    std::vector<Rational> h1(8), h2(8), both(8);
    for (ConfigIndex c = 0; c < 8; ++c) {
      h1[c] = ratio(c + 1, 3);
      h2[c] = ratio(9 - static_cast<long>(c), 2);
      both[c] = h1[c] * h2[c];
    }
    CHECK(tilt(tilt(mu, RealFunction<Rational>(3, h1)), RealFunction<Rational>(3, h2)) ==
          tilt(mu, RealFunction<Rational>(3, both)));
    h1[4] = 0;
    CHECK_THROWS_AS(tilt(mu, RealFunction<Rational>(3, h1)), std::invalid_argument);
  }

  TEST_CASE("zero-conditioning tilts approach the conditioned measure") {
    const auto mu = random_exact(13, 3);
    const auto target = condition_zeros(mu, 0b011);
    Rational previous = -1;
    for (Rational eps : {Rational(1, 10), Rational(1, 100), Rational(1, 1000), Rational(1, 10000)}) {
      const auto t = tilt(mu, zero_conditioning_tilt(3, 0b011, eps));
      Rational dist = 0;
      for (ConfigIndex c = 0; c < 8; ++c) dist += abs(t[c] - target[c]);
      if (previous >= 0) CHECK(dist < previous);
      previous = dist;
    }
    CHECK(previous < Rational(1, 1000));
  }

  TEST_CASE("DCA: exact verdicts for two and three sites") {
    const auto [first, second] = separating_measures(Rational(1, 100));
    TiltSampler s1(3, 1), s2(3, 2);
    CHECK(dca_falsify(normalize(first), s1, 100).holds());
    const auto r = dca_falsify(normalize(second), s2, 100);
    REQUIRE(r.fails());
    CHECK(witness_is_strict_violation(r, normalize(second)));
    CHECK(is_valid_tilt(RealFunction<Rational>(3, std::get<TiltWitness>(r.witness).tilt)));
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
      const auto mu = normalize(random_measure(seed, 2, MeasureMode::generic));
      TiltSampler s(2, seed);
      CHECK(dca_falsify(mu, s, 20).holds() == (mu[3] * mu[0] >= mu[1] * mu[2]));
    }
  }

  TEST_CASE("DCA on four sites is only ever refuted") {
    TiltSampler s(4, 3);
    const auto r = dca_falsify(derangement_measure(4), s, 50);
    CHECK(r.verdict == Verdict::search_exhausted);
    CHECK(to_string(r.verdict) == "falsified-only-search-exhausted");
    // Not associated, so the constant tilt already refutes DCA.
    TiltSampler s4(4, 4);
    const auto bad = normalize(random_measure(2, 4, MeasureMode::generic));
    if (!is_associated(bad).holds()) CHECK(dca_falsify(bad, s4, 5).fails());
  }

  TEST_CASE("DCA falsifier soundness on random measures") {
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
      const auto mu = random_exact(seed + 77, 3 + static_cast<int>(seed % 2));
      TiltSampler s(mu.sites(), seed);
      const auto r = dca_falsify(mu, s, 30);
      if (r.fails()) {
        const auto& w = std::get<TiltWitness>(r.witness);
        const auto tilted = tilt(mu, RealFunction<Rational>(mu.sites(), w.tilt));
        CHECK_FALSE(is_associated(tilted).holds());
        CHECK(witness_is_strict_violation(r, mu));
      }
    }
  }

  TEST_CASE("stochastic domination") {
    const auto mu = random_exact(21, 3);
    CHECK(stochastically_dominated(mu, mu).holds());
    for (int p = 1; p < 4; ++p)
      for (int q = 1; q < 4; ++q)
        for (int r = 1; r < 4; ++r)
          for (int s = 1; s < 4; ++s) {
            const auto lo = product_measure({ratio(p, 4), ratio(q, 4)});
            const auto hi = product_measure({ratio(r, 4), ratio(s, 4)});
            CHECK(stochastically_dominated(lo, hi).holds() == (p <= r && q <= s));
          }
    const auto d = derangement_measure(4);
    CHECK(stochastically_dominated(condition_zeros(d, 0b0110), condition_zeros(d, 0b0010)).holds());
    const auto fails = stochastically_dominated(product_measure({Rational(1, 2)}), product_measure({Rational(1, 4)}));
    REQUIRE(fails.fails());
    CHECK(std::get<UpSetWitness>(fails.witness).set.members() == 0b10);
  }

  TEST_CASE("conditioning more zeros lowers a downward FKG measure") {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
      const auto mu = random_exact(seed + 300, 3);
      if (!is_downward_fkg(mu).holds()) continue;
      for (SiteMask a = 0; a < 8; ++a)
        for (SiteMask b = a; b < 8; b = (b + 1) | a) {
          const auto pa = mu.probability([&] {
            MemberMask m = 0;
            for (ConfigIndex c = 0; c < 8; ++c)
              if ((c & b) == 0) m |= MemberMask{1} << c;
            return m;
          }());
          if (sgn(pa) == 0) continue;
          CHECK(stochastically_dominated(condition_zeros(mu, b), condition_zeros(mu, a)).holds());
        }
    }
  }

  TEST_CASE("convex combinations of nested zero-conditionings stay associated") {
    std::size_t checked = 0;
    for (std::uint64_t seed = 0; seed < 60 && checked < 25; ++seed) {
      const int n = 3 + static_cast<int>(seed % 2);
      const auto mu = random_exact(seed + 500, n);
      if (!is_downward_fkg(mu).holds()) continue;
      ++checked;
      const SiteMask all = all_sites(n);
      for (SiteMask a = 0; a <= all; ++a)
        for (SiteMask b = a; b <= all; b = (b + 1) | a) {
          ExactMeasure mb = mu, ma = mu;
          try {
            mb = condition_zeros(mu, b);
            ma = condition_zeros(mu, a);
          } catch (const std::domain_error&) {
            continue;
          }
          for (int k = 0; k <= 4; ++k) {
            const Rational lambda = ratio(k, 4);
            std::vector<Rational> w(config_count(n));
            for (ConfigIndex c = 0; c < w.size(); ++c) w[c] = lambda * mb[c] + (1 - lambda) * ma[c];
            CHECK(is_associated(ExactMeasure(n, std::move(w))).holds());
          }
          if (b == all) break;
        }
    }
    CHECK(checked >= 10);
  }

  TEST_CASE("verdicts are invariant under scaling") {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
      const auto w = random_measure(seed, 3, MeasureMode::generic);
      std::vector<Rational> scaled(w.weights());
      for (auto& v : scaled) v *= Rational(7, 3);
      const WeightVector<Rational> w2(3, scaled);
      CHECK(satisfies_lattice(w).verdict == satisfies_lattice(w2).verdict);
      CHECK(is_associated(normalize(w)).verdict == is_associated(normalize(w2)).verdict);
      CHECK(is_downward_fkg(normalize(w)).verdict == is_downward_fkg(normalize(w2)).verdict);
    }
  }

  TEST_CASE("random three-site measures respect the implication chain") {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      const auto mu = random_exact(seed + 9000, 3);
      TiltSampler s(3, seed);
      const bool lat = satisfies_lattice(mu).holds();
      const bool dca = dca_falsify(mu, s, 20).holds();
      const bool down = is_downward_fkg(mu).holds();
      const bool assoc = is_associated(mu).holds();
      CHECK((!lat || dca));
      CHECK((!dca || down));
      CHECK((!down || assoc));
    }
  }

  TEST_CASE("float measures use the tolerance") {
    const FloatMeasure product = to_float(product_measure({Rational(1, 3), Rational(2, 3)}));
    CHECK(is_associated(product).holds());
    CHECK(satisfies_lattice(product).holds());
    std::vector<double> p(product.probabilities());
    p[1] += 1e-11;  // slightly negative covariance, inside the tolerance
    const auto nudged = normalize(WeightVector<double>(2, p));
    CHECK(is_associated(nudged).holds());
    CHECK(std::get<double>(is_associated(nudged).margin.value) < 0);
    p[1] += 1e-3;
    CHECK(is_associated(normalize(WeightVector<double>(2, p))).fails());
  }
}
