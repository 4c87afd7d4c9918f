#include "oracles.hpp"
#include "spincorr/harness.hpp"
#include "spincorr/three_site.hpp"

#include <doctest.h>

#include <stdexcept>

using namespace spincorr;

namespace {

ExactMeasure reverified_initial(const SearchOutcome& s) {
  REQUIRE(s.initial.has_value());
  return *s.initial;
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("random measures are reproducible and honour their mode") {
    for (auto mode : {MeasureMode::generic, MeasureMode::strictly_positive, MeasureMode::lattice, MeasureMode::product}) {
      CHECK(random_measure(17, 4, mode).weights() == random_measure(17, 4, mode).weights());
      CHECK(measure_mode_from_string(to_string(mode)) == mode);
    }
    CHECK(random_measure(1, 3, MeasureMode::generic).weights() != random_measure(2, 3, MeasureMode::generic).weights());
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
      const int n = 1 + static_cast<int>(seed % 5);
      CHECK(random_measure(seed, n, MeasureMode::strictly_positive).strictly_positive());
      const auto lat = random_measure(seed, n, MeasureMode::lattice);
      CHECK(oracle::lattice(lat.weights()));
      const auto prod = normalize(random_measure(seed, n, MeasureMode::product));
      std::vector<Rational> marginals;
      for (int x = 0; x < n; ++x) marginals.push_back(expectation(prod, RealFunction<Rational>::coordinate(n, x)));
      CHECK(product_measure(marginals) == prod);
    }
    CHECK_THROWS_AS(measure_mode_from_string("uniform"), std::invalid_argument);
  }

  TEST_CASE("derangement measures") {
    const auto d3 = derangement_measure(3);
    CHECK(d3[Config::from_string("111").bits()] == Rational(1, 3));
    CHECK(d3[Config::from_string("011").bits()] == Rational(1, 6));
    CHECK(d3[Config::from_string("100").bits()] == 0);
    CHECK(d3[0] == Rational(1, 6));
    const auto d4 = derangement_measure(4);
    CHECK(is_associated(d4).holds());
    CHECK(is_downward_fkg(d4).holds());
    CHECK(satisfies_lattice(d4).fails());
    // A fixed point leaves a uniform permutation of the other three points.
    for (int fixed = 0; fixed < 4; ++fixed) {
      const auto cond = condition_zeros(d4, SiteMask{1} << fixed);
      for (ConfigIndex c = 0; c < 8; ++c) {
        const ConfigIndex low = c & ((ConfigIndex{1} << fixed) - 1);
        const ConfigIndex high = (c >> fixed) << (fixed + 1);
        CHECK(cond[low | high] == d3[c]);
      }
    }
    CHECK_THROWS_AS(derangement_measure(1), std::invalid_argument);
    CHECK_THROWS_AS(derangement_measure(6), std::invalid_argument);
  }

  TEST_CASE("separating measures") {
    const Rational eps(1, 100);
    const auto [first, second] = separating_measures(eps);
    CHECK(first.total() == 1 + 3 * eps);
    CHECK(second.total() == 1 + 3 * eps);
    CHECK(first[Config::from_string("100").bits()] == eps);
    CHECK(second[Config::from_string("011").bits()] == eps);
    CHECK_THROWS_AS(separating_measures(Rational(1, 2)), std::domain_error);
  }

  TEST_CASE("named systems") {
    const auto contact = contact_process(3, path_edges(3), Rational(2), Rational(1));
    CHECK(contact.birth(0, Config::from_string("011").bits()) == 2);
    CHECK(contact.birth(1, Config::from_string("101").bits()) == 4);
    CHECK(contact.death(2, 0) == 1);
    CHECK_THROWS_AS(contact_process(3, {{0, 3}}, Rational(1), Rational(1)), std::invalid_argument);
    const auto consensus = consensus_flip_system();
    CHECK(consensus.birth(0, Config::from_string("011").bits()) == 1);
    CHECK(consensus.birth(0, Config::from_string("001").bits()) == 0);
    CHECK(consensus.death(2, Config::from_string("001").bits()) == 1);
    CHECK(consensus.death(2, Config::from_string("101").bits()) == 0);
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      const auto r = random_submodular_birth_system(seed, 4, static_cast<int>(seed % 4));
      CHECK(oracle::birth_submodular(r, static_cast<int>(seed % 4)));
      CHECK(is_attractive(r).holds());
      CHECK(has_constant_deaths(r));
    }
  }

  TEST_CASE("preservation: contact process keeps downward FKG") {
    ExperimentSpec spec;
    spec.claim = PreservationClaim::additive_downward_fkg;
    spec.system = contact_process(4, path_edges(4), Rational(1), Rational(1));
    spec.initial = {point_mass(4, 0b1111), normalize(random_measure(3, 4, MeasureMode::lattice))};
    spec.times = {0.1, 0.5, 1.0};
    const auto out = verify_preservation(spec);
    CHECK(out.hypotheses_hold);
    CHECK(out.property == "downward_fkg");
    CHECK(out.measures.size() == 2);
    CHECK(out.cells.size() == 6);
    CHECK(out.all_hold());
    CHECK(out.min_margin() >= -1e-9);
  }

  TEST_CASE("preservation: independent flips keep the lattice condition") {
    ExperimentSpec spec;
    spec.claim = PreservationClaim::independent_flips_lattice;
    spec.system = independent_flips({Rational(1), Rational(2), Rational(1, 2)}, {Rational(3), Rational(1), 1});
    spec.family = InitialFamily::random_lattice;
    spec.measure_count = 6;
    const auto out = verify_preservation(spec);
    CHECK(out.hypotheses_hold);
    CHECK(out.skipped.empty());
    CHECK(out.all_hold());
  }

  TEST_CASE("preservation: consensus flips keep the lattice condition without independent flips") {
    ExperimentSpec spec;
    spec.claim = PreservationClaim::independent_flips_lattice;
    spec.system = consensus_flip_system();
    spec.family = InitialFamily::random_lattice;
    spec.measure_count = 8;
    const auto out = verify_preservation(spec);
    CHECK_FALSE(out.hypotheses_hold);
    CHECK(out.all_hold());
    CHECK_FALSE(out.inconsistent());
  }

  TEST_CASE("preservation: attractive systems keep association, submodular births keep DCA") {
    ExperimentSpec assoc;
    assoc.claim = PreservationClaim::attractive_association;
    assoc.system = contact_process(3, path_edges(3), Rational(3, 2), Rational(1));
    assoc.family = InitialFamily::random_generic;
    assoc.measure_count = 12;
    const auto a = verify_preservation(assoc);
    CHECK(a.hypotheses_hold);
    CHECK(a.all_hold());
    CHECK(a.measures.size() + a.skipped.size() == 12);

    ExperimentSpec dca;
    dca.claim = PreservationClaim::submodular_dca;
    dca.system = random_submodular_birth_system(5, 3, 1);
    dca.family = InitialFamily::random_lattice;
    dca.measure_count = 4;
    const auto d = verify_preservation(dca);
    CHECK(d.hypotheses_hold);
    CHECK(d.all_hold());
  }

  TEST_CASE("preservation reports a violation when hypotheses fail") {
    // Repelling births destroy association of a product start.
    ExperimentSpec spec;
    spec.claim = PreservationClaim::attractive_association;
    spec.system = RateTable::from_functions(
        2, [](int x, ConfigIndex c) { return Rational(1 - ((c >> (1 - x)) & 1u)); },
        [](int, ConfigIndex) { return Rational(1); });
    spec.initial = {product_measure({Rational(1, 8), Rational(1, 8)})};
    spec.times = {1.0 / 64, 1.0};
    const auto out = verify_preservation(spec);
    CHECK_FALSE(out.hypotheses_hold);
    REQUIRE(out.violation.has_value());
    CHECK_FALSE(out.inconsistent());
    CHECK(*out.cells[*out.violation].report.detail("reverified") == "tail 1e-16");
    spec.times = {-1.0};
    CHECK_THROWS_AS(verify_preservation(spec), std::invalid_argument);
  }

  TEST_CASE("search finds a counterexample for repelling births") {
    const auto r = RateTable::from_functions(
        2, [](int x, ConfigIndex c) { return Rational(1 - ((c >> (1 - x)) & 1u)); },
        [](int, ConfigIndex) { return Rational(1); });
    const auto s = search_counterexample(r, ConverseTarget::attractiveness);
    REQUIRE(s.found());
    REQUIRE(s.certificate.has_value());
    CHECK(s.certificate->value == 0);
    CHECK(s.certificate->derivative < 0);
    // The witness re-verifies from the initial measure and time alone.
    const auto evolved = semigroup_apply(build_generator(r), reverified_initial(s), s.t, UniformizationOptions{1e-16});
    CHECK(is_associated(evolved).fails());
    CHECK(s.report->fails());
  }

  TEST_CASE("search finds a downward FKG violation for a supermodular birth") {
    const auto r = single_site_birth_system(3, 2, {0, 0, 0, 1, 0, 0, 0, 1});
    const auto s = search_counterexample(r, ConverseTarget::birth_submodularity);
    REQUIRE(s.found());
    CHECK(s.certificate->derivative < 0);
    const auto evolved = semigroup_apply(build_generator(r), reverified_initial(s), s.t, UniformizationOptions{1e-16});
    CHECK(is_downward_fkg(evolved).fails());
    // The start is a product measure.
    const auto& mu = *s.initial;
    std::vector<Rational> marginals;
    for (int x = 0; x < 3; ++x) marginals.push_back(expectation(mu, RealFunction<Rational>::coordinate(3, x)));
    CHECK(product_measure(marginals) == mu);
  }

  TEST_CASE("search is exhausted when the rate condition holds") {
    SearchOptions opts;
    opts.budget = 10;
    const auto attractive = search_counterexample(contact_process(3, path_edges(3), Rational(1), Rational(1)),
                                                  ConverseTarget::attractiveness, opts);
    CHECK(attractive.verdict == Verdict::search_exhausted);
    CHECK_FALSE(attractive.certificate.has_value());
    CHECK(attractive.evolutions_checked == 10 * opts.times.size());
    const auto flips = search_counterexample(independent_flips({1, 2}, {2, 1}), ConverseTarget::independent_flips, opts);
    CHECK(flips.verdict == Verdict::search_exhausted);
  }

  TEST_CASE("single-site facts") {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
      const auto r = random_submodular_birth_system(seed, 3, static_cast<int>(seed % 3));
      const auto audit = audit_single_site_facts(r, seed, 6, {0.25, 1.0, 4.0});
      CHECK(audit.evaluations > 0);
      CHECK(audit.holds(1e-9));
    }
  }

  TEST_CASE("random increasing functions") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      const auto f = random_increasing_function(seed, 3);
      CHECK(is_increasing(f));
      for (const auto& v : f.values) {
        CHECK(sgn(v) >= 0);
        CHECK(v <= 1);
      }
    }
  }

  TEST_CASE("enum names round-trip") {
    for (auto c : {PreservationClaim::attractive_association, PreservationClaim::independent_flips_lattice,
                   PreservationClaim::additive_downward_fkg, PreservationClaim::submodular_dca})
      CHECK(preservation_claim_from_string(to_string(c)) == c);
    for (auto f : {InitialFamily::explicit_measures, InitialFamily::product, InitialFamily::random_lattice,
                   InitialFamily::random_generic})
      CHECK(initial_family_from_string(to_string(f)) == f);
    for (auto t : {ConverseTarget::attractiveness, ConverseTarget::birth_submodularity,
                   ConverseTarget::independent_flips})
      CHECK(converse_target_from_string(to_string(t)) == t);
  }
}
