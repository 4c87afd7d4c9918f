#include "spincorr/io.hpp"
#include "spincorr/tilt_sampler.hpp"

#include <doctest.h>

#include <string>

using namespace spincorr;

namespace {

std::string location_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const InputError& e) {
    return e.location();
  }
  return "no error";
}

bool same_report(const PropertyReport& a, const PropertyReport& b) {
  return to_json(a) == to_json(b);
}

}  // namespace

TEST_SUITE("io") {
  TEST_CASE("rationals") {
    CHECK(rational_json(Rational(3, 8)) == "3/8");
    CHECK(rational_json(Rational(5)) == "5");
    CHECK(parse_rational_json(Json("0.25"), "/x") == Rational(1, 4));
    CHECK(parse_rational_json(Json(0.1), "/x") == Rational(1, 10));
    CHECK(parse_rational_json(Json(7), "/x") == 7);
    CHECK(location_of([] { parse_rational_json(Json("1/0"), "/w/2"); }) == "/w/2");
    CHECK(location_of([] { parse_rational_json(Json(true), "/w/0"); }) == "/w/0");
  }

  TEST_CASE("syntax errors carry a byte offset") {
    const auto where = location_of([] { parse_json_text("{\"n\": 2,, }", "input.json"); });
    CHECK(where.rfind("input.json byte ", 0) == 0);
    CHECK(location_of([] { read_json_file("/nonexistent/measure.json"); }) == "/nonexistent/measure.json");
  }

  TEST_CASE("weights round-trip and report bad entries") {
    const WeightVector<Rational> w(2, {Rational(1, 3), Rational(0), Rational(5, 2), Rational(1)});
    CHECK(parse_weights(to_json(w)).weights() == w.weights());
    const auto mu = normalize(w);
    CHECK(parse_weights(to_json(mu)).weights() == mu.weights().weights());

    const Json negative = {{"n", 2}, {"weights", {"1", "-1/2", "1", "1"}}};
    CHECK(location_of([&] { parse_weights(negative); }) == "/weights/1");
    const Json short_list = {{"n", 2}, {"weights", {"1", "1"}}};
    CHECK(location_of([&] { parse_weights(short_list); }) == "/weights");
    const Json no_n = {{"weights", {"1", "1"}}};
    CHECK(location_of([&] { parse_weights(no_n); }) == "/n");
    const Json big = {{"n", 7}, {"weights", Json::array()}};
    CHECK(location_of([&] { parse_weights(big); }) == "/n");
    const Json zeros = {{"n", 1}, {"weights", {"0", "0"}}};
    CHECK(location_of([&] { parse_weights(zeros); }) == "/weights");
    const Json garbage = {{"n", 1}, {"weights", {"1", "x"}}};
    CHECK(location_of([&] { parse_weights(garbage); }) == "/weights/1");
  }

  TEST_CASE("float measures are tagged") {
    const FloatMeasure mu(1, {0.25, 0.75});
    const Json j = to_json(mu);
    CHECK(j["mode"] == "float");
    CHECK(is_float_measure(j));
    CHECK_FALSE(is_float_measure(to_json(normalize(WeightVector<Rational>(1, {1, 3})))));
    CHECK(parse_float_measure(j) == mu);
    CHECK(location_of([&] { parse_weights(j); }) == "/mode");
  }

  TEST_CASE("rate tables") {
    const auto contact = contact_process(3, path_edges(3), Rational(3, 2), Rational(1));
    CHECK(parse_rate_table(to_json(contact)) == contact);
    const Json shorthand = {{"model", "contact"}, {"n", 3}, {"edges", {{0, 1}, {1, 2}}}, {"lambda", "3/2"}, {"delta", 1}};
    CHECK(parse_rate_table(shorthand) == contact);
    const auto random = random_rate_table(4, 3);
    CHECK(parse_rate_table(to_json(random)) == random);

    Json own = to_json(RateTable::zero(2));
    own["beta"]["0"] = {"0", "1", "0", "0"};  // differs across eta(0)
    CHECK(location_of([&] { parse_rate_table(own); }) == "/beta/0/1");
    Json negative = to_json(RateTable::zero(2));
    negative["delta"]["1"] = {"0", "0", "-1", "-1"};
    CHECK(location_of([&] { parse_rate_table(negative); }) == "/delta/1/2");
    Json bad_site = to_json(RateTable::zero(2));
    bad_site["beta"]["5"] = {"0", "0", "0", "0"};
    CHECK(location_of([&] { parse_rate_table(bad_site); }) == "/beta/5");
    Json bad_edge = shorthand;
    bad_edge["edges"] = {{0, 3}};
    CHECK(location_of([&] { parse_rate_table(bad_edge); }) == "/edges/0");
  }

  TEST_CASE("three-site input") {
    const Json named = {{"a", "1/3"}, {"b1", "1/6"}, {"b2", "1/6"}, {"b3", "1/6"}, {"c1", 0}, {"c2", 0},
                        {"c3", 0},    {"d", "1/6"}};
    const auto m = parse_three_site(named);
    CHECK(m.to_weights().weights() == derangement_measure(3).weights().weights());
    CHECK(parse_three_site(to_json(derangement_measure(3))).a == Rational(1, 3));
    const auto back = parse_three_site(to_json(m));
    CHECK(back.to_weights().weights() == m.to_weights().weights());
    Json missing = named;
    missing.erase("c2");
    CHECK(location_of([&] { parse_three_site(missing); }) == "/c2");
    CHECK(location_of([&] { parse_three_site(to_json(product_measure({Rational(1, 2)}))); }) == "/n");
    const Json verdicts = to_json(classify(m));
    CHECK(verdicts["lattice"] == false);
    CHECK(verdicts["associated"] == true);
  }

  TEST_CASE("reports round-trip with every witness kind") {
    const auto [first, second] = separating_measures(Rational(1, 100));
    const auto mu2 = normalize(second);
    TiltSampler sampler(3, 1);
    std::vector<std::pair<PropertyReport, int>> reports{
        {is_associated(normalize(WeightVector<Rational>(2, {1, 3, 3, 1}))), 2},
        {satisfies_lattice(first), 3},
        {is_downward_fkg(mu2), 3},
        {dca_falsify(mu2, sampler, 50), 3},
        {stochastically_dominated(product_measure({Rational(1, 2)}), product_measure({Rational(1, 4)})), 1},
        {is_attractive(RateTable::from_functions(
             2, [](int x, ConfigIndex c) { return Rational(1 - ((c >> (1 - x)) & 1u)); },
             [](int, ConfigIndex) { return Rational(1); })),
         2},
        {is_associated(to_float(derangement_measure(3))), 3},
        {dca_falsify(derangement_measure(4), *std::make_unique<TiltSampler>(4, 2), 3), 4},
    };
    PropertyReport inequality{"lattice", Verdict::fails, InequalityWitness{"upper_lattice", 0}, Margin{Rational(-1, 36)}, {}};
    reports.emplace_back(inequality, 3);
    for (const auto& [r, n] : reports) {
      const Json j = to_json(r);
      const auto back = parse_report(parse_json_text(j.dump(2), "report"), n);
      CHECK(same_report(back, r));
      CHECK(back.margin.exact() == r.margin.exact());
    }
    CHECK(to_json(reports[1].first)["witness"]["kind"] == "config_pair");
    CHECK(to_json(reports[4].first)["witness"]["set"] == Json::array({"1"}));
  }

  TEST_CASE("report parsing errors") {
    Json j = to_json(satisfies_lattice(separating_measures(Rational(1, 100)).first));
    Json bad_kind = j;
    bad_kind["witness"]["kind"] = "mystery";
    CHECK(location_of([&] { parse_report(bad_kind, 3); }) == "/witness/kind");
    Json bad_config = j;
    bad_config["witness"]["first"] = "10";
    CHECK(location_of([&] { parse_report(bad_config, 3); }) == "/witness/first");
    Json bad_verdict = j;
    bad_verdict["verdict"] = "maybe";
    CHECK(location_of([&] { parse_report(bad_verdict, 3); }) == "/verdict");
    Json bad_up = to_json(is_associated(normalize(WeightVector<Rational>(2, {1, 3, 3, 1}))));
    bad_up["witness"]["first"] = {"00"};  // not upward closed
    CHECK(location_of([&] { parse_report(bad_up, 2); }) == "/witness/first");
  }

  TEST_CASE("experiment specs") {
    ExperimentSpec spec;
    spec.claim = PreservationClaim::additive_downward_fkg;
    spec.system = contact_process(4, path_edges(4), Rational(1), Rational(1));
    spec.initial = {point_mass(4, 15)};
    spec.times = {0.1, 0.5};
    spec.seed = 9;
    const auto back = parse_experiment_spec(to_json(spec));
    CHECK(back.claim == spec.claim);
    CHECK(back.system == spec.system);
    CHECK(back.initial == spec.initial);
    CHECK(back.times == spec.times);
    CHECK(back.seed == 9);

    Json j = to_json(spec);
    j["times"] = {0.1, -2};
    CHECK(location_of([&] { parse_experiment_spec(j); }) == "/times/1");
    j = to_json(spec);
    j["system"]["beta"]["2"][0] = "-1";
    CHECK(location_of([&] { parse_experiment_spec(j); }) == "/system/beta/2/0");
    j = to_json(spec);
    j["initial"][0]["weights"][3] = "oops";
    CHECK(location_of([&] { parse_experiment_spec(j); }) == "/initial/0/weights/3");
    j = to_json(spec);
    j["claim"] = "everything";
    CHECK(location_of([&] { parse_experiment_spec(j); }) == "/claim");
    j = to_json(spec);
    j["measure_count"] = -1;
    CHECK(location_of([&] { parse_experiment_spec(j); }) == "/measure_count");
  }

  TEST_CASE("a serialized violation re-verifies on its own") {
    ExperimentSpec spec;
    spec.claim = PreservationClaim::attractive_association;
    spec.system = RateTable::from_functions(
        2, [](int x, ConfigIndex c) { return Rational(1 - ((c >> (1 - x)) & 1u)); },
        [](int, ConfigIndex) { return Rational(1); });
    spec.initial = {product_measure({Rational(1, 8), Rational(1, 8)})};
    spec.times = {0.25};
    const Json out = to_json(verify_preservation(spec));
    REQUIRE(out.contains("violation"));
    const Json& v = out["violation"];
    const auto system = parse_experiment_spec(to_json(spec)).system;
    const auto mu = normalize(parse_weights(v["measure"]));
    const auto evolved = semigroup_apply(build_generator(system), mu, v["t"].get<double>());
    const auto report = parse_report(v["report"], 2);
    const auto& pair = std::get<UpSetPairWitness>(report.witness);
    double p1 = 0, p2 = 0, both = 0;
    for (ConfigIndex c = 0; c < 4; ++c) {
      if (pair.first.contains(c)) p1 += evolved[c];
      if (pair.second.contains(c)) p2 += evolved[c];
      if (pair.first.contains(c) && pair.second.contains(c)) both += evolved[c];
    }
    CHECK(both - p1 * p2 < -1e-9);
    CHECK(both - p1 * p2 == doctest::Approx(report.margin.approx()).epsilon(1e-6));
  }

  TEST_CASE("search outcomes and decompositions serialize") {
    const auto s = search_counterexample(single_site_birth_system(3, 2, {0, 0, 0, 1, 0, 0, 0, 1}),
                                         ConverseTarget::birth_submodularity);
    const Json j = to_json(s);
    CHECK(j["verdict"] == "fails");
    CHECK(j.contains("certificate"));
    const auto d = additive_decomposition(contact_process(3, path_edges(3), Rational(2), Rational(1)), 1);
    const Json dj = to_json(d, 3);
    CHECK(dj["additive"] == true);
    CHECK(dj["coefficients"] == Json{{"{0}", "2"}, {"{2}", "2"}});
  }

  TEST_CASE("fixtures and markdown") {
    const auto fixtures = builtin_fixtures();
    CHECK(fixtures.size() >= 10);
    for (const auto& [name, doc] : fixtures) {
      CHECK(name.size() > 5);
      CHECK(name.substr(name.size() - 5) == ".json");
      CHECK(parse_json_text(doc.dump(), name) == doc);
    }
    const Json report = {{"command", "check-measure"}, {"status", "ok"}};
    const auto md = to_markdown(report);
    CHECK(md.find("```json") != std::string::npos);
    CHECK(md.find("check-measure") != std::string::npos);
  }
}
