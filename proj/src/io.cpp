#include "spincorr/io.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <sstream>

namespace spincorr {

namespace {

std::string child(const std::string& where, const std::string& key) { return where + "/" + key; }
std::string child(const std::string& where, std::size_t i) { return where + "/" + std::to_string(i); }

const Json& require_key(const Json& j, const std::string& key, const std::string& where) {
  if (!j.is_object()) throw InputError(where.empty() ? "/" : where, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) throw InputError(child(where, key), "missing field");
  return *it;
}

long require_integer(const Json& j, const std::string& where) {
  if (!j.is_number_integer()) throw InputError(where, "expected an integer");
  return j.get<long>();
}

int parse_site_count(const Json& j, const std::string& where) {
  const long n = require_integer(require_key(j, "n", where), child(where, "n"));
  if (n < 1 || n > kMaxSites)
    throw InputError(child(where, "n"), "site count must be between 1 and " + std::to_string(kMaxSites));
  return static_cast<int>(n);
}

double parse_double_json(const Json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    try {
      return parse_rational(j.get<std::string>()).get_d();
    } catch (const std::invalid_argument& e) {
      throw InputError(where, e.what());
    }
  }
  throw InputError(where, "expected a number");
}

Json up_set_json(const UpSet& u) {
  Json members = Json::array();
  for (ConfigIndex c : u.elements()) members.push_back(config_string(u.sites(), c));
  return members;
}

UpSet parse_up_set(const Json& j, int n, const std::string& where) {
  if (!j.is_array()) throw InputError(where, "expected a list of configurations");
  MemberMask m = 0;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_string()) throw InputError(child(where, i), "expected a configuration string");
    try {
      const Config c = Config::from_string(j[i].get<std::string>());
      if (c.sites() != n) throw std::invalid_argument("configuration has the wrong length");
      m |= MemberMask{1} << c.bits();
    } catch (const std::invalid_argument& e) {
      throw InputError(child(where, i), e.what());
    }
  }
  try {
    return UpSet(n, m);
  } catch (const std::invalid_argument& e) {
    throw InputError(where, e.what());
  }
}

Config parse_config(const Json& j, int n, const std::string& where) {
  if (!j.is_string()) throw InputError(where, "expected a configuration string");
  try {
    const Config c = Config::from_string(j.get<std::string>());
    if (c.sites() != n) throw std::invalid_argument("configuration has the wrong length");
    return c;
  } catch (const std::invalid_argument& e) {
    throw InputError(where, e.what());
  }
}

Json site_list(SiteMask m) {
  Json out = Json::array();
  for (int x = 0; m >> x; ++x)
    if ((m >> x) & 1u) out.push_back(x);
  return out;
}

SiteMask parse_site_list(const Json& j, int n, const std::string& where) {
  if (!j.is_array()) throw InputError(where, "expected a list of sites");
  SiteMask m = 0;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const long x = require_integer(j[i], child(where, i));
    if (x < 0 || x >= n) throw InputError(child(where, i), "site out of range");
    m |= SiteMask{1} << x;
  }
  return m;
}

std::vector<Rational> parse_rational_list(const Json& j, std::size_t expected, const std::string& where) {
  if (!j.is_array()) throw InputError(where, "expected a list");
  if (j.size() != expected)
    throw InputError(where, "expected " + std::to_string(expected) + " entries, got " + std::to_string(j.size()));
  std::vector<Rational> out;
  out.reserve(expected);
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(parse_rational_json(j[i], child(where, i)));
  return out;
}

Json rational_list(const std::vector<Rational>& v) {
  Json out = Json::array();
  for (const auto& x : v) out.push_back(to_string(x));
  return out;
}

Json verdict_flags(const ThreeSiteVerdicts& v) {
  return Json{{"lattice", v.lattice}, {"dca", v.dca}, {"downward_fkg", v.downward_fkg}, {"associated", v.associated}};
}

}  // namespace

Json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw InputError(source + " byte " + std::to_string(e.byte), "malformed JSON");
  }
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path, "cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_json_text(buf.str(), path);
}

Json rational_json(const Rational& r) { return to_string(r); }

Rational parse_rational_json(const Json& j, const std::string& where) {
  try {
    if (j.is_string()) return parse_rational(j.get<std::string>());
    if (j.is_number_integer()) return Rational(j.get<long>());
    if (j.is_number_float()) {
      const double v = j.get<double>();
      if (!std::isfinite(v)) throw std::invalid_argument("non-finite number");
      return rational_from_double(v);
    }
  } catch (const std::invalid_argument& e) {
    throw InputError(where, e.what());
  }
  throw InputError(where, "expected a rational string or number");
}

Json to_json(const WeightVector<Rational>& w) {
  return Json{{"n", w.sites()}, {"weights", rational_list(w.weights())}};
}

Json to_json(const ExactMeasure& mu) { return to_json(mu.weights()); }

Json to_json(const FloatMeasure& mu) {
  return Json{{"n", mu.sites()}, {"mode", "float"}, {"weights", mu.probabilities()}};
}

bool is_float_measure(const Json& j) {
  return j.is_object() && j.contains("mode") && j["mode"] == "float";
}

WeightVector<Rational> parse_weights(const Json& j) {
  const int n = parse_site_count(j, "");
  if (j.contains("mode") && j["mode"] != "exact") throw InputError("/mode", "expected \"exact\" weights");
  auto w = parse_rational_list(require_key(j, "weights", ""), config_count(n), "/weights");
  for (std::size_t i = 0; i < w.size(); ++i)
    if (sgn(w[i]) < 0) throw InputError(child("/weights", i), "negative weight");
  try {
    return WeightVector<Rational>(n, std::move(w));
  } catch (const std::invalid_argument& e) {
    throw InputError("/weights", e.what());
  }
}

FloatMeasure parse_float_measure(const Json& j) {
  const int n = parse_site_count(j, "");
  const Json& list = require_key(j, "weights", "");
  if (!list.is_array() || list.size() != config_count(n))
    throw InputError("/weights", "expected " + std::to_string(config_count(n)) + " entries");
  std::vector<double> w;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const double v = parse_double_json(list[i], child("/weights", i));
    if (!(v >= 0) || !std::isfinite(v)) throw InputError(child("/weights", i), "weights must be finite and >= 0");
    w.push_back(v);
  }
  try {
    return normalize(WeightVector<double>(n, std::move(w)));
  } catch (const std::invalid_argument& e) {
    throw InputError("/weights", e.what());
  }
}

Json to_json(const RateTable& r) {
  Json beta = Json::object(), delta = Json::object();
  for (int x = 0; x < r.sites(); ++x) {
    beta[std::to_string(x)] = rational_list(r.births(x));
    delta[std::to_string(x)] = rational_list(r.deaths(x));
  }
  return Json{{"n", r.sites()}, {"beta", beta}, {"delta", delta}};
}

RateTable parse_rate_table(const Json& j) {
  const int n = parse_site_count(j, "");
  if (j.contains("model")) {
    if (j["model"] != "contact") throw InputError("/model", "unknown model");
    const Json& edges = require_key(j, "edges", "");
    if (!edges.is_array()) throw InputError("/edges", "expected a list of site pairs");
    std::vector<std::pair<int, int>> e;
    for (std::size_t i = 0; i < edges.size(); ++i) {
      const std::string where = child("/edges", i);
      if (!edges[i].is_array() || edges[i].size() != 2) throw InputError(where, "expected a pair of sites");
      const long a = require_integer(edges[i][0], child(where, std::size_t{0}));
      const long b = require_integer(edges[i][1], child(where, std::size_t{1}));
      if (a < 0 || b < 0 || a >= n || b >= n || a == b) throw InputError(where, "invalid edge");
      e.emplace_back(static_cast<int>(a), static_cast<int>(b));
    }
    const Rational lambda = parse_rational_json(require_key(j, "lambda", ""), "/lambda");
    const Rational delta = parse_rational_json(require_key(j, "delta", ""), "/delta");
    if (sgn(lambda) < 0) throw InputError("/lambda", "negative rate");
    if (sgn(delta) < 0) throw InputError("/delta", "negative rate");
    return contact_process(n, e, lambda, delta);
  }
  std::vector<std::vector<Rational>> tables[2];
  const char* keys[2] = {"beta", "delta"};
  for (int k = 0; k < 2; ++k) {
    tables[k].assign(static_cast<std::size_t>(n), std::vector<Rational>(config_count(n), Rational(0)));
    if (!j.contains(keys[k])) continue;
    const Json& map = j[keys[k]];
    const std::string where = std::string("/") + keys[k];
    if (!map.is_object()) throw InputError(where, "expected an object keyed by site");
    for (const auto& [site, values] : map.items()) {
      int x = -1;
      try {
        std::size_t used = 0;
        x = std::stoi(site, &used);
        if (used != site.size()) x = -1;
      } catch (const std::exception&) {
        x = -1;
      }
      if (x < 0 || x >= n) throw InputError(child(where, site), "site key out of range");
      auto v = parse_rational_list(values, config_count(n), child(where, site));
      for (std::size_t i = 0; i < v.size(); ++i)
        if (sgn(v[i]) < 0) throw InputError(child(child(where, site), i), "negative rate");
      // The eta(x) = 0 entry is authoritative; report its disagreeing copy.
      for (ConfigIndex c = 0; c < config_count(n); ++c) {
        const ConfigIndex bit = ConfigIndex{1} << x;
        if ((c & bit) && v[c] != v[c ^ bit])
          throw InputError(child(child(where, site), std::size_t{c}),
                           "rate at site " + site + " depends on the site's own value");
      }
      tables[k][static_cast<std::size_t>(x)] = std::move(v);
    }
  }
  return RateTable(n, std::move(tables[0]), std::move(tables[1]));
}

Json to_json(const ThreeSiteCoords& m) {
  return Json{{"a", to_string(m.a)},   {"b1", to_string(m.b1)}, {"b2", to_string(m.b2)}, {"b3", to_string(m.b3)},
              {"c1", to_string(m.c1)}, {"c2", to_string(m.c2)}, {"c3", to_string(m.c3)}, {"d", to_string(m.d)}};
}

ThreeSiteCoords parse_three_site(const Json& j) {
  if (j.is_object() && j.contains("weights")) {
    const auto w = parse_weights(j);
    if (w.sites() != 3) throw InputError("/n", "three-site input needs n = 3");
    return ThreeSiteCoords::from_weights(w);
  }
  ThreeSiteCoords m;
  Rational* fields[8] = {&m.a, &m.b1, &m.b2, &m.b3, &m.c1, &m.c2, &m.c3, &m.d};
  const char* names[8] = {"a", "b1", "b2", "b3", "c1", "c2", "c3", "d"};
  for (int i = 0; i < 8; ++i) {
    *fields[i] = parse_rational_json(require_key(j, names[i], ""), child("", names[i]));
    if (sgn(*fields[i]) < 0) throw InputError(child("", names[i]), "negative weight");
  }
  if (sgn(m.total()) <= 0) throw InputError("/", "total weight must be positive");
  return m;
}

Json to_json(const ThreeSiteVerdicts& v) {
  Json margins = Json::object();
  for (const auto& m : v.margins) {
    Json slacks = Json::array();
    for (const auto& s : m.slacks) slacks.push_back(to_string(s));
    margins[to_string(m.system)] = Json{{"holds", m.holds()}, {"slacks", slacks}};
  }
  Json diagonal = Json::array();
  for (const auto& s : v.diagonal) diagonal.push_back(to_string(s));
  Json out = verdict_flags(v);
  out["margins"] = margins;
  out["diagonal_slacks"] = diagonal;
  return out;
}

Json to_json(const Witness& w) {
  struct Visitor {
    Json operator()(const std::monostate&) const { return nullptr; }
    Json operator()(const UpSetPairWitness& p) const {
      return Json{{"kind", "up_set_pair"}, {"first", up_set_json(p.first)}, {"second", up_set_json(p.second)}};
    }
    Json operator()(const ConditionedWitness& p) const {
      return Json{{"kind", "conditioned"},
                  {"zero_sites", site_list(p.zero_sites)},
                  {"first", up_set_json(p.first)},
                  {"second", up_set_json(p.second)}};
    }
    Json operator()(const ConfigPairWitness& p) const {
      return Json{{"kind", "config_pair"}, {"first", p.first.to_string()}, {"second", p.second.to_string()}};
    }
    Json operator()(const TiltWitness& p) const {
      return Json{{"kind", "tilt"},
                  {"tilt", rational_list(p.tilt)},
                  {"first", up_set_json(p.first)},
                  {"second", up_set_json(p.second)}};
    }
    Json operator()(const SiteWitness& p) const {
      return Json{{"kind", "site"}, {"site", p.site}, {"first", p.first.to_string()}, {"second", p.second.to_string()}};
    }
    Json operator()(const UpSetWitness& p) const { return Json{{"kind", "up_set"}, {"set", up_set_json(p.set)}}; }
    Json operator()(const InequalityWitness& p) const {
      return Json{{"kind", "inequality"}, {"system", p.system}, {"index", p.index}};
    }
  };
  return std::visit(Visitor{}, w);
}

Witness parse_witness(const Json& j, int n) {
  if (j.is_null()) return std::monostate{};
  const std::string where = "/witness";
  const Json& kind_json = require_key(j, "kind", where);
  if (!kind_json.is_string()) throw InputError(child(where, "kind"), "expected a string");
  const std::string kind = kind_json.get<std::string>();
  auto up = [&](const char* key) { return parse_up_set(require_key(j, key, where), n, child(where, key)); };
  auto config = [&](const char* key) { return parse_config(require_key(j, key, where), n, child(where, key)); };
  if (kind == "up_set_pair") return UpSetPairWitness{up("first"), up("second")};
  if (kind == "conditioned")
    return ConditionedWitness{parse_site_list(require_key(j, "zero_sites", where), n, child(where, "zero_sites")),
                              up("first"), up("second")};
  if (kind == "config_pair") return ConfigPairWitness{config("first"), config("second")};
  if (kind == "tilt")
    return TiltWitness{parse_rational_list(require_key(j, "tilt", where), config_count(n), child(where, "tilt")),
                       up("first"), up("second")};
  if (kind == "site") {
    const long site = require_integer(require_key(j, "site", where), child(where, "site"));
    if (site < 0 || site >= n) throw InputError(child(where, "site"), "site out of range");
    return SiteWitness{static_cast<int>(site), config("first"), config("second")};
  }
  if (kind == "up_set") return UpSetWitness{up("set")};
  if (kind == "inequality") {
    const Json& system = require_key(j, "system", where);
    if (!system.is_string()) throw InputError(child(where, "system"), "expected a string");
    return InequalityWitness{system.get<std::string>(),
                             static_cast<int>(require_integer(require_key(j, "index", where), child(where, "index")))};
  }
  throw InputError(child(where, "kind"), "unknown witness kind '" + kind + "'");
}

Json to_json(const Margin& m) {
  if (m.exact()) return to_string(std::get<Rational>(m.value));
  return std::get<double>(m.value);
}

Margin parse_margin(const Json& j) {
  if (j.is_string()) return Margin{parse_rational_json(j, "/margin")};
  if (j.is_number()) return Margin{j.get<double>()};
  throw InputError("/margin", "expected a rational string or number");
}

Json to_json(const PropertyReport& r) {
  Json details = Json::object();
  for (const auto& [k, v] : r.details) details[k] = v;
  return Json{{"property", r.property},
              {"verdict", to_string(r.verdict)},
              {"witness", to_json(r.witness)},
              {"margin", to_json(r.margin)},
              {"details", details}};
}

PropertyReport parse_report(const Json& j, int n) {
  PropertyReport r;
  const Json& property = require_key(j, "property", "");
  if (!property.is_string()) throw InputError("/property", "expected a string");
  r.property = property.get<std::string>();
  const Json& verdict = require_key(j, "verdict", "");
  if (verdict == "holds") r.verdict = Verdict::holds;
  else if (verdict == "fails") r.verdict = Verdict::fails;
  else if (verdict == to_string(Verdict::search_exhausted)) r.verdict = Verdict::search_exhausted;
  else throw InputError("/verdict", "unknown verdict");
  r.witness = parse_witness(require_key(j, "witness", ""), n);
  r.margin = parse_margin(require_key(j, "margin", ""));
  if (j.contains("details")) {
    if (!j["details"].is_object()) throw InputError("/details", "expected an object");
    for (const auto& [k, v] : j["details"].items()) {
      if (!v.is_string()) throw InputError(child("/details", k), "expected a string");
      r.details.emplace_back(k, v.get<std::string>());
    }
  }
  return r;
}

Json to_json(const AdditiveDecomposition& d, int n) {
  Json coefficients = Json::object();
  for (SiteMask a = 1; a < d.coefficients.size(); ++a) {
    if (sgn(d.coefficients[a]) == 0) continue;
    std::string key;
    for (int x = 0; x < n; ++x)
      if ((a >> x) & 1u) key += (key.empty() ? "" : ",") + std::to_string(x);
    coefficients["{" + key + "}"] = to_string(d.coefficients[a]);
  }
  return Json{{"site", d.site}, {"reconstructs", d.reconstructs}, {"additive", d.additive},
              {"coefficients", coefficients}};
}

Json to_json(const ExperimentSpec& s) {
  Json initial = Json::array();
  for (const auto& mu : s.initial) initial.push_back(to_json(mu));
  return Json{{"claim", to_string(s.claim)},
              {"system", to_json(s.system)},
              {"family", to_string(s.family)},
              {"initial", initial},
              {"measure_count", s.measure_count},
              {"times", s.times},
              {"seed", s.seed},
              {"tilt_budget", s.tilt_budget},
              {"tolerance", s.check.tolerance}};
}

ExperimentSpec parse_experiment_spec(const Json& j) {
  ExperimentSpec s;
  auto name = [&](const char* key) {
    const Json& v = require_key(j, key, "");
    if (!v.is_string()) throw InputError(child("", key), "expected a string");
    return v.get<std::string>();
  };
  try {
    s.claim = preservation_claim_from_string(name("claim"));
  } catch (const std::invalid_argument& e) {
    throw InputError("/claim", e.what());
  }
  try {
    s.system = parse_rate_table(require_key(j, "system", ""));
  } catch (const InputError& e) {
    throw e.nested_in("/system");
  }
  if (j.contains("family")) {
    try {
      s.family = initial_family_from_string(name("family"));
    } catch (const std::invalid_argument& e) {
      throw InputError("/family", e.what());
    }
  }
  if (j.contains("initial")) {
    const Json& list = j["initial"];
    if (!list.is_array()) throw InputError("/initial", "expected a list of measures");
    for (std::size_t i = 0; i < list.size(); ++i) {
      try {
        s.initial.push_back(normalize(parse_weights(list[i])));
      } catch (const InputError& e) {
        throw e.nested_in(child("/initial", i));
      }
    }
  }
  auto count = [&](const char* key) {
    const long v = require_integer(j[key], child("", key));
    if (v < 0) throw InputError(child("", key), "expected a nonnegative integer");
    return static_cast<std::size_t>(v);
  };
  if (j.contains("measure_count")) s.measure_count = count("measure_count");
  if (j.contains("times")) {
    const Json& t = j["times"];
    if (!t.is_array()) throw InputError("/times", "expected a list of times");
    s.times.clear();
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double v = parse_double_json(t[i], child("/times", i));
      if (!(v >= 0) || !std::isfinite(v)) throw InputError(child("/times", i), "times must be finite and >= 0");
      s.times.push_back(v);
    }
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw InputError("/seed", "expected a nonnegative integer");
    s.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("tilt_budget")) s.tilt_budget = count("tilt_budget");
  if (j.contains("tolerance")) {
    s.check.tolerance = parse_double_json(j["tolerance"], "/tolerance");
    if (!(s.check.tolerance >= 0) || !std::isfinite(s.check.tolerance))
      throw InputError("/tolerance", "tolerance must be finite and >= 0");
  }
  if (s.family == InitialFamily::explicit_measures && s.initial.empty())
    throw InputError("/initial", "explicit family needs at least one initial measure");
  return s;
}

Json to_json(const ExperimentOutcome& o) {
  Json measures = Json::array();
  for (const auto& mu : o.measures) measures.push_back(to_json(mu));
  Json cells = Json::array();
  for (const auto& c : o.cells) cells.push_back(Json{{"measure", c.measure}, {"t", c.t}, {"report", to_json(c.report)}});
  Json out{{"claim", to_string(o.claim)},
           {"property", o.property},
           {"hypotheses_hold", o.hypotheses_hold},
           {"hypothesis_failures", o.hypothesis_failures},
           {"summary", o.all_hold() ? "all-hold" : "violation"},
           {"inconsistent", o.inconsistent()},
           {"min_margin", o.cells.empty() ? Json(nullptr) : Json(o.min_margin())},
           {"measures", measures},
           {"skipped", o.skipped},
           {"cells", cells}};
  if (o.violation) {
    const auto& c = o.cells[*o.violation];
    out["violation"] = Json{{"measure", to_json(o.measures[c.measure])}, {"t", c.t}, {"report", to_json(c.report)}};
  }
  return out;
}

Json to_json(const SearchOutcome& o) {
  Json out{{"target", to_string(o.target)},
           {"property", o.property},
           {"verdict", to_string(o.verdict)},
           {"functionals_checked", o.functionals_checked},
           {"evolutions_checked", o.evolutions_checked}};
  if (o.certificate) {
    const auto& c = *o.certificate;
    out["certificate"] = Json{{"rho", to_string(c.rho)},
                              {"lambda", to_string(c.lambda)},
                              {"pair", {c.x, c.y}},
                              {"background", config_string(o.initial ? o.initial->sites() : std::bit_width(c.background), c.background)},
                              {"zero_sites", site_list(c.zero_sites)},
                              {"value", to_string(c.value)},
                              {"derivative", to_string(c.derivative)}};
  }
  if (o.initial) out["initial"] = to_json(*o.initial);
  if (o.report) {
    out["t"] = o.t;
    out["report"] = to_json(*o.report);
  }
  return out;
}

std::vector<std::pair<std::string, Json>> builtin_fixtures() {
  std::vector<std::pair<std::string, Json>> out;
  out.emplace_back("derangement3.json", to_json(derangement_measure(3)));
  out.emplace_back("derangement4.json", to_json(derangement_measure(4)));
  const auto [dca_not_lattice, associated_not_downward] = separating_measures(Rational(1, 100));
  out.emplace_back("dca_not_lattice.json", to_json(dca_not_lattice));
  out.emplace_back("associated_not_downward_fkg.json", to_json(associated_not_downward));
  out.emplace_back("uniform3.json", to_json(WeightVector<Rational>(3, std::vector<Rational>(8, Rational(1)))));
  out.emplace_back("contact_path4.json", Json{{"model", "contact"},
                                              {"n", 4},
                                              {"edges", Json::array({{0, 1}, {1, 2}, {2, 3}})},
                                              {"lambda", "1"},
                                              {"delta", "1"}});
  out.emplace_back("all_ones4.json", to_json(point_mass(4, all_sites(4))));
  out.emplace_back("consensus3.json", to_json(consensus_flip_system()));
  {
    // beta(x, eta) = 1 - eta(y) for the other site y; deaths at rate 1.
    const RateTable r = RateTable::from_functions(
        2, [](int x, ConfigIndex c) { return Rational(((c >> (1 - x)) & 1u) ? 0 : 1); },
        [](int, ConfigIndex) { return Rational(1); });
    out.emplace_back("non_attractive2.json", to_json(r));
  }
  {
    // Site 2 is born at rate eta(0) eta(1); every other rate vanishes.
    std::vector<Rational> birth(8);
    for (ConfigIndex c = 0; c < 8; ++c) birth[c] = Rational((c & 3u) == 3u ? 1 : 0);
    out.emplace_back("pair_birth3.json", to_json(single_site_birth_system(3, 2, std::move(birth))));
  }
  out.emplace_back("independent_flips3.json",
                   to_json(independent_flips({Rational(1), Rational(1, 2), Rational(2)},
                                             {Rational(1), Rational(3, 2), Rational(1, 4)})));
  {
    ExperimentSpec s;
    s.claim = PreservationClaim::additive_downward_fkg;
    s.system = contact_process(4, path_edges(4), Rational(1), Rational(1));
    s.family = InitialFamily::explicit_measures;
    s.initial = {point_mass(4, all_sites(4))};
    out.emplace_back("experiment_contact_downward_fkg.json", to_json(s));
  }
  {
    ExperimentSpec s;
    s.claim = PreservationClaim::independent_flips_lattice;
    s.system = independent_flips({Rational(1), Rational(1, 2), Rational(2)}, {Rational(1), Rational(3, 2), Rational(1, 4)});
    s.family = InitialFamily::random_lattice;
    s.measure_count = 5;
    out.emplace_back("experiment_independent_lattice.json", to_json(s));
  }
  return out;
}

namespace {

void markdown_checks(std::ostringstream& md, const Json& j) {
  if (!j.is_object()) return;
  for (const auto& [key, value] : j.items()) {
    if (value.is_object() && value.contains("verdict") && value.contains("property")) {
      const Json& m = value["margin"];
      md << "| " << key << " | " << value["verdict"].get<std::string>() << " | "
         << (m.is_string() ? m.get<std::string>() : m.dump()) << " |\n";
    }
  }
}

}  // namespace

std::string to_markdown(const Json& report) {
  std::ostringstream md;
  md << "# spincorr " << report.value("command", std::string("report")) << "\n\n";
  if (report.contains("error")) {
    md << "**Error** at `" << report["error"].value("location", std::string("?")) << "`: "
       << report["error"].value("message", std::string()) << "\n\n";
  }
  if (report.contains("checks")) {
    md << "| check | verdict | margin |\n|---|---|---|\n";
    markdown_checks(md, report["checks"]);
    md << "\n";
  }
  if (report.contains("status")) md << "Status: **" << report["status"].get<std::string>() << "**\n\n";
  md << "```json\n" << report.dump(2) << "\n```\n";
  return md.str();
}

}  // namespace spincorr
