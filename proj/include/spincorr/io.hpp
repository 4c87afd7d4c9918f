#pragma once

// JSON schemas for measures, spin systems, three-site coordinates, reports
// and experiments. Rationals travel as "p/q" strings; evolved measures are
// floats and carry "mode": "float".

#include "spincorr/dynamics.hpp"
#include "spincorr/harness.hpp"
#include "spincorr/measures.hpp"
#include "spincorr/three_site.hpp"

#include <json.hpp>

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace spincorr {

using Json = nlohmann::ordered_json;

inline constexpr int kFormatVersion = 1;

/// Malformed input. `location` is a JSON pointer ("/weights/3") or a byte
/// offset for syntax errors.
class InputError : public std::runtime_error {
 public:
  InputError(std::string location, const std::string& message)
      : std::runtime_error(location + ": " + message), location_(std::move(location)), message_(message) {}
  const std::string& location() const { return location_; }
  const std::string& message() const { return message_; }

  /// The same error reported from inside a document nested at `prefix`.
  InputError nested_in(const std::string& prefix) const { return InputError(prefix + location_, message_); }

 private:
  std::string location_;
  std::string message_;
};

/// Parses text, reporting syntax errors with their byte offset.
Json parse_json_text(const std::string& text, const std::string& source);
Json read_json_file(const std::string& path);

Json rational_json(const Rational& r);
/// A JSON string ("3/8", "0.25") or number; numbers go through their
/// shortest decimal form.
Rational parse_rational_json(const Json& j, const std::string& where);

// {"n": int, "weights": [...]}; float measures add "mode": "float" and use numbers.
Json to_json(const WeightVector<Rational>& w);
Json to_json(const ExactMeasure& mu);
Json to_json(const FloatMeasure& mu);
WeightVector<Rational> parse_weights(const Json& j);
FloatMeasure parse_float_measure(const Json& j);
bool is_float_measure(const Json& j);

// {"n", "beta": {"site": [2^n]}, "delta": {...}}, or
// {"model": "contact", "n", "edges": [[i, j], ...], "lambda", "delta"}.
Json to_json(const RateTable& r);
RateTable parse_rate_table(const Json& j);

// {"a", "b1", "b2", "b3", "c1", "c2", "c3", "d"} or a three-site measure.
Json to_json(const ThreeSiteCoords& m);
ThreeSiteCoords parse_three_site(const Json& j);
Json to_json(const ThreeSiteVerdicts& v);

Json to_json(const Witness& w);
Witness parse_witness(const Json& j, int n);
Json to_json(const Margin& m);
Margin parse_margin(const Json& j);
Json to_json(const PropertyReport& r);
/// `n` is the site count the witness refers to.
PropertyReport parse_report(const Json& j, int n);

Json to_json(const AdditiveDecomposition& d, int n);

Json to_json(const ExperimentSpec& s);
ExperimentSpec parse_experiment_spec(const Json& j);
Json to_json(const ExperimentOutcome& o);
Json to_json(const SearchOutcome& o);

/// The shipped fixture corpus as (file name, document) pairs.
std::vector<std::pair<std::string, Json>> builtin_fixtures();

/// Human-readable rendering of a command report with the JSON embedded.
std::string to_markdown(const Json& report);

}  // namespace spincorr
