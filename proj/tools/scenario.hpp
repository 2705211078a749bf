#pragma once

// Scenario files: JSON descriptions of an algebra, a seminorm, a dual IFS,
// weights, named states, an optional trace and named bumps.
//
// Matrices are lists of rows; entries are numbers or [re, im] pairs. An
// element is {"blocks": [matrix, ...]}. Distances may use the string "inf".

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "ncfractal/algebra.hpp"
#include "ncfractal/classical.hpp"
#include "ncfractal/morphism.hpp"
#include "ncfractal/seminorm.hpp"

namespace ncfractal::cli {

/// Malformed JSON; the message names the byte offset.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t byte) : std::runtime_error(what), byte_(byte) {}
  std::size_t byte() const { return byte_; }

 private:
  std::size_t byte_;
};

/// Well-formed JSON that does not follow the schema; the message names the key path.
class SchemaError : public std::runtime_error {
 public:
  SchemaError(const std::string& path, const std::string& what)
      : std::runtime_error("schema violation at \"" + path + "\": " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

/// Schema-valid input rejected by a mathematical validator (morphism,
/// seminorm or state invariants).
class ValidationError : public std::runtime_error {
 public:
  ValidationError(const std::string& path, const std::string& what)
      : std::runtime_error("validation failed at \"" + path + "\": " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct Scenario {
  std::string name;
  std::filesystem::path path;
  Algebra algebra;
  std::optional<Seminorm> seminorm;
  /// Commutative scenarios: the metric space and its point maps.
  std::optional<FiniteMetricSpace> space;
  std::vector<PointMap> point_maps;
  DualIFS ifs;
  std::vector<Weights> weights;
  std::vector<std::pair<std::string, State>> states;
  std::optional<Trace> trace;
  std::vector<std::pair<std::string, Element>> bumps;
  double tol = 1e-8;
  std::uint64_t budget = 4096;
  int codespace_depth = 6;

  bool commutative() const { return space.has_value(); }
  const State* find_state(const std::string& name) const;
  const Element* find_bump(const std::string& name) const;
};

Scenario load_scenario(const std::filesystem::path& path);
Scenario parse_scenario(const std::string& text, const std::string& name_hint);

}  // namespace ncfractal::cli
