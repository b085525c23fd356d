#pragma once
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include "../errors.hpp"
#include "../quadratic_lie.hpp"
#include "report.hpp"

namespace cdyb {

struct ParsedAlgebra {
  CatalogEntry entry;
  std::string source; // catalog name or file path
};

namespace config_detail {

inline const json &need(const json &j, const char *key) {
  if (!j.contains(key))
    throw ConfigParseError(std::string("missing field '") + key + "'");
  return j.at(key);
}

inline Eigen::MatrixXd matrix(const json &j, int n, const char *what) {
  if (!j.is_array() || int(j.size()) != n)
    throw ConfigParseError(std::string(what) + " must be a " + std::to_string(n) +
                           "x" + std::to_string(n) + " array");
  Eigen::MatrixXd M(n, n);
  for (int i = 0; i < n; ++i) {
    if (!j[i].is_array() || int(j[i].size()) != n)
      throw ConfigParseError(std::string(what) + " row " + std::to_string(i) +
                             " has the wrong length");
    for (int k = 0; k < n; ++k) {
      if (!j[i][k].is_number())
        throw ConfigParseError(std::string(what) + " entry is not a number");
      M(i, k) = j[i][k].get<double>();
    }
  }
  return M;
}

inline std::vector<int> indices(const json &j, int n, const char *what) {
  if (!j.is_array())
    throw ConfigParseError(std::string(what) + " must be an array of indices");
  std::vector<int> out;
  for (auto &v : j) {
    if (!v.is_number_integer())
      throw ConfigParseError(std::string(what) + " holds a non-integer");
    int i = v.get<int>();
    if (i < 0 || i >= n)
      throw ConfigParseError(std::string(what) + " index " + std::to_string(i) +
                             " out of range");
    out.push_back(i);
  }
  return out;
}

} // namespace config_detail

// {name, dim, bilinear, brackets: [{a,b,c,value}], split?: {k, p}, automorphism?}
// Brackets set [e_a, e_b] = value e_c (plus the antisymmetric partner).
// ConfigParseError for malformed documents, ValidationError when the
// algebra, split or automorphism fails its invariants.
inline ParsedAlgebra parse_algebra_config(const json &doc, const std::string &source = "") {
  using namespace config_detail;
  if (!doc.is_object())
    throw ConfigParseError("config must be a JSON object");
  std::string name = need(doc, "name").is_string() ? doc["name"].get<std::string>() : "";
  if (name.empty())
    throw ConfigParseError("'name' must be a nonempty string");
  const json &dj = need(doc, "dim");
  if (!dj.is_number_integer() || dj.get<int>() < 1 ||
      dj.get<int>() > GeneratorSystem::kMaxGenerators)
    throw ConfigParseError("'dim' must be an integer in 1.." +
                           std::to_string(GeneratorSystem::kMaxGenerators));
  const int n = dj.get<int>();
  Eigen::MatrixXd B = matrix(need(doc, "bilinear"), n, "bilinear");
  std::optional<QuadraticLieAlgebra> g;
  try {
    g.emplace(QuadraticLieAlgebra::from_brackets(name, B));
  } catch (const StructuralError &e) {
    throw ValidationError(std::string("bilinear form: ") + e.what());
  }
  const json &br = need(doc, "brackets");
  if (!br.is_array())
    throw ConfigParseError("'brackets' must be an array");
  for (auto &t : br) {
    if (!t.is_object())
      throw ConfigParseError("bracket entries must be objects {a,b,c,value}");
    int a = 0, b = 0, c = 0;
    for (auto [key, ref] : {std::pair<const char *, int *>{"a", &a}, {"b", &b}, {"c", &c}}) {
      const json &v = need(t, key);
      if (!v.is_number_integer() || v.get<int>() < 0 || v.get<int>() >= n)
        throw ConfigParseError(std::string("bracket index '") + key + "' out of range");
      *ref = v.get<int>();
    }
    const json &v = need(t, "value");
    if (!v.is_number())
      throw ConfigParseError("bracket value must be a number");
    if (a == b)
      throw ConfigParseError("bracket [e_a, e_a] must vanish (a = b = " +
                             std::to_string(a) + ")");
    g->set_bracket(a, b, c, v.get<double>());
  }
  auto rep = validate_algebra(*g);
  if (!rep.passed())
    throw ValidationError("algebra '" + name + "' fails validation:\n" + rep.summary());
  CatalogEntry e{*g, std::nullopt, std::nullopt};
  if (doc.contains("split")) {
    const json &s = doc["split"];
    if (!s.is_object())
      throw ConfigParseError("'split' must be an object {k, p}");
    SubalgebraSplit sp{indices(need(s, "k"), n, "split.k"), indices(need(s, "p"), n, "split.p")};
    auto sr = validate_split(*g, sp);
    if (!sr.passed())
      throw ValidationError("split fails validation:\n" + sr.summary());
    e.split = sp;
  }
  if (doc.contains("automorphism")) {
    if (!e.split)
      throw ConfigParseError("'automorphism' needs a 'split'");
    Eigen::MatrixXd c = matrix(doc["automorphism"], n, "automorphism");
    auto ar = validate_automorphism(*g, c, &*e.split);
    if (!ar.passed())
      throw ValidationError("automorphism fails validation:\n" + ar.summary());
    e.twist = Twist{*e.split, c};
  }
  return {e, source.empty() ? name : source};
}

inline ParsedAlgebra load_algebra_config(const std::string &path) {
  std::ifstream f(path);
  if (!f)
    throw ConfigParseError("cannot open config file " + path);
  json doc;
  try {
    doc = json::parse(f);
  } catch (const json::parse_error &e) {
    throw ConfigParseError(path + ": " + e.what());
  }
  return parse_algebra_config(doc, path);
}

// a catalog name or a path to a JSON config
inline ParsedAlgebra resolve_algebra(const std::string &ref) {
  bool looks_like_file = ref.find(".json") != std::string::npos ||
                         ref.find('/') != std::string::npos;
  if (looks_like_file)
    return load_algebra_config(ref);
  try {
    return {catalog(ref), ref};
  } catch (const StructuralError &e) {
    throw ConfigParseError(e.what());
  }
}

} // namespace cdyb
