#pragma once
#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace cdyb {

using json = nlohmann::json;

struct SampleRecord {
  json params = json::object();
  double residual = 0;
  std::vector<std::pair<std::string, double>> components;
  bool passed = false;
};

struct ResidualReport {
  std::string identity;
  std::string algebra;
  std::uint64_t seed = 0;
  std::vector<SampleRecord> samples;
  double tolerance = 1e-9;
  std::string norm = "orthonormal-frame-l2";
  double runtime_ms = 0;
  std::vector<std::string> notes;
  bool guard_exhausted = false;

  double max_residual() const {
    double m = 0;
    for (auto &s : samples)
      m = std::max(m, s.residual);
    return m;
  }
  bool passed() const {
    if (samples.empty())
      return false;
    for (auto &s : samples)
      if (!s.passed)
        return false;
    return max_residual() <= tolerance;
  }
  std::string verdict() const { return passed() ? "pass" : "fail"; }

  void add(SampleRecord s) {
    s.passed = s.residual <= tolerance && std::isfinite(s.residual);
    samples.push_back(std::move(s));
  }
};

inline json to_json(const Eigen::VectorXd &v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i)
    a.push_back(v[i]);
  return a;
}

inline json to_json(const Eigen::MatrixXd &m) {
  json a = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      row.push_back(m(i, j));
    a.push_back(row);
  }
  return a;
}

inline json to_json(const ResidualReport &r, bool with_runtime = true) {
  json j;
  j["schema"] = 1;
  j["identity"] = r.identity;
  j["algebra"] = r.algebra;
  j["seed"] = r.seed;
  json samples = json::array();
  for (auto &s : r.samples) {
    json c = json::object();
    for (auto &[k, v] : s.components)
      c[k] = v;
    samples.push_back({{"params", s.params},
                       {"residual", s.residual},
                       {"components", c},
                       {"passed", s.passed}});
  }
  j["samples"] = samples;
  j["max_residual"] = r.max_residual();
  j["tolerance"] = r.tolerance;
  j["verdict"] = r.verdict();
  j["norm"] = r.norm;
  if (!r.notes.empty())
    j["notes"] = r.notes;
  if (r.guard_exhausted)
    j["guard_exhausted"] = true;
  if (with_runtime)
    j["runtime_ms"] = r.runtime_ms;
  return j;
}

inline json to_json(const std::vector<ResidualReport> &reports, bool with_runtime = true) {
  if (reports.size() == 1)
    return to_json(reports.front(), with_runtime);
  json a = json::array();
  for (auto &r : reports)
    a.push_back(to_json(r, with_runtime));
  return json{{"schema", 1}, {"reports", a}};
}

inline void write_json(const json &j, const std::string &path) {
  std::ofstream f(path);
  if (!f)
    throw std::runtime_error("cannot write " + path);
  f << j.dump(2) << "\n";
}

class Stopwatch {
public:
  Stopwatch() : t0_(std::chrono::steady_clock::now()) {}
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0_)
        .count();
  }

private:
  std::chrono::steady_clock::time_point t0_;
};

} // namespace cdyb
