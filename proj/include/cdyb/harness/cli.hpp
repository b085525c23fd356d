#pragma once
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "config.hpp"
#include "identities.hpp"
#include "report.hpp"

namespace cdyb {

// exit codes
inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitGuard = 3;

namespace cli_detail {

inline void print_line(std::ostream &out, const ResidualReport &r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-15s %-18s %-4s max %.3e tol %.1e samples %zu",
                r.identity.c_str(), r.algebra.c_str(), r.verdict().c_str(),
                r.max_residual(), r.tolerance, r.samples.size());
  out << buf;
  for (auto &n : r.notes)
    out << " [" << n << "]";
  out << "\n";
}

inline int finish(const std::vector<ResidualReport> &reports, const std::string &json_path,
                  std::ostream &out) {
  for (auto &r : reports)
    print_line(out, r);
  if (!json_path.empty()) {
    json j = to_json(reports);
    if (json_path == "-")
      out << j.dump(2) << "\n";
    else
      write_json(j, json_path);
  }
  for (auto &r : reports)
    if (r.guard_exhausted)
      return kExitGuard;
  for (auto &r : reports)
    if (!r.passed())
      return kExitFail;
  return kExitPass;
}

inline DerivativeMode parse_mode(const std::string &m) {
  if (m == "analytic")
    return DerivativeMode::AnalyticFrechet;
  if (m == "fd")
    return DerivativeMode::CentralDifference;
  throw UsageError("--mode must be fd or analytic");
}

} // namespace cli_detail

inline int cli_main(int argc, const char *const *argv, std::ostream &out = std::cout,
                    std::ostream &err = std::cerr) {
  CLI::App app{"cdybe: verification harness for Clifford exponentials and dynamical r-matrices"};
  app.require_subcommand(1);

  std::string config_path;
  auto *validate = app.add_subcommand("validate", "validate an algebra config file");
  validate->add_option("config", config_path, "JSON config")->required();

  std::string id_name, algebra = "so3", json_path, mode = "analytic";
  std::vector<double> mu;
  double theta = 0, tol = 0, t = 2.0;
  std::uint64_t seed = 0;
  int samples = 20, e_dim = -1;
  auto *identity = app.add_subcommand("identity", "verify one named identity");
  identity->add_option("id", id_name, "identity id (KEY, ALTER, C1, ...)")->required();
  identity->add_option("--algebra", algebra, "catalog name or config file");
  auto *mu_opt = identity->add_option("--mu", mu, "fix A = ad_mu (comma separated)")
                     ->delimiter(',');
  auto *theta_opt =
      identity->add_option("--theta", theta, "fix A = theta B^-1 (e1 e0^T - e0 e1^T)");
  mu_opt->excludes(theta_opt);
  auto *tol_opt = identity->add_option("--tol", tol, "tolerance override");
  auto *seed_opt = identity->add_option("--seed", seed, "random seed");
  identity->add_option("--samples", samples, "sample count")->check(CLI::Range(1, 100000));
  identity->add_option("--json", json_path, "write the JSON report here ('-' for stdout)");
  identity->add_option("--mode", mode, "fd or analytic")->check(CLI::IsMember({"fd", "analytic"}));
  identity->add_option("--t", t, "scale for CDYBE_SCALED");
  identity->add_option("--e-dim", e_dim, "parameter space dimension for KEY / ALTER");

  std::vector<std::string> families;
  std::string c_algebra = "so3", c_json, c_mode = "analytic";
  int c_samples = 20;
  std::uint64_t c_seed = 0;
  double c_t = 2.0;
  auto *cdybe = app.add_subcommand("cdybe", "CDYBE residuals for r-matrix families");
  cdybe->add_option("--algebra", c_algebra, "catalog name or config file");
  cdybe->add_option("--family", families,
                    "full|split|twisted|scaled|rational|sum|shifted|all (repeatable)")
      ->delimiter(',');
  cdybe->add_option("--samples", c_samples, "samples per family")->check(CLI::Range(1, 100000));
  cdybe->add_option("--mode", c_mode, "fd or analytic")->check(CLI::IsMember({"fd", "analytic"}));
  auto *c_seed_opt = cdybe->add_option("--seed", c_seed, "random seed");
  cdybe->add_option("--json", c_json, "write the JSON report here ('-' for stdout)");
  cdybe->add_option("--t", c_t, "scale for the scaled family");

  auto *cat = app.add_subcommand("catalog", "list the built-in algebras");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    out << app.help();
    return kExitPass;
  } catch (const CLI::ParseError &e) {
    std::ostringstream os;
    app.exit(e, os, os);
    err << os.str();
    return kExitUsage;
  }

  try {
    if (*validate) {
      auto p = load_algebra_config(config_path);
      const auto &g = p.entry.algebra;
      out << "ok " << g.name() << " dim " << g.n() << "\n"
          << validate_algebra(g).summary();
      if (p.entry.split)
        out << validate_split(g, *p.entry.split).summary();
      if (p.entry.twist)
        out << validate_automorphism(g, p.entry.twist->c, &p.entry.twist->split).summary();
      return kExitPass;
    }
    if (*identity) {
      auto id = parse_identity(id_name);
      if (!id)
        throw UsageError("unknown identity '" + id_name + "'");
      IdentityCase c;
      c.id = *id;
      c.algebra = resolve_algebra(algebra);
      c.samples = samples;
      c.seed = seed_opt->count() ? seed : default_seed();
      c.mode = cli_detail::parse_mode(mode);
      c.t = t;
      if (tol_opt->count()) {
        if (!(tol > 0))
          throw UsageError("--tol must be positive");
        c.tol = tol;
      }
      if (mu_opt->count())
        c.mu = Eigen::Map<const Eigen::VectorXd>(mu.data(), Eigen::Index(mu.size()));
      if (theta_opt->count())
        c.theta = theta;
      if (e_dim >= 0)
        c.e_dim = e_dim;
      return cli_detail::finish({run_identity(c)}, json_path, out);
    }
    if (*cdybe) {
      auto alg = resolve_algebra(c_algebra);
      if (families.empty())
        families = {"full"};
      bool expand = families.size() == 1 && families[0] == "all";
      if (expand)
        families = cdybe_family_names();
      auto m = cli_detail::parse_mode(c_mode);
      auto seed_v = c_seed_opt->count() ? c_seed : default_seed();
      std::vector<std::string> skipped;
      auto reports = run_cdybe_suite(alg, families, c_samples, seed_v, m, c_t, &skipped);
      if (!expand && !skipped.empty())
        throw UsageError(skipped.front());
      for (auto &s : skipped)
        out << "skipped " << s << "\n";
      return cli_detail::finish(reports, c_json, out);
    }
    if (*cat) {
      for (auto &name : catalog_names()) {
        if (name == "abelian:N" || name == "direct_sum:A+B") {
          out << name << "\n";
          continue;
        }
        auto e = catalog(name);
        out << name << " dim " << e.algebra.n()
            << (e.algebra.system()->is_definite() ? " definite" : " indefinite")
            << (e.split ? " split" : "") << (e.twist ? " twist" : "") << "\n";
      }
      return kExitPass;
    }
  } catch (const GuardExhaustion &e) {
    err << "guard exhaustion: " << e.what() << "\n";
    return kExitGuard;
  } catch (const ValidationError &e) {
    err << "validation failed: " << e.what() << "\n";
    return kExitFail;
  } catch (const ConfigParseError &e) {
    err << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const UsageError &e) {
    err << "usage: " << e.what() << "\n";
    return kExitUsage;
  } catch (const StructuralError &e) {
    err << "usage: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << "\n";
    return kExitFail;
  }
  return kExitUsage;
}

} // namespace cdyb
