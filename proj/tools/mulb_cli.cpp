#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mulb/io.hpp"
#include "mulb/outer.hpp"
#include "mulb/oracle.hpp"
#include "mulb/selftest.hpp"

using namespace mulb;

namespace {

constexpr int kOk = 0, kUsage = 1, kUnverified = 2;

struct RunConfig {
  std::string matrix_path;
  std::string structure;
  double tol = 1e-9;
  std::optional<double> eps0;
  std::optional<int> starts;
  std::uint64_t seed = 1;
  std::string output = "text";
  std::string delta_path;
  std::string init_delta_path;
  std::optional<double> eps;
  double threshold = 1e-6;
  int trials = 10000;
  int grid_points = 1000;
  std::string fixture_dir;
  bool no_properties = false;
  bool serial = false;
  bool sign_starts = false;
};

// Accepts a bare matrix object or any object carrying it under "matrix".
CMatrix load_matrix(const std::string& path) {
  const json j = read_json_file(path);
  return matrix_from_json(j.contains("matrix") ? j.at("matrix") : j);
}

// A structure given on the command line wins over one stored in the file.
BlockStructure load_structure(const RunConfig& rc) {
  if (!rc.structure.empty()) return parse_structure(rc.structure);
  const json j = read_json_file(rc.matrix_path);
  if (!j.contains("structure"))
    throw Error(ErrorCode::InvalidArgument, "--structure is required for " + rc.matrix_path);
  return parse_structure(j.at("structure").get<std::string>());
}

void print_certificate_text(const Certificate& c, const BlockStructure& s) {
  std::printf("structure    %s (%s mode)\n", s.to_string().c_str(), to_string(c.mode));
  std::printf("lower bound  %.12g\n", c.lower_bound);
  std::printf("eps_f        %.12g\n", c.eps_f);
  std::printf("residual     %.3e\n", c.residual);
  std::printf("verified     %s\n", c.verified ? "yes" : "no");
  std::printf("history\n");
  for (std::size_t k = 0; k < c.history.size(); ++k)
    std::printf("  %2zu  eps = %.12f  objective = %.6e  (%s)\n", k, c.history[k].eps,
                c.history[k].objective, to_string(c.history[k].kind));
  for (const auto& note : c.notes) std::printf("note: %s\n", note.c_str());
}

int solve_command(const RunConfig& rc) {
  const CMatrix m = load_matrix(rc.matrix_path);
  const BlockStructure s = load_structure(rc);
  if (m.rows() != s.n())
    throw Error(ErrorCode::DimensionMismatch, "matrix is " + std::to_string(m.rows()) +
                                                  "x" + std::to_string(m.cols()) +
                                                  " but structure " + s.to_string() +
                                                  " has n = " + std::to_string(s.n()));
  OuterConfig cfg;
  cfg.tol = rc.tol;
  cfg.eps0 = rc.eps0;
  cfg.i_max = rc.starts;
  cfg.seed = rc.seed;
  cfg.parallel = !rc.serial;
  cfg.real_sign_starts = rc.sign_starts;
  if (!rc.init_delta_path.empty()) {
    const json j = read_json_file(rc.init_delta_path);
    cfg.initial_delta = perturbation_from_json(j.contains("delta") ? j.at("delta") : j, s);
  }
  const Certificate c = compute_lower_bound(m, s, cfg);
  if (rc.output == "json") std::cout << certificate_to_json(c, s).dump(2) << '\n';
  else print_certificate_text(c, s);
  return c.verified ? kOk : kUnverified;
}

int verify_command(const RunConfig& rc) {
  const CMatrix m = load_matrix(rc.matrix_path);
  const BlockStructure s = load_structure(rc);
  const json j = read_json_file(rc.delta_path);
  // Either a certificate (delta + eps_f) or a bare perturbation.
  const Perturbation d = perturbation_from_json(j.contains("delta") ? j.at("delta") : j, s);
  double eps = 0.0;
  if (rc.eps) eps = *rc.eps;
  else if (j.contains("eps_f")) eps = j.at("eps_f").get<double>();
  else if (j.contains("eps")) eps = j.at("eps").get<double>();
  else throw Error(ErrorCode::InvalidArgument, "no eps in " + rc.delta_path + "; pass --eps");
  const VerificationReport r = verify_certificate(m, s, eps, d, rc.threshold);
  if (rc.output == "json") {
    json out = report_to_json(r);
    out["eps"] = eps;
    std::cout << out.dump(2) << '\n';
  } else {
    std::printf("eps                   %.12g\n", eps);
    std::printf("singularity residual  %.3e (threshold %.1e)\n", r.singularity_residual,
                r.threshold);
    std::printf("||Delta||_2           %.12g\n", r.delta_norm);
    std::printf("admissible            %s\n", r.admissible ? "yes" : "no");
    std::printf("verified              %s\n", r.verified ? "yes" : "no");
    for (const auto& note : r.notes) std::printf("note: %s\n", note.c_str());
  }
  return r.verified ? kOk : kUnverified;
}

int oracle_command(const RunConfig& rc) {
  const CMatrix m = load_matrix(rc.matrix_path);
  const BlockStructure s = load_structure(rc);
  const SampleResult sr = sample_lower_bound(m, s, rc.trials, rc.seed, !rc.serial);
  std::optional<double> grid;
  std::string grid_note;
  try {
    grid = grid_mu_tiny(m, s, rc.grid_points);
  } catch (const Error& e) {
    grid_note = e.what();
  }
  const double sampled = std::isfinite(sr.best_eps) ? 1.0 / sr.best_eps : 0.0;
  if (rc.output == "json") {
    json out{{"trials", rc.trials}, {"hits", sr.hits}, {"sampled_lower_bound", sampled}};
    if (std::isfinite(sr.best_eps)) out["sampled_best_eps"] = sr.best_eps;
    if (grid) out["grid_lower_bound"] = *grid;
    else out["grid_note"] = grid_note;
    std::cout << out.dump(2) << '\n';
  } else {
    std::printf("sampling   %d trials, %d singular rays, best bound %.10g\n", rc.trials, sr.hits,
                sampled);
    if (grid) std::printf("grid       best bound %.10g\n", *grid);
    else std::printf("grid       not applicable: %s\n", grid_note.c_str());
  }
  return kOk;
}

int selftest_command(const RunConfig& rc) {
  SelftestOptions opts;
  opts.seed = rc.seed;
  opts.properties = !rc.no_properties;
  if (!rc.fixture_dir.empty()) opts.fixture_dir = rc.fixture_dir;
  const auto rows = run_selftest(opts);
  print_selftest(std::cout, rows);
  int failed = 0;
  for (const auto& r : rows)
    if (!r.passed) {
      if (!failed) std::cerr << "failing:";
      std::cerr << ' ' << r.name;
      ++failed;
    }
  if (failed) std::cerr << '\n';
  return failed ? kUnverified : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lower bounds for the structured singular value"};
  app.require_subcommand(1);
  RunConfig rc;

  auto add_problem = [&](CLI::App* sub) {
    sub->add_option("--matrix", rc.matrix_path, "matrix JSON")->required()->check(CLI::ExistingFile);
    sub->add_option("--structure", rc.structure, "block structure, e.g. rs:2,cf:1");
    sub->add_option("--seed", rc.seed, "random seed");
    sub->add_option("--output", rc.output, "json or text")
        ->check(CLI::IsMember({"json", "text"}));
    sub->add_flag("--serial", rc.serial, "run starts sequentially");
  };

  auto* solve = app.add_subcommand("solve", "compute a lower bound with a certificate");
  add_problem(solve);
  solve->add_option("--tol", rc.tol, "outer tolerance on eps")->check(CLI::PositiveNumber);
  solve->add_option("--eps0", rc.eps0, "starting level")->check(CLI::PositiveNumber);
  solve->add_option("--starts", rc.starts, "number of eigenvector starts")
      ->check(CLI::PositiveNumber);
  solve->add_option("--init-delta", rc.init_delta_path, "extra starting perturbation JSON")
      ->check(CLI::ExistingFile);
  solve->add_flag("--sign-starts", rc.sign_starts,
                  "mixed mode: also try each eigenvector start with real blocks negated");

  auto* verify = app.add_subcommand("verify", "check a certificate");
  add_problem(verify);
  verify->add_option("--delta", rc.delta_path, "certificate or perturbation JSON")
      ->required()
      ->check(CLI::ExistingFile);
  verify->add_option("--eps", rc.eps, "level (overrides eps_f in the file)")
      ->check(CLI::PositiveNumber);
  verify->add_option("--threshold", rc.threshold, "singularity threshold")
      ->check(CLI::PositiveNumber);

  auto* oracle = app.add_subcommand("oracle", "sampling and grid lower bounds");
  add_problem(oracle);
  oracle->add_option("--trials", rc.trials, "random samples")->check(CLI::PositiveNumber);
  oracle->add_option("--grid", rc.grid_points, "grid points per parameter")
      ->check(CLI::PositiveNumber);

  auto* selftest = app.add_subcommand("selftest", "run the embedded reference problems");
  selftest->add_option("--seed", rc.seed, "random seed");
  selftest->add_option("--fixtures", rc.fixture_dir, "load fixture matrices from this directory")
      ->check(CLI::ExistingDirectory);
  selftest->add_flag("--no-properties", rc.no_properties, "skip the property checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*solve) return solve_command(rc);
    if (*verify) return verify_command(rc);
    if (*oracle) return oracle_command(rc);
    return selftest_command(rc);
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.code()) << "): " << e.what() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
  }
  return kUsage;
}
