#include "mulb/selftest.hpp"

#include <cmath>
#include <cstdio>
#include <random>

#include "mulb/fixtures.hpp"
#include "mulb/io.hpp"
#include "mulb/outer.hpp"

namespace mulb {

namespace {

struct Check {
  const char* name;
  bool relative;  // relative error of the bound, else absolute
  double tol;
  bool one_sided;  // bound >= reference - tol is enough
};

// Tolerances match the acceptance thresholds for each reference problem.
constexpr Check kChecks[] = {
    {"motivating", true, 1e-4, false},  {"complex_five", false, 1e-3, true},
    {"mixed_five", true, 1e-4, false},  {"newton_five", false, 1e-6, false},
    {"real_ten", false, 1e-6, false},   {"warm_ten", true, 1e-3, false},
};

OuterConfig config_for(const Fixture& f) {
  OuterConfig cfg;
  cfg.eps0 = f.eps0;
  if (f.name == "warm_ten") cfg.initial_delta = f.suboptimal;
  return cfg;
}

CMatrix random_matrix(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  CMatrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = cplx(g(rng), g(rng));
  return m;
}

SelftestRow property_row(std::string name, double err, double tol) {
  SelftestRow row;
  row.name = std::move(name);
  row.value = err;
  row.error = err;
  row.tolerance = tol;
  row.passed = err <= tol;
  return row;
}

}  // namespace

std::vector<SelftestRow> run_selftest(const SelftestOptions& opts) {
  std::vector<SelftestRow> rows;
  for (const Check& check : kChecks) {
    SelftestRow row;
    row.name = check.name;
    row.tolerance = check.tol;
    try {
      Fixture f = *find_fixture(check.name);
      row.reference = f.reference_bound;
      if (opts.fixture_dir) {
        const json j = read_json_file(*opts.fixture_dir + "/" + f.name + ".json");
        f.m = matrix_from_json(j.at("matrix"));
        if (f.m.rows() != f.s.n())
          throw Error(ErrorCode::DimensionMismatch, "fixture matrix has wrong size");
      }
      OuterConfig cfg = config_for(f);
      cfg.seed = opts.seed;
      const Certificate c = compute_lower_bound(f.m, f.s, cfg);
      row.value = c.lower_bound;
      const double diff = c.lower_bound - f.reference_bound;
      row.error = check.one_sided ? std::max(0.0, -diff) : std::abs(diff);
      if (check.relative) row.error /= f.reference_bound;
      row.passed = row.error <= check.tol && c.verified;
      if (!c.verified) row.detail = "certificate not verified";
    } catch (const std::exception& e) {
      row.passed = false;
      row.detail = e.what();
    }
    rows.push_back(std::move(row));
  }
  if (!opts.properties) return rows;

  // Trivial reductions and homogeneity on a few random matrices.
  std::mt19937_64 rng(opts.seed);
  double err_norm = 0.0, err_rho = 0.0, err_hom = 0.0;
  for (int t = 0; t < 3; ++t) {
    const int n = 3 + t;
    const CMatrix m = random_matrix(n, rng);
    const BlockStructure full = parse_structure("cf:" + std::to_string(n));
    const BlockStructure rep = parse_structure("cs:" + std::to_string(n));
    const double a = compute_lower_bound(m, full).lower_bound;
    const double b = compute_lower_bound(m, rep).lower_bound;
    const double c = compute_lower_bound(2.5 * m, full).lower_bound;
    err_norm = std::max(err_norm, std::abs(a - spectral_norm(m)) / spectral_norm(m));
    err_rho = std::max(err_rho, std::abs(b - spectral_radius(m)) / spectral_radius(m));
    err_hom = std::max(err_hom, std::abs(c - 2.5 * a) / (2.5 * a));
  }
  rows.push_back(property_row("prop:full_block_norm", err_norm, 1e-8));
  rows.push_back(property_row("prop:repeated_scalar_radius", err_rho, 1e-8));
  rows.push_back(property_row("prop:homogeneity", err_hom, 1e-8));
  return rows;
}

void print_selftest(std::ostream& out, const std::vector<SelftestRow>& rows) {
  char line[256];
  std::snprintf(line, sizeof line, "%-28s %-6s %16s %16s %10s %8s\n", "check", "result", "value",
                "reference", "error", "tol");
  out << line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%-28s %-6s %16.10g %16.10g %10.2e %8.0e", r.name.c_str(),
                  r.passed ? "PASS" : "FAIL", r.value, r.reference, r.error, r.tolerance);
    out << line;
    if (!r.detail.empty()) out << "  " << r.detail;
    out << '\n';
  }
}

}  // namespace mulb
