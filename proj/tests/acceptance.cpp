// Acceptance suite: one PASS/FAIL line per criterion, details indented below.
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "mulb/fixtures.hpp"
#include "mulb/oracle.hpp"
#include "mulb/outer.hpp"

using namespace mulb;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Criterion {
  int id;
  std::string title;
  bool passed = true;
  std::vector<std::string> details;

  void expect(bool ok, const char* fmt, ...) __attribute__((format(printf, 3, 4))) {
    char buf[512];
    va_list ap;
    va_start(ap, fmt);
    std::vsnprintf(buf, sizeof buf, fmt, ap);
    va_end(ap);
    details.push_back(std::string(ok ? "ok   " : "bad  ") + buf);
    passed = passed && ok;
  }
  void info(const std::string& s) { details.push_back("info " + s); }
};

// Certificates emitted anywhere in the suite, re-checked by criterion 7(f).
struct Emitted {
  CMatrix m;
  BlockStructure s;
  Certificate c;
};
std::vector<Emitted> g_emitted;

Certificate solve(const CMatrix& m, const BlockStructure& s, const OuterConfig& cfg = {}) {
  Certificate c = compute_lower_bound(m, s, cfg);
  g_emitted.push_back({m, s, c});
  return c;
}

CMatrix random_matrix(int n, std::mt19937_64& rng, bool real = false) {
  std::normal_distribution<double> g;
  CMatrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = cplx(g(rng), real ? 0.0 : g(rng));
  return m;
}

CVector random_vector(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  CVector v(n);
  for (int i = 0; i < n; ++i) v(i) = cplx(g(rng), g(rng));
  return v;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// ---------------------------------------------------------------------------

void criterion1(Criterion& cr) {
  const Fixture f = fixture_motivating();
  const auto t0 = Clock::now();
  const Certificate c = solve(f.m, f.s);
  const double dt = seconds_since(t0);
  cr.expect(rel(c.lower_bound, 2.2459865301) <= 1e-4, "bound %.12f (rel err %.2e)",
            c.lower_bound, rel(c.lower_bound, 2.2459865301));
  cr.expect(std::abs(c.eps_f - 0.445238645) <= 1e-4, "eps_f %.12f", c.eps_f);
  cr.expect(dt < 5.0, "runtime %.3f s", dt);
  cr.expect(c.verified, "certificate verified (residual %.2e)", c.residual);
}

void criterion2(Criterion& cr) {
  const Fixture f = fixture_complex_five();
  const Certificate c = solve(f.m, f.s);
  cr.expect(c.lower_bound >= 4.4844 - 1e-3, "bound %.12f >= %.4f", c.lower_bound, 4.4844 - 1e-3);
  cr.expect(c.verified, "certificate verified (residual %.2e)", c.residual);

  // Replay every inner flow of the outer run with traces: all eigenvector
  // starts at the first level, then the warm-started chain.
  FlowOptions opts;
  opts.record_trace = true;
  const FlowProblem pb{f.m, f.s, Mode::Complex};
  const int starts = auto_i_max(f.s.n());
  int flows = 0, steps = 0, violations = 0;
  auto run = [&](double eps, const Perturbation& d0) {
    const FlowResult r = integrate_to_stationary(f.m, f.s, eps, d0, Mode::Complex, opts);
    double prev = make_state(pb, eps, d0, opts).objective;
    for (double v : r.diagnostics.trace) {
      if (!(v > prev)) ++violations;
      prev = v;
    }
    ++flows;
    steps += static_cast<int>(r.diagnostics.trace.size());
    return r;
  };
  const double eps0 = c.history.front().eps;
  std::optional<FlowResult> best;
  for (int k = 0; k < starts; ++k) {
    FlowResult r = run(eps0, initial_perturbation(f.m, f.s, k));
    if (!best || r.state.objective > best->state.objective) best = std::move(r);
  }
  Perturbation d = best->state.delta;
  for (std::size_t k = 1; k < c.history.size(); ++k) d = run(c.history[k].eps, d).state.delta;
  cr.expect(violations == 0 && steps > 0, "|lambda| strictly increasing on %d accepted steps of %d flows",
            steps, flows);
}

void criterion3(Criterion& cr) {
  const Fixture f = fixture_mixed_five();
  const Certificate c = solve(f.m, f.s);
  cr.expect(rel(c.lower_bound, 3.300239739) <= 1e-4, "bound %.12f (rel err %.2e)", c.lower_bound,
            rel(c.lower_bound, 3.300239739));
  cr.expect(c.verified, "certificate verified (residual %.2e)", c.residual);
  double worst = 0.0;
  for (const auto& v : c.delta_star.blocks) {
    if (auto* cs = std::get_if<ComplexScalarBlock>(&v))
      worst = std::max(worst, std::abs(std::abs(cs->delta) - 1.0));
    else if (auto* rs = std::get_if<RealScalarBlock>(&v))
      worst = std::max(worst, std::abs(std::abs(rs->delta) - 1.0));
  }
  cr.expect(worst <= 1e-10, "scalar blocks on the unit circle / at +-1 (max dev %.1e)", worst);
}

void criterion4(Criterion& cr) {
  const Fixture f = fixture_newton_five();
  OuterConfig cfg;
  cfg.eps0 = f.eps0;
  const Certificate c = solve(f.m, f.s, cfg);
  const std::size_t kmax = std::min<std::size_t>(4, f.eps_trajectory.size());
  cr.expect(c.history.size() >= kmax, "history has %zu iterates", c.history.size());
  for (std::size_t k = 0; k < std::min(kmax, c.history.size()); ++k) {
    const double d = std::abs(c.history[k].eps - f.eps_trajectory[k]);
    cr.expect(d <= 1e-6, "eps(%zu) = %.12f vs %.12f (diff %.1e, |zeta| %.2e, %s)", k,
              c.history[k].eps, f.eps_trajectory[k], d, c.history[k].objective,
              to_string(c.history[k].kind));
  }
  cr.expect(std::abs(c.lower_bound - 2.101113160408110) <= 1e-6, "bound %.12f (diff %.1e)",
            c.lower_bound, std::abs(c.lower_bound - 2.101113160408110));
  // Superlinear decay along Newton steps: r_{k+1} <= C r_k^2 with C = 1,
  // floored at 1e-12 where rounding dominates.
  bool quad = true;
  int newton = 0;
  for (std::size_t k = 0; k + 1 < c.history.size(); ++k) {
    if (c.history[k + 1].kind != StepKind::Newton) continue;
    ++newton;
    const double rk = c.history[k].objective, rn = c.history[k + 1].objective;
    quad = quad && rn <= std::max(rk * rk, 1e-12);
  }
  cr.expect(quad && newton >= 2, "residuals decay quadratically over %d Newton steps", newton);
}

void criterion5(Criterion& cr) {
  const Fixture f = fixture_real_ten();
  OuterConfig cfg;
  cfg.eps0 = f.eps0;
  const Certificate c = solve(f.m, f.s, cfg);
  cr.expect(std::abs(c.eps_f - 0.227979361429) <= 1e-6, "eps_f %.12f (diff %.1e)", c.eps_f,
            std::abs(c.eps_f - 0.227979361429));
  cr.expect(std::abs(c.lower_bound - 4.38636196596) <= 1e-6, "bound %.12f (diff %.1e)",
            c.lower_bound, std::abs(c.lower_bound - 4.38636196596));
  cr.expect(c.verified, "certificate verified (residual %.2e)", c.residual);
  for (std::size_t k = 0; k < f.s.size(); ++k) {
    if (f.s[k].kind != BlockKind::ComplexFull) continue;
    const CMatrix b = full_block_matrix(c.delta_star.blocks[k]);
    const Eigen::JacobiSVD<CMatrix> svd(b);
    const auto sv = svd.singularValues();
    cr.expect(sv(1) <= 1e-10 * sv(0), "full block rank one (sigma2/sigma1 = %.1e)", sv(1) / sv(0));
    cr.expect(std::abs(b.norm() - 1.0) <= 1e-12, "full block Frobenius norm %.15f", b.norm());
  }
}

void criterion6(Criterion& cr) {
  const Fixture f = fixture_warm_ten();
  OuterConfig cfg;
  cfg.eps0 = 0.23;
  cfg.initial_delta = f.suboptimal;
  const Certificate c = solve(f.m, f.s, cfg);
  cr.expect(rel(c.lower_bound, 4.259161456) <= 1e-3, "bound %.9f (rel err %.2e)", c.lower_bound,
            rel(c.lower_bound, 4.259161456));
  cr.expect(rel(c.eps_f, 0.23478601) <= 1e-3, "eps_f %.9f vs 0.23478601", c.eps_f);
  cr.expect(c.verified, "certificate verified (residual %.2e)", c.residual);
  bool user = false;
  for (const auto& s : c.starts) user = user || s.label == "user";
  cr.expect(user && c.history.front().eps == 0.23, "user start used at eps0 = %.2f",
            c.history.front().eps);
}

// (a) tangency and norm conservation
void property_a(Criterion& cr, std::mt19937_64& rng) {
  const char* shapes[] = {"cs:1,cf:2,rs:1", "cs:2,cs:1,cf:3", "rs:1,rs:2,cs:1,cf:1", "cf:2,cf:2"};
  double tang = 0.0, norm_err = 0.0;
  int steps = 0;
  for (int t = 0; t < 100; ++t) {
    const BlockStructure s = parse_structure(shapes[t % 4]);
    const CMatrix m = random_matrix(s.n(), rng);
    Perturbation d = random_unit_perturbation(s, 1000 + t);
    if (t % 2) d = to_dense_blocks(d);
    const CVector x = random_vector(s.n(), rng), z = random_vector(s.n(), rng);
    const auto dir = gradient_mixed(s, d, x, z);
    for (std::size_t k = 0; k < s.size(); ++k) {
      const auto& v = d.blocks[k];
      const auto& w = dir.blocks[k];
      if (auto* c = std::get_if<ComplexScalarBlock>(&v))
        tang = std::max(tang, std::abs((std::conj(c->delta) * std::get<cplx>(w)).real()));
      else if (auto* r1 = std::get_if<RankOneBlock>(&v)) {
        const auto& rd = std::get<RankOneDirection>(w);
        const CMatrix e = rd.sigma_dot * r1->p * r1->q.adjoint() +
                          r1->sigma * rd.p_dot * r1->q.adjoint() +
                          r1->sigma * r1->p * rd.q_dot.adjoint();
        tang = std::max(tang, std::abs(frobenius_inner(full_block_matrix(v), e).real()));
      } else if (auto* db = std::get_if<DenseBlock>(&v))
        tang = std::max(tang, std::abs(frobenius_inner(db->value, std::get<CMatrix>(w)).real()));
    }
    const Mode mode = mode_for(s);
    const FlowProblem pb{m, s, mode};
    FlowState st = make_state(pb, 0.8 / spectral_norm(m), d);
    for (int k = 0; k < 5; ++k) {
      if (euler_step(pb, st, {}) != StepResult::Accepted) break;
      ++steps;
      for (const auto& v : st.delta.blocks) {
        if (auto* r = std::get_if<RealScalarBlock>(&v))
          norm_err = std::max(norm_err, std::max(0.0, std::abs(r->delta) - 1.0));
        else if (auto* r1 = std::get_if<RankOneBlock>(&v))
          norm_err = std::max({norm_err, std::abs(std::abs(r1->sigma) - 1.0),
                               std::abs(r1->p.norm() - 1.0), std::abs(r1->q.norm() - 1.0)});
        else
          norm_err = std::max(norm_err, std::abs(block_magnitude(v) - 1.0));
      }
    }
  }
  cr.expect(tang <= 1e-12, "(a) tangency residual %.1e on 100 instances", tang);
  cr.expect(norm_err <= 1e-12 && steps > 0, "(a) post-step norm error %.1e over %d steps",
            norm_err, steps);
}

// (b) analytic derivative vs finite differences at converged points
void property_b(Criterion& cr, std::mt19937_64& rng) {
  const char* shapes[] = {"cs:1,cf:2,cs:1", "cs:2,cf:1,cf:1", "rs:1,cs:1,cf:2", "rs:1,rs:1,cs:2"};
  double worst = 0.0;
  int done = 0, attempts = 0;
  while (done < 20 && attempts < 200) {
    ++attempts;
    const BlockStructure s = parse_structure(shapes[attempts % 4]);
    const Mode mode = mode_for(s);
    const CMatrix m = random_matrix(s.n(), rng);
    const double eps = 0.6 / spectral_norm(m);
    try {
      const FlowResult r = integrate_to_stationary(m, s, eps, initial_perturbation(m, s, 0), mode);
      // Only genuinely stationary points carry the derivative formulas.
      if (r.diagnostics.reason != StopReason::Stationary &&
          r.diagnostics.reason != StopReason::Stalled)
        continue;
      if (mode == Mode::Mixed && r.state.objective < 1e-3) continue;
      const double d = mode == Mode::Complex ? derivative_complex(s, r.state.eig, r.state.z)
                                             : derivative_mixed(s, r.state.eig, r.state.z);
      auto f = [&](double e) {
        return integrate_to_stationary(m, s, e, r.state.delta, mode).state.objective;
      };
      worst = std::max(worst, fd_check_derivative(f, eps, d));
      ++done;
    } catch (const Error&) {
      continue;
    }
  }
  cr.expect(done == 20 && worst <= 1e-4, "(b) derivative vs FD: worst rel err %.1e on %d instances",
            worst, done);
}

// (c) rank-one vs dense flow
void property_c(Criterion& cr, std::mt19937_64& rng) {
  const char* shapes[] = {"cs:1,cf:3,cs:1", "cf:2,cf:3", "rs:1,cf:3,cs:1"};
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const BlockStructure s = parse_structure(shapes[t % 3]);
    const Mode mode = mode_for(s);
    const CMatrix m = random_matrix(s.n(), rng);
    const Perturbation d0 = random_unit_perturbation(s, 2000 + t);
    FlowOptions dense;
    dense.full_form = FullBlockForm::Dense;
    const double eps = (mode == Mode::Complex ? 1.0 : 0.5) / spectral_norm(m);
    const auto a = integrate_to_stationary(m, s, eps, d0, mode);
    const auto b = integrate_to_stationary(m, s, eps, d0, mode, dense);
    worst = std::max(worst, std::abs(a.state.objective - b.state.objective));
  }
  cr.expect(worst <= 1e-6, "(c) rank-one vs dense final objective: max diff %.1e on 20", worst);
}

// (d) trivial reductions
void property_d(Criterion& cr, std::mt19937_64& rng) {
  double e_norm = 0.0, e_rho = 0.0;
  for (int t = 0; t < 20; ++t) {
    const int n = 2 + t % 9;
    const CMatrix m = random_matrix(n, rng);
    const Certificate a = solve(m, parse_structure("cf:" + std::to_string(n)));
    const Certificate b = solve(m, parse_structure("cs:" + std::to_string(n)));
    e_norm = std::max(e_norm, rel(a.lower_bound, spectral_norm(m)));
    e_rho = std::max(e_rho, rel(b.lower_bound, spectral_radius(m)));
  }
  cr.expect(e_norm <= 1e-8, "(d) cf:n vs ||M||_2: max rel err %.1e on 20", e_norm);
  cr.expect(e_rho <= 1e-8, "(d) cs:n vs rho(M): max rel err %.1e on 20", e_rho);
}

// (e) homogeneity
void property_e(Criterion& cr, std::mt19937_64& rng) {
  const char* shapes[] = {"cs:1,cf:2,cs:1", "rs:1,cs:1,cf:2", "rs:2,cf:1", "cs:2,rs:1,cf:2"};
  double worst = 0.0;
  for (int t = 0; t < 8; ++t) {
    const BlockStructure s = parse_structure(shapes[t % 4]);
    const CMatrix m = random_matrix(s.n(), rng);
    const double alpha = 0.3 + 1.7 * t;
    const Certificate a = solve(m, s);
    const Certificate b = solve(alpha * m, s);
    worst = std::max(worst, rel(b.lower_bound, alpha * a.lower_bound));
  }
  cr.expect(worst <= 1e-8, "(e) homogeneity: max rel err %.1e on 8 (M, alpha)", worst);
}

// (f) every emitted certificate passes the independent check
void property_f(Criterion& cr) {
  int bad = 0;
  for (const auto& e : g_emitted) {
    const auto r = verify_certificate(e.m, e.s, e.c.eps_f, e.c.delta_star);
    if (!r.verified || !e.c.verified) ++bad;
  }
  cr.expect(bad == 0, "(f) %zu emitted certificates, %d fail verification", g_emitted.size(), bad);
}

void criterion7(Criterion& cr) {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(7);
  property_a(cr, rng);
  property_b(cr, rng);
  property_c(cr, rng);
  property_d(cr, rng);
  property_e(cr, rng);
  property_f(cr);
  const double dt = seconds_since(t0);
  cr.expect(dt < 180.0, "property suite runtime %.1f s", dt);
}

void criterion8(Criterion& cr) {
  std::mt19937_64 rng(8);
  struct Shape {
    const char* s;
    bool real;
  };
  const Shape shapes[] = {{"cs:1,cs:1", false}, {"cs:1,cs:2", false}, {"rs:1,cs:1", false},
                          {"rs:1,rs:1", true},  {"rs:2,cs:1", false}};
  double worst = 0.0, worst_signs = 0.0;
  int done = 0, skipped = 0;
  for (int t = 0; done < 20 && t < 200; ++t) {
    const Shape& sh = shapes[t % 5];
    const BlockStructure s = parse_structure(sh.s);
    const CMatrix m = random_matrix(s.n(), rng, sh.real);
    const double g = grid_mu_tiny(m, s);
    if (g == 0.0) {
      ++skipped;  // no admissible perturbation makes I - eps M Delta singular
      continue;
    }
    const Certificate c = solve(m, s);
    worst = std::max(worst, rel(c.lower_bound, g));
    OuterConfig wide;
    wide.real_sign_starts = true;
    worst_signs = std::max(worst_signs, rel(solve(m, s, wide).lower_bound, g));
    ++done;
  }
  cr.expect(done == 20 && worst <= 1e-2, "grid vs solver: max rel diff %.2e on %d instances", worst,
            done);
  {
    char buf[128];
    std::snprintf(buf, sizeof buf, "with real-sign starts: max rel diff %.2e", worst_signs);
    cr.info(buf);
  }
  if (skipped) cr.info(std::to_string(skipped) + " draws had no real singularity and were redrawn");

  // Sampling corroboration on the first five fixtures: warnings only.
  const auto fixtures = all_fixtures();
  for (std::size_t k = 0; k < 5 && k < fixtures.size(); ++k) {
    const Fixture& f = fixtures[k];
    OuterConfig cfg;
    cfg.eps0 = f.eps0;
    const Certificate c = compute_lower_bound(f.m, f.s, cfg);
    const SampleResult sr = sample_lower_bound(f.m, f.s, 10000, 4242 + k);
    char buf[256];
    const bool ok = sr.best_eps >= c.eps_f * (1 - 1e-3);
    std::snprintf(buf, sizeof buf, "%s sampling %s: best eps %.9g vs eps_f %.9g (%d hits)",
                  f.name.c_str(), ok ? "consistent" : "WARNING beats solver", sr.best_eps,
                  c.eps_f, sr.hits);
    cr.info(buf);
  }
}

}  // namespace

int main() {
  std::vector<std::pair<std::string, std::function<void(Criterion&)>>> all = {
      {"motivating example bound, eps_f and runtime", criterion1},
      {"complex example bound and monotone inner flows", criterion2},
      {"mixed example bound and unit scalar blocks", criterion3},
      {"Newton trajectory, bound and quadratic decay", criterion4},
      {"ten-by-ten real example eps_f, bound and rank-one block", criterion5},
      {"warm start from a suboptimal perturbation", criterion6},
      {"property suite (a)-(f)", criterion7},
      {"grid and sampling oracles", criterion8},
  };
  int failed = 0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    Criterion cr{static_cast<int>(i + 1), all[i].first};
    const auto t0 = Clock::now();
    try {
      all[i].second(cr);
    } catch (const std::exception& e) {
      cr.expect(false, "exception: %s", e.what());
    }
    std::printf("%s criterion %d: %s (%.1f s)\n", cr.passed ? "PASS" : "FAIL", cr.id,
                cr.title.c_str(), seconds_since(t0));
    for (const auto& d : cr.details) std::printf("    %s\n", d.c_str());
    std::fflush(stdout);
    failed += !cr.passed;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(all.size()) - failed, all.size());
  return failed ? 1 : 0;
}
