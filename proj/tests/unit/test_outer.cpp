#include <doctest.h>

#include "mulb/fixtures.hpp"
#include "mulb/oracle.hpp"
#include "mulb/outer.hpp"
#include "util.hpp"

using namespace mulb;
using mulb::test::manifold_error;
using mulb::test::random_matrix;

namespace {

FlowState converged(const CMatrix& m, const BlockStructure& s, double eps, const Perturbation& d0) {
  return integrate_to_stationary(m, s, eps, d0, mode_for(s)).state;
}

}  // namespace

TEST_CASE("auto_i_max") {
  CHECK(auto_i_max(3) == 3);
  CHECK(auto_i_max(5) == 5);
  CHECK(auto_i_max(10) == 5);
  CHECK(auto_i_max(40) == 8);
}

TEST_CASE("initial perturbation for a single full block is the outer product y x^*") {
  std::mt19937_64 rng(1);
  const CMatrix m = random_matrix(4, rng);
  const auto s = parse_structure("cf:4");
  const Perturbation d = initial_perturbation(m, s, 0);
  const auto pairs = eig_all(m);
  const auto top = target_largest(m);
  const CMatrix yx = top.y * top.x.adjoint();
  const CMatrix d0 = full_block_matrix(d.blocks[0]);
  CHECK(d0.norm() == doctest::Approx(1.0));
  CHECK(std::abs(frobenius_inner(d0, yx)) == doctest::Approx(yx.norm()).epsilon(1e-10));
}

TEST_CASE("initial perturbation for diagonal M has unit scalars") {
  CMatrix m = CMatrix::Zero(2, 2);
  m(0, 0) = 2.0;
  m(1, 1) = 1.0;
  std::vector<std::string> notes;
  const Perturbation d = initial_perturbation(m, parse_structure("cs:1,cs:1"), 0, &notes);
  CHECK(std::abs(std::get<ComplexScalarBlock>(d.blocks[0]).delta) == doctest::Approx(1.0));
  CHECK(std::abs(std::get<ComplexScalarBlock>(d.blocks[1]).delta) == doctest::Approx(1.0));
  CHECK_FALSE(notes.empty());  // the second block vanishes and falls back
}

TEST_CASE("initial epsilon") {
  const CMatrix one = CMatrix::Identity(1, 1);
  CHECK(initial_epsilon(one, parse_structure("cs:1"), 1) == doctest::Approx(0.5));

  std::mt19937_64 rng(2);
  for (int t = 0; t < 10; ++t) {
    const CMatrix m = random_matrix(6, rng);
    const double e = initial_epsilon(m, parse_structure("cs:2,rs:1,cf:3"), 3);
    CHECK(std::isfinite(e));
    CHECK(e > 0.0);
  }
  const Fixture f = fixture_newton_five();
  CHECK(1.0 / spectral_norm(f.m) == doctest::Approx(*f.eps0).epsilon(1e-11));
}

TEST_CASE("scalar derivative") {
  CMatrix m(1, 1);
  m << cplx(3.0, 4.0);
  const auto s = parse_structure("cs:1");
  const FlowState st = converged(m, s, 0.1, Perturbation{{ComplexScalarBlock{1.0}}});
  CHECK(derivative_complex(s, st.eig, st.z) == doctest::Approx(5.0));
  CHECK(fd_check_derivative([&](double e) { return e * 5.0; }, 0.1, 5.0) <= 1e-9);
}

TEST_CASE("mixed derivative reduces to the complex one without real blocks") {
  const Fixture f = fixture_complex_five();
  const FlowState st = converged(f.m, f.s, 0.2, initial_perturbation(f.m, f.s, 0));
  CHECK(derivative_mixed(f.s, st.eig, st.z) ==
        doctest::Approx(-derivative_complex(f.s, st.eig, st.z)));
}

TEST_CASE("complex derivative matches finite differences at the extremizer level") {
  const Fixture f = fixture_complex_five();
  const double eps = f.reference_eps;
  const FlowState st = converged(f.m, f.s, eps, *f.extremizer);
  const double d = derivative_complex(f.s, st.eig, st.z);
  CHECK(d > 0.0);
  auto value = [&](double e) { return converged(f.m, f.s, e, st.delta).objective; };
  CHECK(fd_check_derivative(value, eps, d) <= 1e-4);
}

TEST_CASE("mixed derivative matches finite differences below the singular level") {
  const Fixture f = fixture_mixed_five();
  const double eps = 0.3;
  const FlowState st = converged(f.m, f.s, eps, *f.extremizer);
  const double d = derivative_mixed(f.s, st.eig, st.z);
  CHECK(d < 0.0);
  auto value = [&](double e) { return converged(f.m, f.s, e, st.delta).objective; };
  CHECK(fd_check_derivative(value, eps, d) <= 1e-4);
}

TEST_CASE("newton_update") {
  CHECK(newton_update(0.4, 1.0, 3.0, Mode::Complex) == 0.4);
  CHECK(newton_update(0.4, 0.7, 3.0, Mode::Complex) == doctest::Approx(0.5));
  CHECK(newton_update(0.4, 0.3, -3.0, Mode::Mixed) == doctest::Approx(0.5));
  // A step to a non-positive level is halved until positive.
  CHECK(newton_update(0.1, 3.0, 3.0, Mode::Complex) > 0.0);
}

TEST_CASE("reference Newton steps") {
  const Fixture a = fixture_newton_five();
  OuterConfig cfg;
  cfg.eps0 = a.eps0;
  const Certificate ca = compute_lower_bound(a.m, a.s, cfg);
  REQUIRE(ca.history.size() >= 2);
  CHECK(ca.history[0].objective == doctest::Approx(0.325206140643).epsilon(1e-8));
  CHECK(std::abs(ca.history[1].eps - 0.475935094375) <= 1e-6);
  CHECK(ca.history[1].kind == StepKind::Newton);

  const Fixture b = fixture_real_ten();
  cfg.eps0 = b.eps0;
  const Certificate cb = compute_lower_bound(b.m, b.s, cfg);
  REQUIRE(cb.history.size() >= 2);
  CHECK(std::abs(cb.history[1].eps - 0.227979361395) <= 1e-6);
  CHECK(std::abs(cb.eps_f - 0.227979361429) <= 1e-6);
  CHECK(cb.lower_bound == doctest::Approx(4.38636196596).epsilon(1e-6));
}

TEST_CASE("compute_lower_bound on the motivating example") {
  const Fixture f = fixture_motivating();
  const Certificate c = compute_lower_bound(f.m, f.s);
  CHECK(c.mode == Mode::Mixed);
  CHECK(c.lower_bound == doctest::Approx(2.2459865301).epsilon(1e-4));
  CHECK(std::abs(c.eps_f - 0.445238645) <= 1e-4);
  CHECK(c.verified);
  CHECK(manifold_error(c.delta_star) <= 1e-12);
  CHECK(c.residual <= 1e-8);
  CHECK(c.history.front().kind == StepKind::Initial);
}

TEST_CASE("trivial structures reduce to the spectral norm and radius") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 5; ++t) {
    const CMatrix m = random_matrix(3 + t % 3, rng);
    const int n = static_cast<int>(m.rows());
    const auto full = compute_lower_bound(m, parse_structure("cf:" + std::to_string(n)));
    CHECK(full.lower_bound == doctest::Approx(spectral_norm(m)).epsilon(1e-8));
    const auto rep = compute_lower_bound(m, parse_structure("cs:" + std::to_string(n)));
    CHECK(rep.lower_bound == doctest::Approx(spectral_radius(m)).epsilon(1e-8));
  }
}

TEST_CASE("homogeneity in M") {
  std::mt19937_64 rng(4);
  const auto s = parse_structure("cs:1,cf:2,cs:1");
  const CMatrix m = random_matrix(4, rng);
  const double a = compute_lower_bound(m, s).lower_bound;
  const double b = compute_lower_bound(3.0 * m, s).lower_bound;
  CHECK(b == doctest::Approx(3.0 * a).epsilon(1e-8));
}

TEST_CASE("verified certificates satisfy the residual bound") {
  std::mt19937_64 rng(5);
  const auto s = parse_structure("rs:1,cs:1,cf:2");
  for (int t = 0; t < 4; ++t) {
    const CMatrix m = random_matrix(4, rng);
    OuterConfig cfg;
    const Certificate c = compute_lower_bound(m, s, cfg);
    if (!c.verified) continue;
    CHECK(manifold_error(c.delta_star) <= 1e-12);
    const CMatrix a = CMatrix::Identity(4, 4) - c.eps_f * m * assemble_dense(c.delta_star, s);
    CHECK(eigenvalues(a).cwiseAbs().minCoeff() <= 10 * cfg.tol);
    // Every bisection iterate lies below the final singular level.
    for (const auto& h : c.history)
      if (h.kind == StepKind::Bisection) CHECK(h.eps < c.eps_f + cfg.tol);
  }
}

TEST_CASE("a user start is accepted") {
  const Fixture f = fixture_warm_ten();
  OuterConfig cfg;
  cfg.eps0 = f.eps0;
  cfg.initial_delta = f.suboptimal;
  cfg.eigen_starts = false;
  const Certificate c = compute_lower_bound(f.m, f.s, cfg);
  REQUIRE(c.starts.size() == 1);
  CHECK(c.starts[0].label == "user");
  CHECK(c.lower_bound > 1.0);

  OuterConfig bad;
  bad.initial_delta = Perturbation{{ComplexScalarBlock{1.0}}};
  CHECK_THROWS_AS(compute_lower_bound(f.m, f.s, bad), Error);
}

TEST_CASE("real-sign starts double the eigenvector starts in mixed mode") {
  const Fixture f = fixture_motivating();
  OuterConfig cfg;
  cfg.real_sign_starts = true;
  const Certificate c = compute_lower_bound(f.m, f.s, cfg);
  REQUIRE(c.starts.size() == 2 * static_cast<std::size_t>(auto_i_max(3)));
  CHECK(c.starts.back().label == "eig3-");
  CHECK(c.verified);
  CHECK(c.lower_bound >= 2.2459865301 * (1 - 1e-4));
}

TEST_CASE("snapped real blocks sit exactly at +-1") {
  const Fixture f = fixture_mixed_five();
  const Certificate c = compute_lower_bound(f.m, f.s);
  for (const auto& b : c.delta_star.blocks)
    if (const auto* r = std::get_if<RealScalarBlock>(&b)) CHECK(std::abs(r->delta) == 1.0);
  CHECK(c.verified);
}
