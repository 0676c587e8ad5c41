#include "mulb/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <thread>

#include "mulb/eigen_core.hpp"

namespace mulb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kAdmissSlack = 1e-10;
constexpr double kRealTol = 1e-8;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Smallest eps > 0 with 1 in the spectrum of eps M Delta, for a fixed Delta.
double singular_eps(const CMatrix& md, bool complex_only) {
  const CVector w = eigenvalues(md);
  if (complex_only) {
    double rho = 0.0;
    for (Eigen::Index k = 0; k < w.size(); ++k) rho = std::max(rho, std::abs(w(k)));
    return rho > 0.0 ? 1.0 / rho : kInf;
  }
  double best = kInf;
  for (Eigen::Index k = 0; k < w.size(); ++k) {
    if (w(k) == 0.0) continue;
    const cplx inv = 1.0 / w(k);
    if (inv.real() > 0.0 && std::abs(inv.imag()) <= kRealTol) best = std::min(best, inv.real());
  }
  return best;
}

}  // namespace

VerificationReport verify_certificate(const CMatrix& m, const BlockStructure& s, double eps,
                                      const Perturbation& delta, double threshold) {
  VerificationReport rep;
  rep.threshold = threshold;
  try {
    check_conforms(delta, s);
  } catch (const Error& e) {
    rep.notes.push_back(e.what());
    return rep;
  }
  if (m.rows() != s.n() || m.cols() != s.n()) {
    rep.notes.push_back("matrix size does not match structure");
    return rep;
  }
  bool blocks_ok = true;
  for (std::size_t k = 0; k < s.size(); ++k) {
    const BlockValue& v = delta.blocks[k];
    double norm2 = 0.0;
    if (auto* c = std::get_if<ComplexScalarBlock>(&v)) norm2 = std::abs(c->delta);
    else if (auto* r = std::get_if<RealScalarBlock>(&v)) norm2 = std::abs(r->delta);
    else norm2 = spectral_norm(full_block_matrix(v));
    if (!std::isfinite(norm2) || norm2 > 1.0 + kAdmissSlack) {
      blocks_ok = false;
      rep.notes.push_back("block " + std::to_string(k) + " has norm " + std::to_string(norm2) +
                          " > 1");
    }
  }
  const CMatrix d = assemble_dense(delta, s);
  rep.delta_norm = spectral_norm(d);
  rep.admissible = blocks_ok && rep.delta_norm <= 1.0 + kAdmissSlack && eps > 0.0;
  const CVector w = eigenvalues(eps * m * d);
  double res = kInf;
  for (Eigen::Index k = 0; k < w.size(); ++k) res = std::min(res, std::abs(1.0 - w(k)));
  rep.singularity_residual = res;
  rep.verified = rep.admissible && res <= threshold;
  if (!(res <= threshold))
    rep.notes.push_back("I - eps M Delta is not singular to the threshold");
  return rep;
}

SampleResult sample_lower_bound(const CMatrix& m, const BlockStructure& s, int trials,
                                std::uint64_t seed, bool parallel) {
  if (trials < 1) throw Error(ErrorCode::InvalidArgument, "trials must be >= 1");
  if (m.rows() != s.n() || m.cols() != s.n())
    throw Error(ErrorCode::DimensionMismatch, "matrix size does not match structure");
  const bool complex_only = !s.has_real_blocks();

  struct Partial {
    double eps = kInf;
    std::uint64_t trial_seed = 0;
    int hits = 0;
  };
  auto chunk = [&](int begin, int end) {
    Partial p;
    for (int t = begin; t < end; ++t) {
      const std::uint64_t ts = splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(t)));
      const Perturbation d = random_unit_perturbation(s, ts);
      const double e = singular_eps(m * assemble_dense(d, s), complex_only);
      if (std::isfinite(e)) ++p.hits;
      if (e < p.eps) {
        p.eps = e;
        p.trial_seed = ts;
      }
    }
    return p;
  };

  std::vector<Partial> parts;
  const int workers =
      parallel ? std::max(1, std::min<int>(static_cast<int>(std::thread::hardware_concurrency()), 16))
               : 1;
  if (workers == 1 || trials < 64) {
    parts.push_back(chunk(0, trials));
  } else {
    std::vector<std::future<Partial>> jobs;
    const int per = (trials + workers - 1) / workers;
    for (int b = 0; b < trials; b += per)
      jobs.push_back(std::async(std::launch::async, chunk, b, std::min(trials, b + per)));
    for (auto& j : jobs) parts.push_back(j.get());
  }

  SampleResult out{kInf, std::nullopt, 0};
  std::uint64_t best_seed = 0;
  for (const auto& p : parts) {
    out.hits += p.hits;
    if (p.eps < out.best_eps) {
      out.best_eps = p.eps;
      best_seed = p.trial_seed;
    }
  }
  if (std::isfinite(out.best_eps)) out.best_delta = random_unit_perturbation(s, best_seed);
  return out;
}

double fd_check_derivative(const std::function<double(double)>& f, double eps, double analytic) {
  const double h = 1e-6 * std::max(1.0, eps);
  const double fd = (f(eps + h) - f(eps - h)) / (2.0 * h);
  return std::abs(fd - analytic) / std::max(1.0, std::abs(analytic));
}

namespace {

struct TinyProblem {
  const CMatrix& m;
  const BlockStructure& s;
  std::vector<int> real_blocks;
  std::vector<int> complex_blocks;

  CMatrix md(const std::vector<double>& reals, const std::vector<double>& angles) const {
    CMatrix out = m;
    auto scale_cols = [&](int block, cplx v) {
      out.middleCols(s.offset(block), s[block].dim) *= v;
    };
    for (std::size_t i = 0; i < real_blocks.size(); ++i) scale_cols(real_blocks[i], reals[i]);
    for (std::size_t i = 0; i < complex_blocks.size(); ++i)
      scale_cols(complex_blocks[i], std::polar(1.0, angles[i]));
    return out;
  }
};

// Largest real positive eigenvalue of M Delta (0 when none).
double real_hit(const CMatrix& md) {
  const CVector w = eigenvalues(md);
  double best = 0.0;
  for (Eigen::Index k = 0; k < w.size(); ++k) {
    if (w(k) == 0.0) continue;
    const cplx inv = 1.0 / w(k);
    if (inv.real() > 0.0 && std::abs(inv.imag()) <= kRealTol) best = std::max(best, w(k).real());
  }
  return best;
}

std::vector<cplx> to_vec(const CVector& w) { return {w.data(), w.data() + w.size()}; }

// Index of the entry of `w` nearest to `target`.
std::size_t nearest(const std::vector<cplx>& w, cplx target) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < w.size(); ++k)
    if (std::abs(w[k] - target) < std::abs(w[best] - target)) best = k;
  return best;
}

// Sweeps the angle of the single complex block with the real parameters
// fixed, tracking eigenvalues between samples. Every sign change of Im(lambda)
// with Re(lambda) > 0 is refined by bisection; returns the largest crossing
// Re(lambda), or 0 when there is none.
double angle_sweep(const TinyProblem& tp, const std::vector<double>& reals, int points) {
  const double two_pi = 2.0 * M_PI;
  auto eval = [&](double phi) { return to_vec(eigenvalues(tp.md(reals, {phi}))); };
  double best = 0.0;
  std::vector<cplx> prev = eval(0.0);
  for (const cplx& l : prev) best = std::max(best, l != 0.0 && std::abs((1.0 / l).imag()) <= kRealTol && l.real() > 0 ? l.real() : 0.0);
  double prev_phi = 0.0;
  for (int i = 1; i <= points; ++i) {
    const double phi = two_pi * i / points;
    const std::vector<cplx> cur = eval(phi);
    for (std::size_t j = 0; j < prev.size(); ++j) {
      const std::size_t kk = nearest(cur, prev[j]);
      const cplx a = prev[j], b = cur[kk];
      if (a.real() <= 0.0 && b.real() <= 0.0) continue;
      if ((a.imag() > 0.0) == (b.imag() > 0.0) && a.imag() != 0.0 && b.imag() != 0.0) continue;
      double lo = prev_phi, hi = phi;
      cplx la = a;
      for (int it = 0; it < 50; ++it) {
        const double mid = 0.5 * (lo + hi);
        const std::vector<cplx> wm = eval(mid);
        const cplx lm = wm[nearest(wm, la)];
        if ((lm.imag() > 0.0) == (la.imag() > 0.0)) {
          lo = mid;
          la = lm;
        } else {
          hi = mid;
        }
      }
      const std::vector<cplx> wf = eval(0.5 * (lo + hi));
      const cplx lf = wf[nearest(wf, la)];
      if (lf.real() > 0.0 && std::abs(lf.imag()) <= 1e-6 * std::max(1.0, std::abs(lf)))
        best = std::max(best, lf.real());
    }
    prev = cur;
    prev_phi = phi;
  }
  return best;
}

}  // namespace

double grid_mu_tiny(const CMatrix& m, const BlockStructure& s, int points) {
  if (m.rows() != s.n() || m.cols() != s.n())
    throw Error(ErrorCode::DimensionMismatch, "matrix size does not match structure");
  if (points < 2) throw Error(ErrorCode::InvalidArgument, "grid needs at least 2 points");
  TinyProblem tp{m, s, {}, {}};
  for (std::size_t k = 0; k < s.size(); ++k) {
    switch (s[k].kind) {
      case BlockKind::ComplexFull:
        throw Error(ErrorCode::TooManyParameters, "grid oracle does not handle full blocks");
      case BlockKind::RealScalar: tp.real_blocks.push_back(static_cast<int>(k)); break;
      case BlockKind::ComplexScalar: tp.complex_blocks.push_back(static_cast<int>(k)); break;
    }
  }
  const std::size_t nr = tp.real_blocks.size(), nc = tp.complex_blocks.size();
  if (nr + nc > 2)
    throw Error(ErrorCode::TooManyParameters,
                "grid oracle handles at most two scalar parameters, got " +
                    std::to_string(nr + nc));
  const double two_pi = 2.0 * M_PI;

  if (nr == 0) {
    // rho(M Delta) is invariant under a common phase: pin the first angle.
    if (nc == 1) return spectral_radius(tp.md({}, {0.0}));
    auto f = [&](double phi) { return spectral_radius(tp.md({}, {0.0, phi})); };
    double best = 0.0, arg = 0.0;
    for (int i = 0; i < points; ++i) {
      const double phi = two_pi * i / points;
      const double v = f(phi);
      if (v > best) best = v, arg = phi;
    }
    const double cell = two_pi / points;
    for (int i = 0; i <= points; ++i) best = std::max(best, f(arg - cell + 2.0 * cell * i / points));
    return best;
  }

  auto real_value = [&](double a, std::optional<double> b) {
    if (nc == 1) return angle_sweep(tp, {a}, points);
    return b ? real_hit(tp.md({a, *b}, {})) : real_hit(tp.md({a}, {}));
  };
  auto at = [&](int i, double lo, double hi) { return lo + (hi - lo) * i / (points - 1); };

  if (nr == 1 && nc <= 1) {
    double best = 0.0, arg = -1.0;
    for (int i = 0; i < points; ++i) {
      const double a = at(i, -1.0, 1.0);
      const double v = real_value(a, std::nullopt);
      if (v > best) best = v, arg = a;
    }
    const double cell = 2.0 / (points - 1);
    const double lo = std::max(-1.0, arg - cell), hi = std::min(1.0, arg + cell);
    const int fine = nc == 1 ? std::max(2, points / 20) : points;
    for (int i = 0; i < fine; ++i)
      best = std::max(best, real_value(lo + (hi - lo) * i / (fine - 1), std::nullopt));
    return best;
  }

  // Two real parameters.
  double best = 0.0, arg_a = -1.0, arg_b = -1.0;
  for (int i = 0; i < points; ++i)
    for (int j = 0; j < points; ++j) {
      const double a = at(i, -1.0, 1.0), b = at(j, -1.0, 1.0);
      const double v = real_value(a, b);
      if (v > best) best = v, arg_a = a, arg_b = b;
    }
  const double cell = 2.0 / (points - 1);
  const double alo = std::max(-1.0, arg_a - cell), ahi = std::min(1.0, arg_a + cell);
  const double blo = std::max(-1.0, arg_b - cell), bhi = std::min(1.0, arg_b + cell);
  const int fine = std::max(2, points / 10);
  for (int i = 0; i < fine; ++i)
    for (int j = 0; j < fine; ++j)
      best = std::max(best, real_value(alo + (ahi - alo) * i / (fine - 1),
                                       blo + (bhi - blo) * j / (fine - 1)));
  return best;
}

}  // namespace mulb
