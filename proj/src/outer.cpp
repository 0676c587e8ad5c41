#include "mulb/outer.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numeric>
#include <random>

#include "mulb/oracle.hpp"

namespace mulb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Eigenvalues of M sorted by decreasing modulus, ties by real then imaginary part.
std::vector<EigenPair> sorted_spectrum(const CMatrix& m) {
  auto all = eig_all(m);
  std::stable_sort(all.begin(), all.end(), [](const EigenPair& a, const EigenPair& b) {
    const double da = std::abs(a.value), db = std::abs(b.value);
    if (da != db) return da > db;
    if (a.value.real() != b.value.real()) return a.value.real() > b.value.real();
    return a.value.imag() > b.value.imag();
  });
  return all;
}

// y rotated so that e^{-i arg lambda} y^* x > 0.
CVector phased_left(const EigenPair& p) {
  const cplx c = std::polar(1.0, -std::arg(p.value)) * p.y.dot(p.x);
  return std::abs(c) > 0.0 ? CVector(p.y * std::polar(1.0, std::arg(c))) : p.y;
}

bool better(Mode mode, double a, double b) { return mode == Mode::Complex ? a > b : a < b; }

Perturbation jitter(const BlockStructure& s, const Perturbation& d, std::uint64_t seed) {
  const Perturbation r = random_unit_perturbation(s, seed);
  Perturbation out = d;
  for (std::size_t k = 0; k < out.blocks.size(); ++k) {
    BlockValue& v = out.blocks[k];
    if (auto* c = std::get_if<ComplexScalarBlock>(&v))
      c->delta += 1e-3 * std::get<ComplexScalarBlock>(r.blocks[k]).delta;
    else if (auto* re = std::get_if<RealScalarBlock>(&v))
      re->delta -= 1e-3 * std::copysign(1.0, re->delta);
    else if (auto* r1 = std::get_if<RankOneBlock>(&v)) {
      const auto& rr = std::get<RankOneBlock>(r.blocks[k]);
      r1->p += 1e-3 * rr.p;
      r1->q += 1e-3 * rr.q;
    } else {
      std::get<DenseBlock>(v).value += 1e-3 * full_block_matrix(r.blocks[k]);
    }
  }
  return normalize_blocks(out);
}

// Inner solve with one perturbed retry when the target is not simple.
FlowResult robust_flow(const CMatrix& m, const BlockStructure& s, double eps,
                       const Perturbation& start, Mode mode, const FlowOptions& opts,
                       std::vector<std::string>& notes, std::uint64_t seed) {
  try {
    return integrate_to_stationary(m, s, eps, start, mode, opts);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NonSimpleTarget) throw;
    notes.push_back("non-simple target at eps = " + std::to_string(eps) +
                    ", restarted from a perturbed value");
  }
  return integrate_to_stationary(m, s, eps, jitter(s, start, seed), mode, opts);
}

}  // namespace

const char* to_string(StepKind k) {
  switch (k) {
    case StepKind::Initial: return "initial";
    case StepKind::Newton: return "newton";
    case StepKind::Bisection: return "bisection";
  }
  return "unknown";
}

int auto_i_max(int n) { return n >= 5 ? std::max(n / 5, 5) : n; }

Perturbation initial_perturbation(const CMatrix& m, const BlockStructure& s, int eig_index,
                                  std::vector<std::string>* notes) {
  if (m.rows() != s.n() || m.cols() != s.n())
    throw Error(ErrorCode::DimensionMismatch, "matrix size does not match structure");
  const auto spec = sorted_spectrum(m);
  if (eig_index < 0 || eig_index >= static_cast<int>(spec.size()) ||
      std::abs(spec[eig_index].value) == 0.0)
    throw Error(ErrorCode::InvalidArgument,
                "eigenvalue index " + std::to_string(eig_index) + " is not a nonzero eigenvalue");
  const EigenPair& pair = spec[eig_index];
  const CVector& x = pair.x;
  const CVector y = phased_left(pair);
  auto note = [&](std::size_t k, const char* what) {
    if (notes)
      notes->push_back("start " + std::to_string(eig_index + 1) + ": block " +
                       std::to_string(k) + " " + what);
  };

  Perturbation out;
  for (std::size_t k = 0; k < s.size(); ++k) {
    const int o = s.offset(k), d = s[k].dim;
    const auto xk = x.segment(o, d);
    const auto yk = y.segment(o, d);
    const cplx gamma = xk.dot(yk) / double(d);  // trace(y_k x_k^*) / r
    switch (s[k].kind) {
      case BlockKind::ComplexScalar:
        if (std::abs(gamma) > 1e-14) {
          out.blocks.emplace_back(ComplexScalarBlock{gamma / std::abs(gamma)});
        } else {
          note(k, "vanishes, set to 1");
          out.blocks.emplace_back(ComplexScalarBlock{1.0});
        }
        break;
      case BlockKind::RealScalar:
        if (std::abs(gamma.real()) > 1e-14) {
          out.blocks.emplace_back(RealScalarBlock{gamma.real() > 0 ? 1.0 : -1.0});
        } else {
          note(k, "vanishes, set to 1");
          out.blocks.emplace_back(RealScalarBlock{1.0});
        }
        break;
      case BlockKind::ComplexFull: {
        const double ny = yk.norm(), nx = xk.norm();
        if (ny > 1e-14 && nx > 1e-14) {
          out.blocks.emplace_back(RankOneBlock{cplx(1.0), yk / ny, xk / nx});
        } else {
          note(k, "vanishes, set to e1 e1^*");
          CVector e1 = CVector::Zero(d);
          e1(0) = 1.0;
          out.blocks.emplace_back(RankOneBlock{cplx(1.0), e1, e1});
        }
        break;
      }
    }
  }
  return out;
}

double initial_epsilon(const CMatrix& m, const BlockStructure& s, int count) {
  if (m.rows() != s.n() || m.cols() != s.n())
    throw Error(ErrorCode::DimensionMismatch, "matrix size does not match structure");
  const auto spec = sorted_spectrum(m);
  double best = kInf;
  for (int k = 0; k < std::min<int>(count, static_cast<int>(spec.size())); ++k) {
    const EigenPair& p = spec[k];
    const double lam = std::abs(p.value);
    if (lam <= 1e-14 * std::max(1.0, std::abs(spec[0].value))) continue;
    const CVector y = phased_left(p);
    const double proj = assemble_dense(project_onto_structure(y * p.x.adjoint(), s), s).norm();
    if (proj <= 1e-14) continue;
    const double e = std::abs(y.dot(p.x)) / (2.0 * lam * proj);
    if (std::isfinite(e) && e > 0.0) best = std::min(best, e);
  }
  if (std::isfinite(best)) return best;
  const double nm = spectral_norm(m);
  if (nm == 0.0) throw Error(ErrorCode::InvalidArgument, "matrix is zero");
  return 1.0 / nm;
}

namespace {

double block_sum(const BlockStructure& s, const EigenTriple& eig, const CVector& z) {
  double total = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    const int o = s.offset(k), d = s[k].dim;
    const auto xk = eig.x.segment(o, d);
    const auto zk = z.segment(o, d);
    double term = 0.0;
    switch (s[k].kind) {
      case BlockKind::ComplexScalar:
        term = std::abs(zk.dot(xk));
        if (term < 1e-12)
          throw Error(ErrorCode::AssumptionViolated,
                      "z_k^* x_k vanishes on complex block " + std::to_string(k));
        break;
      case BlockKind::RealScalar:
        term = std::abs(zk.dot(xk).real());
        break;
      case BlockKind::ComplexFull:
        term = zk.norm() * xk.norm();
        if (term < 1e-12)
          throw Error(ErrorCode::AssumptionViolated,
                      "||z|| ||x|| vanishes on full block " + std::to_string(k));
        break;
    }
    total += term;
  }
  const double yx = std::abs(eig.y.dot(eig.x));
  if (yx < 1e-14) throw Error(ErrorCode::DegeneratePair, "y^* x vanishes");
  return total / yx;
}

}  // namespace

double derivative_complex(const BlockStructure& s, const EigenTriple& eig, const CVector& z) {
  return block_sum(s, eig, z);
}

double derivative_mixed(const BlockStructure& s, const EigenTriple& eig, const CVector& z) {
  return -block_sum(s, eig, z);
}

double newton_update(double eps, double objective, double derivative, Mode mode) {
  if (derivative == 0.0 || !std::isfinite(derivative))
    throw Error(ErrorCode::AssumptionViolated, "derivative is zero or not finite");
  const double step = mode == Mode::Complex ? (objective - 1.0) / derivative
                                            : objective / derivative;
  double next = eps - step;
  // Halve the step until eps stays positive.
  double delta = next - eps;
  for (int i = 0; i < 200 && !(next > 0.0); ++i) {
    delta *= 0.5;
    next = eps + delta;
  }
  if (!(next > 0.0)) throw Error(ErrorCode::InvalidArgument, "Newton step cannot keep eps > 0");
  return next;
}

Certificate compute_lower_bound(const CMatrix& m, const BlockStructure& s,
                                const OuterConfig& cfg) {
  if (m.rows() != s.n() || m.cols() != s.n())
    throw Error(ErrorCode::DimensionMismatch,
                "matrix is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                    " but structure " + s.to_string() + " has n = " + std::to_string(s.n()));
  if (!(cfg.tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tol must be positive");
  if (cfg.i_max && *cfg.i_max < 1) throw Error(ErrorCode::InvalidArgument, "i_max must be >= 1");
  if (cfg.initial_delta) check_conforms(*cfg.initial_delta, s);

  Certificate cert;
  const Mode mode = mode_for(s);
  cert.mode = mode;
  const int n = s.n();

  int nonzero = 0;
  {
    const auto spec = sorted_spectrum(m);
    for (const auto& p : spec)
      if (std::abs(p.value) > 1e-14 * std::max(1.0, std::abs(spec[0].value))) ++nonzero;
  }
  const int i_max = std::min(cfg.i_max.value_or(auto_i_max(n)), nonzero);

  double eps = cfg.eps0 ? *cfg.eps0 : initial_epsilon(m, s, std::max(i_max, 1));
  if (!(eps > 0.0) || !std::isfinite(eps))
    throw Error(ErrorCode::InvalidArgument, "eps0 must be positive and finite");

  // Lines 1-4: candidate starts at eps0.
  std::vector<std::pair<std::string, Perturbation>> starts;
  if (cfg.eigen_starts)
    for (int k = 0; k < i_max; ++k)
      starts.emplace_back("eig" + std::to_string(k + 1),
                          initial_perturbation(m, s, k, &cert.notes));
  // Eigenvector starts fix the sign of each real block; in mixed mode the
  // opposite signs often sit in a different basin, so both are tried.
  if (mode == Mode::Mixed && cfg.eigen_starts && cfg.real_sign_starts) {
    const std::size_t count = starts.size();
    for (std::size_t k = 0; k < count; ++k) {
      Perturbation flipped = starts[k].second;
      for (auto& b : flipped.blocks)
        if (auto* r = std::get_if<RealScalarBlock>(&b)) r->delta = -r->delta;
      starts.emplace_back(starts[k].first + "-", std::move(flipped));
    }
  }
  if (cfg.initial_delta) starts.emplace_back("user", *cfg.initial_delta);
  if (starts.empty()) {
    cert.notes.push_back("no start available (zero matrix or no user start)");
    cert.eps_f = eps;
    cert.delta_star = random_unit_perturbation(s, 0);
    cert.lower_bound = 1.0 / eps;
    cert.residual = 1.0;
    return cert;
  }

  struct StartPhase {
    std::optional<FlowState> best;
    std::vector<StartReport> reports;
    std::vector<std::string> notes;
    int steps = 0;
  };
  auto run_starts = [&](double level) {
    StartPhase ph;
    std::vector<std::optional<FlowResult>> results(starts.size());
    std::vector<std::vector<std::string>> start_notes(starts.size());
    std::vector<std::string> errors(starts.size());
    auto run = [&](std::size_t i) {
      try {
        results[i] = robust_flow(m, s, level, starts[i].second, mode, cfg.flow, start_notes[i],
                                   cfg.seed + i);
      } catch (const Error& e) {
        errors[i] = e.what();
      }
    };
    if (cfg.parallel && starts.size() > 1) {
      std::vector<std::future<void>> jobs;
      for (std::size_t i = 0; i < starts.size(); ++i)
        jobs.push_back(std::async(std::launch::async, run, i));
      for (auto& j : jobs) j.get();
    } else {
      for (std::size_t i = 0; i < starts.size(); ++i) run(i);
    }
    for (std::size_t i = 0; i < starts.size(); ++i) {
      StartReport rep;
      rep.label = starts[i].first;
      for (auto& note : start_notes[i]) ph.notes.push_back(rep.label + ": " + note);
      if (results[i]) {
        rep.objective = results[i]->state.objective;
        rep.reason = results[i]->diagnostics.reason;
        ph.steps += results[i]->diagnostics.accepted_steps;
        if (!ph.best || better(mode, rep.objective, ph.best->objective))
          ph.best = results[i]->state;
      } else {
        rep.failed = true;
        rep.error = errors[i];
      }
      ph.reports.push_back(std::move(rep));
    }
    return ph;
  };

  double eps_lo = 0.0, eps_hi = kInf;
  std::optional<FlowState> singular;  // mixed mode: state at eps_hi
  StartPhase phase = run_starts(eps);
  // The mixed-mode iteration approaches eps* from below. A starting level that
  // is already singular becomes the upper bracket and the level is halved.
  for (int tries = 0; mode == Mode::Mixed && phase.best &&
                      phase.best->objective <= cfg.zero_threshold && tries < 60;
       ++tries) {
    cert.inner_steps += phase.steps;
    cert.notes.push_back("eps0 = " + std::to_string(eps) + " is already singular; halved");
    eps_hi = eps;
    singular = phase.best;
    eps *= 0.5;
    phase = run_starts(eps);
  }
  cert.inner_steps += phase.steps;
  cert.starts = std::move(phase.reports);
  for (auto& note : phase.notes) cert.notes.push_back(std::move(note));
  if (!phase.best) {
    cert.notes.push_back("inner flow failed from every start");
    cert.eps_f = eps;
    cert.delta_star = starts.front().second;
    cert.lower_bound = 1.0 / eps;
    cert.residual = 1.0;
    return cert;
  }

  FlowState cur = std::move(*phase.best);
  cert.history.push_back({eps, cur.objective, StepKind::Initial});

  bool converged = false;
  StepKind last_kind = StepKind::Initial;
  double last_eps = eps;
  for (int k = 0; k < cfg.max_outer; ++k) {
    const double f = cur.objective;
    // A short Newton step from below that lands on a singular level overshoots
    // eps* by O(step^2), so below sqrt(tol) it is accepted like a regular
    // iterate instead of triggering bisection.
    const bool landing = mode == Mode::Mixed && f <= cfg.zero_threshold &&
                         last_kind == StepKind::Newton && eps > last_eps &&
                         eps - last_eps <= std::sqrt(cfg.tol) * eps;
    const bool at_zero = mode == Mode::Mixed && f <= cfg.zero_threshold && !landing;
    if (mode == Mode::Mixed) {
      if (at_zero) {
        if (eps <= eps_hi) {
          eps_hi = eps;
          singular = cur;
        }
      } else {
        eps_lo = std::max(eps_lo, eps);
      }
    } else {
      if (f < 1.0) eps_lo = std::max(eps_lo, eps);
      else if (f > 1.0) eps_hi = std::min(eps_hi, eps);
    }
    if (landing) singular = cur;
    if (at_zero && eps_hi - eps_lo < cfg.tol * eps) {
      converged = true;
      break;
    }

    double next = std::numeric_limits<double>::quiet_NaN();
    StepKind kind = StepKind::Newton;
    if (!at_zero) {
      try {
        const double d = mode == Mode::Complex ? derivative_complex(s, cur.eig, cur.z)
                                               : derivative_mixed(s, cur.eig, cur.z);
        next = newton_update(eps, f, d, mode);
      } catch (const Error& e) {
        cert.notes.push_back(std::string("Newton step unavailable: ") + e.what());
      }
    }
    if (mode == Mode::Mixed && std::isfinite(eps_hi) && std::isfinite(next) &&
        next >= eps_hi - cfg.tol * eps_hi) {
      // Newton lands on (or beyond) a level already known to be singular.
      eps = eps_hi;
      cur = *singular;
      converged = true;
      break;
    }
    const bool inside = std::isfinite(next) && next > eps_lo && next < eps_hi;
    if (!inside) {
      kind = StepKind::Bisection;
      next = std::isfinite(eps_hi) ? 0.5 * (eps_lo + eps_hi) : 2.0 * eps;
    }

    const double prev = eps;
    last_eps = eps;
    last_kind = kind;
    eps = next;
    try {
      FlowResult r = robust_flow(m, s, eps, cur.delta, mode, cfg.flow, cert.notes,
                                   cfg.seed + 1000 + k);
      cert.inner_steps += r.diagnostics.accepted_steps;
      cur = std::move(r.state);
    } catch (const Error& e) {
      cert.notes.push_back(std::string("inner flow failed: ") + e.what());
      eps = prev;
      break;
    }
    cert.history.push_back({eps, cur.objective, kind});
    if (std::abs(eps - prev) < cfg.tol * eps) {
      converged = true;
      break;
    }
  }
  if (!converged) cert.notes.push_back("outer iteration hit max_outer");

  if (mode == Mode::Mixed) {
    // The flow can stop at the zero threshold just short of saturating a real
    // block. Snap those blocks to +-1; the residual grows by about the snap size.
    Perturbation snapped = cur.delta;
    bool moved = false;
    for (auto& b : snapped.blocks)
      if (auto* r = std::get_if<RealScalarBlock>(&b)) {
        const double a = std::abs(r->delta);
        if (a != 1.0 && std::abs(a - 1.0) <= 1e-6) {
          r->delta = std::copysign(1.0, r->delta);
          moved = true;
        }
      }
    if (moved) {
      try {
        FlowState st = make_state({m, s, mode}, eps, snapped, cfg.flow);
        if (st.objective <= cfg.verify_threshold) cur = std::move(st);
      } catch (const Error&) {
      }
    }
  }

  cert.eps_f = eps;
  cert.lower_bound = 1.0 / eps;
  if (mode == Mode::Complex) {
    // Rotate so the critical eigenvalue sits on the positive real axis.
    cert.delta_star = rotate_complex_blocks(cur.delta, std::polar(1.0, -std::arg(cur.eig.value)));
    cert.residual = std::abs(cur.objective - 1.0);
  } else {
    cert.delta_star = cur.delta;
    cert.residual = cur.objective;
  }
  const VerificationReport rep =
      verify_certificate(m, s, cert.eps_f, cert.delta_star, cfg.verify_threshold);
  cert.verified = rep.verified;
  for (const auto& note : rep.notes) cert.notes.push_back(note);
  return cert;
}

}  // namespace mulb
