#include "mulb/inner_flow.hpp"

#include <algorithm>
#include <cmath>

namespace mulb {

namespace {

constexpr double kVanish = 1e-14;

GradientDirection gradient_impl(const BlockStructure& s, const Perturbation& delta,
                                const CVector& x, const CVector& z, Normalization norm) {
  check_conforms(delta, s);
  if (x.size() != s.n() || z.size() != s.n())
    throw Error(ErrorCode::DimensionMismatch, "eigenvector length does not match structure");
  GradientDirection out;
  out.blocks.reserve(s.size());
  out.magnitudes.reserve(s.size());
  for (std::size_t k = 0; k < s.size(); ++k) {
    const int o = s.offset(k), d = s[k].dim;
    const auto xk = x.segment(o, d);
    const auto zk = z.segment(o, d);
    const BlockValue& v = delta.blocks[k];

    if (auto* c = std::get_if<ComplexScalarBlock>(&v)) {
      const cplx g = xk.dot(zk);  // x_k^* z_k
      cplx w = g - (g * std::conj(c->delta)).real() * c->delta;
      const double mag = std::abs(w);
      if (norm == Normalization::Unit && mag > kVanish) w /= mag;
      out.blocks.emplace_back(w);
      out.magnitudes.push_back(mag);
    } else if (auto* r = std::get_if<RealScalarBlock>(&v)) {
      const double re = zk.dot(xk).real();  // Re(z_l^* x_l)
      double w = 0.0;
      if (re > 0.0 && r->delta < 1.0) w = 1.0;
      else if (re < 0.0 && r->delta > -1.0) w = -1.0;
      const double mag = std::abs(re);
      // Raw gradient: speed |Re(z^* x)| instead of the unit sign.
      if (norm == Normalization::None) w *= mag;
      out.blocks.emplace_back(w);
      out.magnitudes.push_back(mag);
    } else if (auto* r1 = std::get_if<RankOneBlock>(&v)) {
      RankOneDirection dir = rhs_rank1(r1->sigma, r1->p, r1->q, xk, zk, 0.0);
      const CMatrix expanded = dir.sigma_dot * r1->p * r1->q.adjoint() +
                               r1->sigma * dir.p_dot * r1->q.adjoint() +
                               r1->sigma * r1->p * dir.q_dot.adjoint();
      const double mag = expanded.norm();
      if (norm == Normalization::Unit && mag > kVanish) {
        dir.sigma_dot /= mag;
        dir.p_dot /= mag;
        dir.q_dot /= mag;
      }
      out.blocks.emplace_back(std::move(dir));
      out.magnitudes.push_back(mag);
    } else {
      const auto& dv = std::get<DenseBlock>(v).value;
      const CMatrix g = zk * xk.adjoint();
      CMatrix w = g - frobenius_inner(dv, g).real() * dv;
      const double mag = w.norm();
      if (norm == Normalization::Unit && mag > kVanish) w /= mag;
      out.blocks.emplace_back(std::move(w));
      out.magnitudes.push_back(mag);
    }
  }
  return out;
}

bool improves(Mode mode, double candidate, double current) {
  return mode == Mode::Complex ? candidate > current : candidate < current;
}

}  // namespace

Mode mode_for(const BlockStructure& s) {
  return s.has_real_blocks() ? Mode::Mixed : Mode::Complex;
}

const char* to_string(Mode m) { return m == Mode::Complex ? "complex" : "mixed"; }

const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::Stationary: return "stationary";
    case StopReason::Stalled: return "stalled";
    case StopReason::StepUnderflow: return "step_underflow";
    case StopReason::MaxSteps: return "max_steps";
    case StopReason::ZeroReached: return "zero_reached";
  }
  return "unknown";
}

GradientDirection gradient_complex(const BlockStructure& s, const Perturbation& delta,
                                   const CVector& x, const CVector& z, Normalization norm) {
  return gradient_impl(s, delta, x, z, norm);
}

GradientDirection gradient_mixed(const BlockStructure& s, const Perturbation& delta,
                                 const CVector& x, const CVector& z, Normalization norm) {
  return gradient_impl(s, delta, x, z, norm);
}

RankOneDirection rhs_rank1(cplx sigma, const CVector& p, const CVector& q, const CVector& x,
                           const CVector& z, double sigma_min) {
  if (std::abs(sigma) < sigma_min || sigma == 0.0)
    throw Error(ErrorCode::SigmaUnderflow, "rank-one block has |sigma| below sigma_min");
  const cplx alpha = p.dot(z);  // p^* z
  const cplx beta = q.dot(x);   // q^* x
  RankOneDirection d;
  d.sigma_dot = cplx(0.0, (alpha * std::conj(beta) * std::conj(sigma)).imag()) * sigma;
  d.p_dot = (z - alpha * p) * (std::conj(beta) / sigma);
  d.q_dot = (x - beta * q) * (std::conj(alpha) / std::conj(sigma));
  return d;
}

EigenTriple evaluate_target(const FlowProblem& pb, double eps, const Perturbation& delta,
                            double zero_tol) {
  const CMatrix a = eps * pb.m * assemble_dense(delta, pb.s);
  return pb.mode == Mode::Complex ? target_largest(a) : target_closest_to_one(a, zero_tol);
}

FlowState make_state(const FlowProblem& pb, double eps, Perturbation delta,
                     const FlowOptions& opts) {
  FlowState st;
  st.eps = eps;
  st.delta = std::move(delta);
  st.eig = evaluate_target(pb, eps, st.delta, opts.zero_tol);
  st.z = pb.m.adjoint() * st.eig.y;
  st.h = opts.h0;
  st.objective = std::abs(st.eig.value);
  return st;
}

Perturbation advance(const Perturbation& delta, const GradientDirection& dir, double h) {
  if (dir.blocks.size() != delta.blocks.size())
    throw Error(ErrorCode::DimensionMismatch, "direction and perturbation differ in length");
  Perturbation out = delta;
  for (std::size_t k = 0; k < out.blocks.size(); ++k) {
    BlockValue& v = out.blocks[k];
    const BlockDirection& w = dir.blocks[k];
    if (auto* c = std::get_if<ComplexScalarBlock>(&v)) {
      c->delta += h * std::get<cplx>(w);
    } else if (auto* r = std::get_if<RealScalarBlock>(&v)) {
      r->delta += h * std::get<double>(w);
    } else if (auto* r1 = std::get_if<RankOneBlock>(&v)) {
      const auto& d = std::get<RankOneDirection>(w);
      r1->sigma += h * d.sigma_dot;
      r1->p += h * d.p_dot;
      r1->q += h * d.q_dot;
    } else {
      std::get<DenseBlock>(v).value += h * std::get<CMatrix>(w);
    }
  }
  return normalize_blocks(out);
}

StepResult euler_step(const FlowProblem& pb, FlowState& state, const FlowOptions& opts) {
  // The direction is built from eps * z so that the trajectory depends on
  // eps M only.
  const GradientDirection dir =
      gradient_impl(pb.s, state.delta, state.eig.x, state.eps * state.z, Normalization::None);
  while (state.h >= opts.h_min) {
    Perturbation trial = advance(state.delta, dir, state.h);
    EigenTriple eig;
    bool ok = true;
    try {
      eig = evaluate_target(pb, state.eps, trial, opts.zero_tol);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NonSimpleTarget) throw;
      ok = false;
    }
    if (ok && improves(pb.mode, std::abs(eig.value), state.objective)) {
      state.delta = std::move(trial);
      state.eig = std::move(eig);
      state.z = pb.m.adjoint() * state.eig.y;
      state.objective = std::abs(state.eig.value);
      ++state.accepted_steps;
      state.h = std::min(1.25 * state.h, opts.h_max);
      return StepResult::Accepted;
    }
    ++state.rejected_steps;
    state.h *= 0.5;
  }
  return StepResult::Underflow;
}

double stationarity_residual(const FlowProblem& pb, const FlowState& state) {
  const auto& s = pb.s;
  const CVector& x = state.eig.x;
  const CVector& z = state.z;
  double acc = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    const int o = s.offset(k), d = s[k].dim;
    const auto xk = x.segment(o, d);
    const auto zk = z.segment(o, d);
    const BlockValue& v = state.delta.blocks[k];
    if (auto* c = std::get_if<ComplexScalarBlock>(&v)) {
      const cplx g = xk.dot(zk);
      if (std::abs(g) > kVanish) acc += std::norm(c->delta - g / std::abs(g));
    } else if (auto* r = std::get_if<RealScalarBlock>(&v)) {
      const double re = zk.dot(xk).real();
      const double scale = zk.norm() * xk.norm();
      const bool pinned = (r->delta >= 1.0 && re >= 0.0) || (r->delta <= -1.0 && re <= 0.0);
      if (!pinned && scale > kVanish) acc += (re / scale) * (re / scale);
    } else {
      const double nz = zk.norm(), nx = xk.norm();
      if (nz * nx > kVanish) {
        const CMatrix target = (zk / nz) * (xk / nx).adjoint();
        acc += (full_block_matrix(v) - target).squaredNorm();
      }
    }
  }
  return std::sqrt(acc);
}

FlowResult integrate_to_stationary(const CMatrix& m, const BlockStructure& s, double eps,
                                   const Perturbation& delta0, Mode mode,
                                   const FlowOptions& opts) {
  if (m.rows() != s.n() || m.cols() != s.n())
    throw Error(ErrorCode::DimensionMismatch, "matrix size does not match structure");
  if (!(eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "eps must be positive");
  check_conforms(delta0, s);

  FlowDiagnostics diag;
  Perturbation start = delta0;
  for (std::size_t k = 0; k < start.blocks.size(); ++k) {
    auto* r1 = std::get_if<RankOneBlock>(&start.blocks[k]);
    if (!r1) continue;
    if (opts.full_form == FullBlockForm::Dense || std::abs(r1->sigma) < opts.sigma_min) {
      if (opts.full_form == FullBlockForm::RankOne)
        diag.dense_fallback_blocks.push_back(static_cast<int>(k));
      start.blocks[k] = DenseBlock{full_block_matrix(start.blocks[k])};
    }
  }
  start = normalize_blocks(start);

  const FlowProblem pb{m, s, mode};
  FlowResult res{make_state(pb, eps, std::move(start), opts), {}};
  FlowState& st = res.state;
  int stall = 0;
  diag.reason = StopReason::MaxSteps;
  while (st.accepted_steps + st.rejected_steps < opts.max_steps) {
    if (mode == Mode::Mixed && st.objective < opts.zero_tol) {
      diag.reason = StopReason::ZeroReached;
      break;
    }
    if (stationarity_residual(pb, st) <= opts.tol_stat) {
      diag.reason = StopReason::Stationary;
      break;
    }
    const double before = st.objective;
    if (euler_step(pb, st, opts) == StepResult::Underflow) {
      diag.reason = StopReason::StepUnderflow;
      break;
    }
    if (opts.record_trace) diag.trace.push_back(st.objective);
    stall = std::abs(st.objective - before) < opts.tol_obj * st.objective ? stall + 1 : 0;
    if (stall >= opts.n_stall) {
      diag.reason = StopReason::Stalled;
      break;
    }
  }
  diag.accepted_steps = st.accepted_steps;
  diag.rejected_steps = st.rejected_steps;
  diag.stationarity = stationarity_residual(pb, st);
  res.diagnostics = std::move(diag);
  return res;
}

}  // namespace mulb
