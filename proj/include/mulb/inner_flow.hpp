#pragma once

#include <string>
#include <variant>
#include <vector>

#include "mulb/block_structure.hpp"
#include "mulb/eigen_core.hpp"

namespace mulb {

// Complex: maximize |lambda(eps M Delta)|. Mixed: minimize |1 - lambda|.
enum class Mode { Complex, Mixed };

Mode mode_for(const BlockStructure& s);
const char* to_string(Mode m);

enum class FullBlockForm { RankOne, Dense };

struct FlowOptions {
  double h0 = 0.1;
  double h_max = 1.0;
  double h_min = 1e-14;
  double tol_stat = 1e-8;
  double tol_obj = 1e-10;  // relative to the objective
  int n_stall = 5;
  int max_steps = 10000;
  double sigma_min = 1e-8;
  double zero_tol = 1e-14;  // mixed mode: |zeta| below this is a terminal state
  FullBlockForm full_form = FullBlockForm::RankOne;
  bool record_trace = false;
};

struct RankOneDirection {
  cplx sigma_dot;
  CVector p_dot;
  CVector q_dot;
};

using BlockDirection = std::variant<cplx, double, RankOneDirection, CMatrix>;

struct GradientDirection {
  std::vector<BlockDirection> blocks;
  // Unnormalized magnitude of each block direction; the normalizer applied
  // is 1/magnitude (or 1 when the direction vanishes).
  std::vector<double> magnitudes;
};

enum class Normalization { Unit, None };

// Steepest ascent direction of Re(z^* Z x) on the tangent space of the unit
// manifold. Rank-one full blocks get the factored right-hand side.
GradientDirection gradient_complex(const BlockStructure& s, const Perturbation& delta,
                                   const CVector& x, const CVector& z,
                                   Normalization norm = Normalization::Unit);

// As gradient_complex, with real scalars moving at unit speed toward the
// sign of Re(z_l^* x_l) and frozen when saturated against that sign.
GradientDirection gradient_mixed(const BlockStructure& s, const Perturbation& delta,
                                 const CVector& x, const CVector& z,
                                 Normalization norm = Normalization::Unit);

// Factored dynamics of sigma p q^* with alpha = p^* z, beta = q^* x.
// Throws SigmaUnderflow when |sigma| < sigma_min.
RankOneDirection rhs_rank1(cplx sigma, const CVector& p, const CVector& q, const CVector& x,
                           const CVector& z, double sigma_min = 1e-8);

struct FlowState {
  double eps = 0.0;
  Perturbation delta;
  EigenTriple eig;
  CVector z;
  double h = 0.1;
  int accepted_steps = 0;
  int rejected_steps = 0;
  double objective = 0.0;
};

struct FlowProblem {
  const CMatrix& m;
  const BlockStructure& s;
  Mode mode;
};

// Target eigen data of eps M Delta for the mode.
EigenTriple evaluate_target(const FlowProblem& pb, double eps, const Perturbation& delta,
                            double zero_tol = 1e-14);

// Fills eig, z and objective for the state's (eps, delta).
FlowState make_state(const FlowProblem& pb, double eps, Perturbation delta,
                     const FlowOptions& opts = {});

// Delta + h * dir followed by renormalization onto the unit manifold.
Perturbation advance(const Perturbation& delta, const GradientDirection& dir, double h);

enum class StepResult { Accepted, Underflow };

// One accepted forward Euler step, halving h on every rejection. Returns
// Underflow (state untouched apart from h and counters) when h drops below
// h_min.
StepResult euler_step(const FlowProblem& pb, FlowState& state, const FlowOptions& opts);

// || Delta - D P_B(z x^*) ||_F over complex blocks plus the relative
// Re(z_l^* x_l) violation of real blocks that are free to move.
double stationarity_residual(const FlowProblem& pb, const FlowState& state);

enum class StopReason { Stationary, Stalled, StepUnderflow, MaxSteps, ZeroReached };
const char* to_string(StopReason r);

struct FlowDiagnostics {
  StopReason reason = StopReason::MaxSteps;
  int accepted_steps = 0;
  int rejected_steps = 0;
  double stationarity = 0.0;
  std::vector<double> trace;  // objective after each accepted step
  std::vector<int> dense_fallback_blocks;
};

struct FlowResult {
  FlowState state;
  FlowDiagnostics diagnostics;
};

FlowResult integrate_to_stationary(const CMatrix& m, const BlockStructure& s, double eps,
                                   const Perturbation& delta0, Mode mode,
                                   const FlowOptions& opts = {});

}  // namespace mulb
