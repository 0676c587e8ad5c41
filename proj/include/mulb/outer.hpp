#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mulb/inner_flow.hpp"

namespace mulb {

struct OuterConfig {
  double tol = 1e-9;  // relative to eps
  std::optional<double> eps0;
  std::optional<int> i_max;  // number of eigenvector starts; auto when empty
  int max_outer = 50;
  std::optional<Perturbation> initial_delta;  // user start, added to the eigenvector starts
  bool eigen_starts = true;                   // false: only the user start is used
  bool real_sign_starts = false;  // mixed mode: also run each eigenvector start with real blocks negated
  double zero_threshold = 1e-12;              // mixed mode: |zeta| at or below this is singular
  double verify_threshold = 1e-6;
  bool parallel = true;
  std::uint64_t seed = 0x5eed;  // only used to perturb restarts after a non-simple target
  FlowOptions flow;
};

enum class StepKind { Initial, Newton, Bisection };
const char* to_string(StepKind k);

struct HistoryEntry {
  double eps;
  double objective;  // |lambda| (complex) or |zeta| (mixed)
  StepKind kind;     // how eps was produced
};

struct StartReport {
  std::string label;
  double objective = 0.0;
  StopReason reason = StopReason::MaxSteps;
  bool failed = false;
  std::string error;
};

struct Certificate {
  Mode mode = Mode::Complex;
  double eps_f = 0.0;
  Perturbation delta_star;
  double lower_bound = 0.0;
  double residual = 0.0;
  bool verified = false;
  std::vector<HistoryEntry> history;
  std::vector<StartReport> starts;
  std::vector<std::string> notes;
  int inner_steps = 0;
};

// i_max = max(n/5, 5) for n >= 5, n otherwise.
int auto_i_max(int n);

// D * P_B(y x^*) for the eigenvector pair of the eig_index-th largest
// eigenvalue of M (0-based), x and y phased so that e^{-i arg lambda} y^* x > 0.
// Vanishing blocks fall back to a unit phase / e1 e1^* with a note.
Perturbation initial_perturbation(const CMatrix& m, const BlockStructure& s, int eig_index,
                                  std::vector<std::string>* notes = nullptr);

// min over the m largest eigenvalues of |y^* x| / (2 |lambda| ||P_B(y x^*)||_F);
// 1/||M||_2 when every candidate is degenerate.
double initial_epsilon(const CMatrix& m, const BlockStructure& s, int count);

// d|lambda|/d eps at a stationary point, z = M^* y.
double derivative_complex(const BlockStructure& s, const EigenTriple& eig, const CVector& z);

// d|zeta|/d eps at a stationary point (negative).
double derivative_mixed(const BlockStructure& s, const EigenTriple& eig, const CVector& z);

double newton_update(double eps, double objective, double derivative, Mode mode);

Certificate compute_lower_bound(const CMatrix& m, const BlockStructure& s,
                                const OuterConfig& cfg = {});

}  // namespace mulb
