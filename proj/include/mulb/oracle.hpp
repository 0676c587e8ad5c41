#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mulb/block_structure.hpp"

namespace mulb {

struct VerificationReport {
  double singularity_residual = 1.0;  // min |eig(I - eps M Delta)|
  bool admissible = false;
  double delta_norm = 0.0;            // ||Delta||_2
  double threshold = 1e-6;
  bool verified = false;
  std::optional<double> sampled_best_eps;
  std::vector<std::string> notes;
};

VerificationReport verify_certificate(const CMatrix& m, const BlockStructure& s, double eps,
                                      const Perturbation& delta, double threshold = 1e-6);

struct SampleResult {
  double best_eps;  // +inf when no sampled ray reaches singularity
  std::optional<Perturbation> best_delta;
  int hits = 0;
};

// Random search over the unit ball of the structure. Complex-only structures
// use eps = 1/rho(M Delta); otherwise only real positive eigenvalues of M Delta
// (|Im(1/lambda)| <= 1e-8) give a singular ray.
SampleResult sample_lower_bound(const CMatrix& m, const BlockStructure& s, int trials,
                                std::uint64_t seed, bool parallel = true);

// Central difference with h = 1e-6 max(1, eps); returns the relative error
// |fd - analytic| / max(1, |analytic|).
double fd_check_derivative(const std::function<double(double)>& f, double eps, double analytic);

// Exhaustive boundary grid for structures with at most two scalar
// parameters and no full blocks. Returns the best 1/eps found (0 if the grid
// never reaches singularity). Throws TooManyParameters otherwise.
double grid_mu_tiny(const CMatrix& m, const BlockStructure& s, int points = 1000);

}  // namespace mulb
