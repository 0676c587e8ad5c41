#pragma once

#include <vector>

#include "mulb/types.hpp"

namespace mulb {

struct EigenPair {
  cplx value;
  CVector x;  // right, unit norm
  CVector y;  // left (y^* A = value y^*), unit norm
};

// Target eigenvalue with a consistently phased eigenvector pair.
// For target_largest, value = lambda. For target_closest_to_one, value = 1 - lambda
// and lambda holds the eigenvalue of the input matrix.
struct EigenTriple {
  cplx value;
  cplx lambda;
  CVector x;
  CVector y;
  double s = 0.0;    // e^{i arg(value)} y^* x, real and positive
  double gap = 0.0;  // distance from lambda to the rest of the spectrum
  bool zero_target = false;
};

// Full spectrum with paired left/right eigenvectors from a single
// factorization. Throws SolverFailure if LAPACK does not converge.
std::vector<EigenPair> eig_all(const CMatrix& a);

// Largest-modulus eigenvalue. Ties in modulus go to the larger real part,
// then the larger imaginary part. Throws NonSimpleTarget when the chosen
// eigenvalue is within 1e-10 * ||A|| of another one.
EigenTriple target_largest(const CMatrix& a);

// Nonzero eigenvalue of A closest to 1, returned as zeta = 1 - lambda. Ties
// go to the smaller |lambda|, then lexicographically. Zero eigenvalues are
// targeted only when A has no other (e.g. A = 0); then gap = 0 and no error.
EigenTriple target_closest_to_one(const CMatrix& a, double zero_tol = 1e-14);

// lambda' = y^* C1 x / (y^* x). Throws DegeneratePair if |y^* x| < 1e-14.
cplx eig_derivative(const EigenTriple& eig, const CMatrix& c1);

// Eigenvalues only (no eigenvectors).
CVector eigenvalues(const CMatrix& a);

// Spectral norm (largest singular value).
double spectral_norm(const CMatrix& a);

// Spectral radius.
double spectral_radius(const CMatrix& a);

}  // namespace mulb
