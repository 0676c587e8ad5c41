#include "mulb/eigen_core.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

namespace mulb {

namespace {

constexpr double kSimpleTol = 1e-10;

double scale_of(const CMatrix& a) { return std::max(a.norm(), 1e-300); }

double gap_of(const std::vector<EigenPair>& all, std::size_t k) {
  double g = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < all.size(); ++j)
    if (j != k) g = std::min(g, std::abs(all[j].value - all[k].value));
  return all.size() == 1 ? 0.0 : g;
}

// Rotates y so that e^{i theta} y^* x is real positive, theta = arg(target).
EigenTriple make_triple(const EigenPair& p, cplx target) {
  EigenTriple t;
  t.value = target;
  t.lambda = p.value;
  t.x = p.x;
  t.y = p.y;
  const double theta = std::arg(target);
  const cplx c = std::polar(1.0, theta) * t.y.dot(t.x);  // dot = y^* x
  if (std::abs(c) > 0.0) t.y *= std::polar(1.0, std::arg(c));
  t.s = (std::polar(1.0, theta) * t.y.dot(t.x)).real();
  return t;
}

}  // namespace

std::vector<EigenPair> eig_all(const CMatrix& a) {
  if (a.rows() != a.cols())
    throw Error(ErrorCode::DimensionMismatch, "eigenproblem needs a square matrix");
  const lapack_int n = static_cast<lapack_int>(a.rows());
  if (!a.allFinite()) throw Error(ErrorCode::InvalidArgument, "matrix has non-finite entries");
  CMatrix work = a;
  CVector w(n);
  CMatrix vl(n, n), vr(n, n);
  const lapack_int info = LAPACKE_zgeev(LAPACK_COL_MAJOR, 'V', 'V', n, work.data(), n,
                                        w.data(), vl.data(), n, vr.data(), n);
  if (info != 0)
    throw Error(ErrorCode::SolverFailure, "zgeev failed with info = " + std::to_string(info));
  std::vector<EigenPair> out(n);
  for (lapack_int k = 0; k < n; ++k) {
    out[k].value = w(k);
    out[k].x = vr.col(k).normalized();
    out[k].y = vl.col(k).normalized();
  }
  return out;
}

EigenTriple target_largest(const CMatrix& a) {
  const auto all = eig_all(a);
  std::size_t best = 0;
  for (std::size_t k = 1; k < all.size(); ++k) {
    const cplx u = all[k].value, v = all[best].value;
    const double du = std::abs(u), dv = std::abs(v);
    const double tie = 1e-14 * std::max(1.0, dv);
    if (du > dv + tie) best = k;
    else if (std::abs(du - dv) <= tie) {
      if (u.real() > v.real() + tie || (std::abs(u.real() - v.real()) <= tie && u.imag() > v.imag()))
        best = k;
    }
  }
  const double gap = gap_of(all, best);
  if (all.size() > 1 && gap < kSimpleTol * scale_of(a) && std::abs(all[best].value) > 0.0)
    throw Error(ErrorCode::NonSimpleTarget, "largest eigenvalue is not simple");
  EigenTriple t = make_triple(all[best], all[best].value);
  t.gap = gap;
  return t;
}

EigenTriple target_closest_to_one(const CMatrix& a, double zero_tol) {
  const auto all = eig_all(a);
  auto before = [](cplx u, cplx v) {
    const double du = std::abs(1.0 - u), dv = std::abs(1.0 - v);
    const double tie = 1e-14;
    if (du < dv - tie) return true;
    if (du > dv + tie) return false;
    if (std::abs(std::abs(u) - std::abs(v)) > tie) return std::abs(u) < std::abs(v);
    if (std::abs(u.real() - v.real()) > tie) return u.real() < v.real();
    return u.imag() < v.imag();
  };
  const double scale = scale_of(a);
  // Zero eigenvalues of a rank-deficient A cannot be moved toward 1, so they
  // are only targeted when nothing else is left.
  auto nonzero = [&](std::size_t k) { return std::abs(all[k].value) > kSimpleTol * scale; };
  std::size_t best = all.size();
  for (std::size_t k = 0; k < all.size(); ++k)
    if (nonzero(k) && (best == all.size() || before(all[k].value, all[best].value))) best = k;
  if (best == all.size()) {
    best = 0;
    for (std::size_t k = 1; k < all.size(); ++k)
      if (before(all[k].value, all[best].value)) best = k;
  }
  double gap = gap_of(all, best);
  const bool zero_lambda = std::abs(all[best].value) <= kSimpleTol * scale;
  if (zero_lambda) gap = 0.0;
  else if (all.size() > 1 && gap < kSimpleTol * scale)
    throw Error(ErrorCode::NonSimpleTarget, "eigenvalue closest to 1 is not simple");
  EigenTriple t = make_triple(all[best], 1.0 - all[best].value);
  t.gap = gap;
  t.zero_target = std::abs(t.value) < zero_tol;
  return t;
}

cplx eig_derivative(const EigenTriple& eig, const CMatrix& c1) {
  const cplx yx = eig.y.dot(eig.x);
  if (std::abs(yx) < 1e-14)
    throw Error(ErrorCode::DegeneratePair, "left and right eigenvectors are orthogonal");
  return eig.y.dot(c1 * eig.x) / yx;
}

CVector eigenvalues(const CMatrix& a) {
  if (a.rows() != a.cols())
    throw Error(ErrorCode::DimensionMismatch, "eigenproblem needs a square matrix");
  const lapack_int n = static_cast<lapack_int>(a.rows());
  if (n <= 3) {
    Eigen::ComplexEigenSolver<CMatrix> es(a, false);
    if (es.info() != Eigen::Success) throw Error(ErrorCode::SolverFailure, "eigensolver failed");
    return es.eigenvalues();
  }
  CMatrix work = a;
  CVector w(n);
  const lapack_int info = LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'N', n, work.data(), n,
                                        w.data(), nullptr, 1, nullptr, 1);
  if (info != 0)
    throw Error(ErrorCode::SolverFailure, "zgeev failed with info = " + std::to_string(info));
  return w;
}

double spectral_norm(const CMatrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMatrix> svd(a);
  return svd.singularValues()(0);
}

double spectral_radius(const CMatrix& a) {
  double r = 0.0;
  const CVector w = eigenvalues(a);
  for (Eigen::Index k = 0; k < w.size(); ++k) r = std::max(r, std::abs(w(k)));
  return r;
}

}  // namespace mulb
