#pragma once

#include <random>

#include "mulb/block_structure.hpp"
#include "mulb/eigen_core.hpp"

namespace mulb::test {

inline CMatrix random_matrix(int n, std::mt19937_64& rng, bool real = false) {
  std::normal_distribution<double> g;
  CMatrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = cplx(g(rng), real ? 0.0 : g(rng));
  return m;
}

inline CVector random_vector(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  CVector v(n);
  for (int i = 0; i < n; ++i) v(i) = cplx(g(rng), g(rng));
  return v;
}

// Max deviation of a perturbation from the unit manifold (real scalars: distance
// outside [-1, 1]).
inline double manifold_error(const Perturbation& d) {
  double e = 0.0;
  for (const auto& v : d.blocks) {
    if (auto* r = std::get_if<RealScalarBlock>(&v))
      e = std::max(e, std::max(0.0, std::abs(r->delta) - 1.0));
    else if (auto* r1 = std::get_if<RankOneBlock>(&v))
      e = std::max({e, std::abs(std::abs(r1->sigma) - 1.0), std::abs(r1->p.norm() - 1.0),
                    std::abs(r1->q.norm() - 1.0)});
    else
      e = std::max(e, std::abs(block_magnitude(v) - 1.0));
  }
  return e;
}

}  // namespace mulb::test
