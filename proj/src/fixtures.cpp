#include "mulb/fixtures.hpp"

#include <cmath>

namespace mulb {

namespace {

const cplx I(0.0, 1.0);

CMatrix rows(int n, std::initializer_list<cplx> v) {
  CMatrix m(n, n);
  auto it = v.begin();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = *it++;
  return m;
}

CVector vec(std::initializer_list<cplx> v) {
  CVector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (const cplx& c : v) out(k++) = c;
  return out;
}

BlockValue rank_one(const CVector& u, const CVector& v) {
  const double nu = u.norm(), nv = v.norm();
  return RankOneBlock{cplx(nu * nv), u / nu, v / nv};
}

}  // namespace

Fixture fixture_motivating() {
  Fixture f;
  f.name = "motivating";
  f.m = rows(3, {-1.0 + I, 1.0 - I, -1.0 + I,
                 -1.0 + I, -1.0, I,
                 I, -1.0 - I, 1.0 - I});
  f.s = parse_structure("rs:2,cf:1");
  f.reference_bound = 2.2459865301;
  f.reference_eps = 0.445238645;
  f.extremizer = Perturbation{{RealScalarBlock{-1.0},
                               DenseBlock{CMatrix::Constant(1, 1, cplx(-0.989237164, -0.146320991))}}};
  f.suboptimal = Perturbation{{RealScalarBlock{-0.368473881},
                               DenseBlock{CMatrix::Constant(1, 1, cplx(-0.673755352, -0.738954481))}}};
  f.suboptimal_eps = 1.019727084;
  return f;
}

Fixture fixture_complex_five() {
  Fixture f;
  f.name = "complex_five";
  f.m = rows(5, {-0.10 - 0.55 * I, -0.57 - 1.59 * I, -1.34 - 1.70 * I, 0.04 + 0.49 * I, -0.18 + 0.19 * I,
                 -1.48 - 2.17 * I, 0.58 + 1.17 * I, 0.05 + 0.53 * I, 0.11 - 0.42 * I, 0.26 + 1.19 * I,
                 -0.53 + 0.59 * I, 0.78 - 1.48 * I, 0.15, -0.25 + 1.46 * I, 0.33 + 1.32 * I,
                 0.24 + 0.79 * I, -0.12 - 0.65 * I, 1.79 - 0.09 * I, -0.63 + 1.39 * I, -0.88 + 0.10 * I,
                 -2.03 + 1.33 * I, -1.22 - 0.22 * I, 0.45 - 1.49 * I, 0.94 - 0.13 * I, -1.02 + 2.33 * I});
  f.s = parse_structure("cs:1,cs:1,cf:2,cs:1");
  f.reference_bound = 4.484405922;
  f.reference_eps = 0.222994978;
  f.extremizer = Perturbation{{
      ComplexScalarBlock{std::polar(1.0, -2.49033999)},
      ComplexScalarBlock{std::polar(1.0, 1.24640446)},
      rank_one(vec({0.15703326 + 0.85130227 * I, 0.29626531 - 0.40354908 * I}),
               vec({0.68793173, 0.28357426 + 0.66808351 * I})),
      ComplexScalarBlock{std::polar(1.0, -1.72494213)}}};
  f.suboptimal = Perturbation{{
      ComplexScalarBlock{std::polar(1.0, -0.48650737)},
      ComplexScalarBlock{std::polar(1.0, -1.49644308)},
      rank_one(vec({0.41899793 + 0.68039781 * I, 0.06834008 - 0.59735180 * I}),
               vec({0.52696073, 0.70477030 + 0.47498548 * I})),
      ComplexScalarBlock{std::polar(1.0, -2.155849308)}}};
  f.suboptimal_eps = 0.228726413;
  return f;
}

Fixture fixture_mixed_five() {
  Fixture f;
  f.name = "mixed_five";
  f.m = rows(5, {-1.54 - 1.28 * I, -0.56 + 0.57 * I, -0.03 - 0.63 * I, -0.64 - 0.55 * I, 0.46 - 0.22 * I,
                 -1.08 + 1.91 * I, 1.16 - 0.08 * I, -0.41 - 0.13 * I, 0.04 - 0.06 * I, -0.01 - 0.71 * I,
                 0.11 - 2.16 * I, 0.53 + 0.79 * I, -0.33 + 0.26 * I, 0.44 + 0.02 * I, 0.20 + 0.96 * I,
                 0.52 + 0.29 * I, 2.38 + 0.09 * I, -0.03 + 0.06 * I, 0.01 + 1.12 * I, 0.51 - 0.77 * I,
                 -1.30 + 0.34 * I, -1.72 + 0.14 * I, 1.02 + 1.34 * I, 0.35 - 0.75 * I, 0.48 + 0.04 * I});
  f.s = parse_structure("rs:1,rs:1,cs:1,cs:2");
  f.reference_bound = 3.300239739;
  f.reference_eps = 0.30300829;
  f.extremizer = Perturbation{{RealScalarBlock{-1.0}, RealScalarBlock{1.0},
                               ComplexScalarBlock{std::polar(1.0, -0.91357833)},
                               ComplexScalarBlock{std::polar(1.0, -2.076961991)}}};
  return f;
}

Fixture fixture_newton_five() {
  Fixture f;
  f.name = "newton_five";
  const double h = 0.5;
  f.m = rows(5, {I, h - h * I, 1.0, 1.0, h,
                 h, -h, I, I, h - h * I,
                 I, 1.0 - h * I, 1.0, h, 0.0,
                 -h, h + I, -h + h * I, 1.0 + h * I, h - h * I,
                 h + I, h + h * I, 0.0, -h - h * I, h - h * I});
  f.s = parse_structure("rs:3,cf:2");
  f.reference_bound = 2.101113160408110;
  f.reference_eps = 0.475938192594;
  f.eps0 = 0.321154624817;
  f.eps_trajectory = {0.321154624817, 0.475935094375, 0.475938192593, 0.475938192594};
  f.residual_trajectory = {0.325206140643, 6.509334991219e-6, 2.803806976489e-12,
                           1.037255102712e-16};
  CMatrix full(2, 2);
  full << cplx(0.8414902738, -0.0310321080), cplx(-0.0774400898, 0.4310267415),
      cplx(0.2196113059, 0.1726644616), cplx(-0.1120620799, 0.0924665133);
  // The real block sign is the one that makes I - eps M Delta singular.
  f.extremizer = Perturbation{{RealScalarBlock{-1.0}, DenseBlock{full}}};
  CMatrix weak(2, 2);
  weak << cplx(-0.661871043, -0.048777846), cplx(0.114656146, -0.401316361),
      cplx(-0.325067916, 0.037935543), cplx(0.018201081, -0.205013390);
  f.suboptimal = Perturbation{{RealScalarBlock{1.0}, DenseBlock{weak}}};
  f.suboptimal_eps = 0.546726635;
  return f;
}

Fixture fixture_real_ten() {
  Fixture f;
  f.name = "real_ten";
  f.m = rows(10, {
      -0.43, 0.90, -0.61, 1.03, 0.98, 2.00, 0.05, 0.14, 0.86, 0.02,
      -0.17, -1.84, -1.22, -0.35, -0.30, 0.95, 1.75, -1.64, 0.11, -0.05,
      -0.22, 0.07, 0.32, 1.01, 1.14, -0.43, 0.16, -0.76, 0.40, 1.70,
      0.54, 0.04, -1.34, 0.63, -0.53, 0.65, -1.24, -0.82, 0.88, -0.51,
      0.39, 2.23, -1.03, -0.21, 0.97, -0.36, -2.19, 0.52, 0.18, 0.00,
      0.75, -0.07, 1.33, -0.87, -0.52, 0.71, -0.33, -0.01, 0.55, 0.92,
      1.78, -0.51, -0.42, -1.04, 0.18, 1.42, 0.71, -1.16, 0.68, 0.15,
      1.22, 0.24, -0.14, -0.27, 0.97, -1.60, 0.32, -0.01, 1.17, 1.40,
      -1.28, 0.25, 0.90, -0.44, -0.41, 1.03, 0.41, -0.69, 0.48, 1.03,
      -2.33, 0.07, -0.30, -0.41, -0.44, 1.46, -0.58, -0.67, 1.41, 0.29});
  f.s = parse_structure("rs:1,rs:1,cs:1,cs:2,cf:5");
  f.reference_bound = 4.38636196596;
  f.reference_eps = 0.227979361429;
  f.eps0 = 0.201123467713;
  f.eps_trajectory = {0.201123467713, 0.227979361395, 0.227979361429};
  f.residual_trajectory = {0.117799670760, 1.519798379258e-10, 3.812788529246e-16};
  f.extremizer = Perturbation{{RealScalarBlock{-1.0}, RealScalarBlock{1.0},
                               ComplexScalarBlock{-1.0}, ComplexScalarBlock{-1.0},
                               rank_one(vec({0.85457765, -0.04668806, -0.28462457, 0.41144779, 0.13121292}),
                                        vec({0.15895464, 0.22255005, -0.28570067, 0.49433879, 0.77408603}))}};
  f.suboptimal = Perturbation{{RealScalarBlock{-1.0}, RealScalarBlock{-1.0},
                               ComplexScalarBlock{-1.0}, ComplexScalarBlock{1.0},
                               rank_one(vec({0.93916167, 0.06094908, -0.22409849, 0.25285464, -0.01024501}),
                                        vec({0.21233474, 0.27182946, -0.57210258, 0.41515717, 0.61754828}))}};
  f.suboptimal_eps = 0.23674574;
  return f;
}

Fixture fixture_warm_ten() {
  Fixture f;
  f.name = "warm_ten";
  f.m = rows(10, {
      -1.0 + I, 0.0, -1.0 - 2.0 * I, -1.0, 1.0, -2.0 * I, 1.0 + I, 1.0, 0.0, 2.0 - I,
      I, 1.0, 1.0, 1.0, -1.0 + I, 1.0 + I, -1.0 + I, 1.0, -I, 2.0,
      I, 0.0, 0.0, I, 0.0, -2.0 * I, -1.0 + I, -1.0 + I, -1.0 - I, -2.0 - I,
      I, -4.0, 0.0, 1.0, 1.0, -1.0 + I, -1.0 + 2.0 * I, -I, 2.0 * I, 3.0 - I,
      0.0, -I, -1.0 + I, 2.0 * I, -1.0 + 2.0 * I, -2.0 + 2.0 * I, 1.0 + I, 2.0 - I, 1.0 + I, 1.0 - I,
      -2.0, -I, 1.0 + I, -1.0 - I, -I, -2.0 * I, -I, -1.0 - I, -1.0 - I, 0.0,
      1.0, 1.0 - I, 1.0 - I, 0.0, -1.0 - I, -1.0, 0.0, 1.0, -I, 2.0 * I,
      -1.0, 2.0 * I, -2.0 + I, 1.0, 1.0 - I, 1.0, 0.0, 1.0 + I, -2.0 * I, 1.0 - I,
      -1.0 - 2.0 * I, -I, -1.0 + I, -1.0 - 2.0 * I, I, 0.0, -1.0 - I, 0.0, 1.0, I,
      -2.0 * I, 0.0, 1.0 + I, -1.0 + I, -I, 0.0, I, -2.0 - I, 0.0, I});
  f.s = parse_structure("cf:2,rs:4,rs:4");
  f.reference_bound = 4.259161456;
  f.reference_eps = 0.23478601;
  f.eps0 = 0.23;
  CMatrix star(2, 2);
  star << cplx(0.44211256, -0.19582232), cplx(0.38904261, -0.75366740),
      cplx(0.04777399, -0.09593068), cplx(-0.04015431, -0.18364087);
  f.extremizer = Perturbation{{DenseBlock{star}, RealScalarBlock{-1.0}, RealScalarBlock{-1.0}}};
  CMatrix hat(2, 2);
  hat << cplx(0.01622800, -0.44875053), cplx(0.33074886, -0.68259094),
      cplx(-0.10388720, -0.21700229), cplx(-0.01277064, -0.40618809);
  f.suboptimal = Perturbation{{DenseBlock{hat}, RealScalarBlock{0.37144260},
                               RealScalarBlock{-0.25823740}}};
  f.suboptimal_eps = 1.0 / 1.87690862;
  return f;
}

std::vector<Fixture> all_fixtures() {
  return {fixture_motivating(), fixture_complex_five(), fixture_mixed_five(),
          fixture_newton_five(), fixture_real_ten(), fixture_warm_ten()};
}

std::optional<Fixture> find_fixture(const std::string& name) {
  for (auto& f : all_fixtures())
    if (f.name == name) return f;
  return std::nullopt;
}

}  // namespace mulb
