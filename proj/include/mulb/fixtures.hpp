#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mulb/block_structure.hpp"

namespace mulb {

// Reference problems with published reference values.
struct Fixture {
  std::string name;
  CMatrix m;
  BlockStructure s;
  double reference_bound = 0.0;
  double reference_eps = 0.0;
  std::optional<double> eps0;            // starting level used for the reference run
  std::vector<double> eps_trajectory;    // outer iterates of the reference run
  std::vector<double> residual_trajectory;
  std::optional<Perturbation> extremizer;  // reference (eps, Delta) pair
  std::optional<Perturbation> suboptimal;  // a weaker perturbation at suboptimal_eps
  double suboptimal_eps = 0.0;
};

Fixture fixture_motivating();    // 3x3, rs:2,cf:1
Fixture fixture_complex_five();  // 5x5, cs:1,cs:1,cf:2,cs:1
Fixture fixture_mixed_five();    // 5x5, rs:1,rs:1,cs:1,cs:2
Fixture fixture_newton_five();   // 5x5, rs:3,cf:2
Fixture fixture_real_ten();      // 10x10 real, rs:1,rs:1,cs:1,cs:2,cf:5
Fixture fixture_warm_ten();      // 10x10, cf:2,rs:4,rs:4

std::vector<Fixture> all_fixtures();
std::optional<Fixture> find_fixture(const std::string& name);

}  // namespace mulb
