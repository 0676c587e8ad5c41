#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace mulb {

struct SelftestRow {
  std::string name;
  double value = 0.0;      // computed bound (or property error)
  double reference = 0.0;  // reference bound (or 0 for properties)
  double error = 0.0;      // what the tolerance is compared against
  double tolerance = 0.0;
  bool passed = false;
  std::string detail;
};

struct SelftestOptions {
  std::uint64_t seed = 1;
  // Directory with <fixture>.json files; when set, matrices are loaded from
  // there instead of the embedded copies.
  std::optional<std::string> fixture_dir;
  bool properties = true;
};

std::vector<SelftestRow> run_selftest(const SelftestOptions& opts = {});

void print_selftest(std::ostream& out, const std::vector<SelftestRow>& rows);

}  // namespace mulb
