#pragma once

#include <string>

#include <json.hpp>

#include "mulb/oracle.hpp"
#include "mulb/outer.hpp"

namespace mulb {

using json = nlohmann::json;

// {"n": <int>, "re": [[...]], "im": [[...]]}, row-major; "im" optional.
CMatrix matrix_from_json(const json& j);
json matrix_to_json(const CMatrix& m);

json complex_to_json(cplx c);
cplx complex_from_json(const json& j);

// {"structure": "<dsl>", "blocks": [...]} with one object per block:
//   {"kind": "cs", "dim": r, "value": {"re", "im"}}
//   {"kind": "rs", "dim": r, "value": x}
//   {"kind": "cf", "dim": m, "sigma", "p", "q", "dense"}  (rank one)
//   {"kind": "cf", "dim": m, "dense": {"re", "im"}}         (dense)
json perturbation_to_json(const Perturbation& d, const BlockStructure& s);
Perturbation perturbation_from_json(const json& j, const BlockStructure& s);

json certificate_to_json(const Certificate& c, const BlockStructure& s);
json report_to_json(const VerificationReport& r);

json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const json& j);

}  // namespace mulb
