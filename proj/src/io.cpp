#include "mulb/io.hpp"

#include <fstream>

namespace mulb {

namespace {

Error schema(const std::string& what) {
  return Error(ErrorCode::InvalidArgument, "JSON schema: " + what);
}

json real_rows(const CMatrix& m, bool imag) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(imag ? m(i, j).imag() : m(i, j).real());
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const CVector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(complex_to_json(v(i)));
  return out;
}

CVector vector_from_json(const json& j, int dim) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim)
    throw schema("expected a complex vector of length " + std::to_string(dim));
  CVector v(dim);
  for (int i = 0; i < dim; ++i) v(i) = complex_from_json(j[i]);
  return v;
}

const char* kind_tag(BlockKind k) {
  switch (k) {
    case BlockKind::ComplexScalar: return "cs";
    case BlockKind::RealScalar: return "rs";
    case BlockKind::ComplexFull: return "cf";
  }
  return "?";
}

}  // namespace

CMatrix matrix_from_json(const json& j) {
  if (!j.is_object() || !j.contains("n") || !j.contains("re")) throw schema("matrix needs n and re");
  const int n = j.at("n").get<int>();
  if (n < 1) throw schema("n must be positive");
  auto read = [&](const json& rows, bool imag, CMatrix& m) {
    if (!rows.is_array() || static_cast<int>(rows.size()) != n)
      throw schema(std::string(imag ? "im" : "re") + " must have n rows");
    for (int i = 0; i < n; ++i) {
      const json& row = rows[i];
      if (!row.is_array() || static_cast<int>(row.size()) != n)
        throw schema("row " + std::to_string(i) + " must have n entries");
      for (int k = 0; k < n; ++k) {
        if (!row[k].is_number()) throw schema("matrix entries must be numbers");
        const double v = row[k].get<double>();
        if (imag) m(i, k).imag(v);
        else m(i, k).real(v);
      }
    }
  };
  CMatrix m = CMatrix::Zero(n, n);
  read(j.at("re"), false, m);
  if (j.contains("im")) read(j.at("im"), true, m);
  return m;
}

json matrix_to_json(const CMatrix& m) {
  return json{{"n", m.rows()}, {"re", real_rows(m, false)}, {"im", real_rows(m, true)}};
}

json complex_to_json(cplx c) { return json{{"re", c.real()}, {"im", c.imag()}}; }

cplx complex_from_json(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_object() || !j.contains("re")) throw schema("complex value needs re");
  return {j.at("re").get<double>(), j.value("im", 0.0)};
}

json perturbation_to_json(const Perturbation& d, const BlockStructure& s) {
  check_conforms(d, s);
  json blocks = json::array();
  for (std::size_t k = 0; k < s.size(); ++k) {
    json b{{"kind", kind_tag(s[k].kind)}, {"dim", s[k].dim}};
    const BlockValue& v = d.blocks[k];
    if (auto* c = std::get_if<ComplexScalarBlock>(&v)) {
      b["value"] = complex_to_json(c->delta);
    } else if (auto* r = std::get_if<RealScalarBlock>(&v)) {
      b["value"] = r->delta;
    } else {
      if (auto* r1 = std::get_if<RankOneBlock>(&v)) {
        b["sigma"] = complex_to_json(r1->sigma);
        b["p"] = vector_to_json(r1->p);
        b["q"] = vector_to_json(r1->q);
      }
      const CMatrix dense = full_block_matrix(v);
      b["dense"] = json{{"re", real_rows(dense, false)}, {"im", real_rows(dense, true)}};
    }
    blocks.push_back(std::move(b));
  }
  return json{{"structure", s.to_string()}, {"blocks", std::move(blocks)}};
}

Perturbation perturbation_from_json(const json& j, const BlockStructure& s) {
  const json& blocks = j.is_object() ? j.at("blocks") : j;
  if (!blocks.is_array() || blocks.size() != s.size())
    throw Error(ErrorCode::DimensionMismatch,
                "perturbation has " + std::to_string(blocks.is_array() ? blocks.size() : 0) +
                    " blocks, structure " + s.to_string() + " has " + std::to_string(s.size()));
  Perturbation d;
  for (std::size_t k = 0; k < s.size(); ++k) {
    const json& b = blocks[k];
    if (b.contains("kind") && b.at("kind").get<std::string>() != kind_tag(s[k].kind))
      throw Error(ErrorCode::DimensionMismatch, "block " + std::to_string(k) + " kind differs from structure");
    if (b.contains("dim") && b.at("dim").get<int>() != s[k].dim)
      throw Error(ErrorCode::DimensionMismatch, "block " + std::to_string(k) + " dim differs from structure");
    const int dim = s[k].dim;
    switch (s[k].kind) {
      case BlockKind::ComplexScalar:
        d.blocks.emplace_back(ComplexScalarBlock{complex_from_json(b.at("value"))});
        break;
      case BlockKind::RealScalar: {
        const json& v = b.at("value");
        d.blocks.emplace_back(RealScalarBlock{v.is_number() ? v.get<double>() : complex_from_json(v).real()});
        break;
      }
      case BlockKind::ComplexFull:
        if (b.contains("sigma") && b.contains("p") && b.contains("q")) {
          d.blocks.emplace_back(RankOneBlock{complex_from_json(b.at("sigma")),
                                             vector_from_json(b.at("p"), dim),
                                             vector_from_json(b.at("q"), dim)});
        } else if (b.contains("dense")) {
          json mj = b.at("dense");
          mj["n"] = dim;
          d.blocks.emplace_back(DenseBlock{matrix_from_json(mj)});
        } else {
          throw schema("full block needs sigma/p/q or dense");
        }
        break;
    }
  }
  return d;
}

json certificate_to_json(const Certificate& c, const BlockStructure& s) {
  json hist = json::array();
  for (const auto& h : c.history)
    hist.push_back({{"eps", h.eps}, {"objective", h.objective}, {"step", to_string(h.kind)}});
  json starts = json::array();
  for (const auto& st : c.starts) {
    json e{{"label", st.label}, {"failed", st.failed}};
    if (st.failed) e["error"] = st.error;
    else {
      e["objective"] = st.objective;
      e["stop"] = to_string(st.reason);
    }
    starts.push_back(std::move(e));
  }
  return json{{"lower_bound", c.lower_bound},
              {"eps_f", c.eps_f},
              {"residual", c.residual},
              {"verified", c.verified},
              {"mode", to_string(c.mode)},
              {"structure", s.to_string()},
              {"delta", perturbation_to_json(c.delta_star, s)},
              {"history", std::move(hist)},
              {"starts", std::move(starts)},
              {"inner_steps", c.inner_steps},
              {"notes", c.notes}};
}

json report_to_json(const VerificationReport& r) {
  json j{{"singularity_residual", r.singularity_residual},
         {"admissible", r.admissible},
         {"delta_norm", r.delta_norm},
         {"threshold", r.threshold},
         {"verified", r.verified},
         {"notes", r.notes}};
  if (r.sampled_best_eps) j["sampled_best_eps"] = *r.sampled_best_eps;
  return j;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, path + ": " + e.what());
  }
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path);
  out << j.dump(2) << '\n';
}

}  // namespace mulb
