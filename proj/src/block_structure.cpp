#include "mulb/block_structure.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <random>
#include <sstream>

namespace mulb {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SolverFailure: return "SolverFailure";
    case ErrorCode::NonSimpleTarget: return "NonSimpleTarget";
    case ErrorCode::DegeneratePair: return "DegeneratePair";
    case ErrorCode::SigmaUnderflow: return "SigmaUnderflow";
    case ErrorCode::AssumptionViolated: return "AssumptionViolated";
    case ErrorCode::TooManyParameters: return "TooManyParameters";
  }
  return "Unknown";
}

BlockStructure::BlockStructure(std::vector<BlockSpec> blocks)
    : blocks_(std::move(blocks)) {
  if (blocks_.empty())
    throw Error(ErrorCode::InvalidArgument, "block structure is empty");
  offsets_.reserve(blocks_.size());
  for (const auto& b : blocks_) {
    if (b.dim < 1)
      throw Error(ErrorCode::InvalidArgument, "block dimension must be >= 1");
    offsets_.push_back(n_);
    n_ += b.dim;
  }
}

int BlockStructure::complex_scalar_count() const {
  return static_cast<int>(std::count_if(blocks_.begin(), blocks_.end(), [](auto& b) {
    return b.kind == BlockKind::ComplexScalar;
  }));
}

int BlockStructure::scalar_count() const {
  return static_cast<int>(std::count_if(blocks_.begin(), blocks_.end(), [](auto& b) {
    return b.kind != BlockKind::ComplexFull;
  }));
}

int BlockStructure::full_count() const {
  return static_cast<int>(blocks_.size()) - scalar_count();
}

bool BlockStructure::has_real_blocks() const {
  return std::any_of(blocks_.begin(), blocks_.end(),
                     [](auto& b) { return b.kind == BlockKind::RealScalar; });
}

std::string BlockStructure::to_string() const {
  std::ostringstream out;
  for (std::size_t k = 0; k < blocks_.size(); ++k) {
    if (k) out << ',';
    switch (blocks_[k].kind) {
      case BlockKind::ComplexScalar: out << "cs:"; break;
      case BlockKind::RealScalar: out << "rs:"; break;
      case BlockKind::ComplexFull: out << "cf:"; break;
    }
    out << blocks_[k].dim;
  }
  return out.str();
}

BlockStructure parse_structure(std::string_view text) {
  std::vector<BlockSpec> blocks;
  std::size_t pos = 0;
  if (text.empty()) throw Error(ErrorCode::InvalidArgument, "empty structure string");
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const auto end = comma == std::string_view::npos ? text.size() : comma;
    std::string_view token = text.substr(pos, end - pos);
    while (!token.empty() && token.front() == ' ') token.remove_prefix(1);
    while (!token.empty() && token.back() == ' ') token.remove_suffix(1);

    auto bad = [&](const char* why) {
      return Error(ErrorCode::InvalidArgument,
                   "malformed structure token '" + std::string(token) + "': " + why);
    };
    if (token.size() < 4 || token[2] != ':') throw bad("expected <kind>:<dim>");
    BlockKind kind;
    const auto tag = token.substr(0, 2);
    if (tag == "cs") kind = BlockKind::ComplexScalar;
    else if (tag == "rs") kind = BlockKind::RealScalar;
    else if (tag == "cf") kind = BlockKind::ComplexFull;
    else throw bad("kind must be cs, rs or cf");

    const auto digits = token.substr(3);
    int dim = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), dim);
    if (ec != std::errc() || ptr != digits.data() + digits.size())
      throw bad("dimension is not an integer");
    if (dim < 1) throw bad("dimension must be positive");
    blocks.push_back({kind, dim});

    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return BlockStructure(std::move(blocks));
}

void check_conforms(const Perturbation& delta, const BlockStructure& s) {
  if (delta.blocks.size() != s.size())
    throw Error(ErrorCode::DimensionMismatch,
                "perturbation has " + std::to_string(delta.blocks.size()) +
                    " blocks, structure has " + std::to_string(s.size()));
  for (std::size_t k = 0; k < s.size(); ++k) {
    const auto& spec = s[k];
    const auto& v = delta.blocks[k];
    bool ok = false;
    switch (spec.kind) {
      case BlockKind::ComplexScalar:
        ok = std::holds_alternative<ComplexScalarBlock>(v);
        break;
      case BlockKind::RealScalar:
        ok = std::holds_alternative<RealScalarBlock>(v);
        break;
      case BlockKind::ComplexFull:
        if (auto* r = std::get_if<RankOneBlock>(&v))
          ok = r->p.size() == spec.dim && r->q.size() == spec.dim;
        else if (auto* d = std::get_if<DenseBlock>(&v))
          ok = d->value.rows() == spec.dim && d->value.cols() == spec.dim;
        break;
    }
    if (!ok)
      throw Error(ErrorCode::DimensionMismatch,
                  "block " + std::to_string(k) + " does not match structure " +
                      s.to_string());
  }
}

CMatrix full_block_matrix(const BlockValue& value) {
  if (auto* r = std::get_if<RankOneBlock>(&value))
    return r->sigma * r->p * r->q.adjoint();
  if (auto* d = std::get_if<DenseBlock>(&value)) return d->value;
  throw Error(ErrorCode::InvalidArgument, "not a full block");
}

double block_magnitude(const BlockValue& value) {
  return std::visit(
      [](const auto& b) -> double {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, ComplexScalarBlock>) return std::abs(b.delta);
        else if constexpr (std::is_same_v<T, RealScalarBlock>) return std::abs(b.delta);
        else if constexpr (std::is_same_v<T, RankOneBlock>)
          return std::abs(b.sigma) * b.p.norm() * b.q.norm();
        else return b.value.norm();
      },
      value);
}

Perturbation project_onto_structure(const CMatrix& c, const BlockStructure& s) {
  if (c.rows() != s.n() || c.cols() != s.n())
    throw Error(ErrorCode::DimensionMismatch, "matrix is " + std::to_string(c.rows()) +
                                                  "x" + std::to_string(c.cols()) +
                                                  ", structure has n = " +
                                                  std::to_string(s.n()));
  Perturbation out;
  out.blocks.reserve(s.size());
  for (std::size_t k = 0; k < s.size(); ++k) {
    const int o = s.offset(k), d = s[k].dim;
    const auto sub = c.block(o, o, d, d);
    switch (s[k].kind) {
      case BlockKind::ComplexScalar:
        out.blocks.emplace_back(ComplexScalarBlock{sub.trace() / double(d)});
        break;
      case BlockKind::RealScalar:
        out.blocks.emplace_back(RealScalarBlock{sub.trace().real() / d});
        break;
      case BlockKind::ComplexFull:
        out.blocks.emplace_back(DenseBlock{sub});
        break;
    }
  }
  return out;
}

CMatrix assemble_dense(const Perturbation& delta, const BlockStructure& s) {
  check_conforms(delta, s);
  CMatrix a = CMatrix::Zero(s.n(), s.n());
  for (std::size_t k = 0; k < s.size(); ++k) {
    const int o = s.offset(k), d = s[k].dim;
    std::visit(
        [&](const auto& b) {
          using T = std::decay_t<decltype(b)>;
          if constexpr (std::is_same_v<T, ComplexScalarBlock>)
            a.block(o, o, d, d).diagonal().setConstant(b.delta);
          else if constexpr (std::is_same_v<T, RealScalarBlock>)
            a.block(o, o, d, d).diagonal().setConstant(cplx(b.delta, 0.0));
          else if constexpr (std::is_same_v<T, RankOneBlock>)
            a.block(o, o, d, d) = b.sigma * b.p * b.q.adjoint();
          else
            a.block(o, o, d, d) = b.value;
        },
        delta.blocks[k]);
  }
  return a;
}

namespace {

CVector haar_unit_vector(int m, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  CVector v(m);
  for (int i = 0; i < m; ++i) v(i) = cplx(g(rng), g(rng));
  const double nv = v.norm();
  if (nv == 0.0) {
    v.setZero();
    v(0) = 1.0;
    return v;
  }
  return v / nv;
}

}  // namespace

Perturbation random_unit_perturbation(const BlockStructure& s, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
  // Sampling on [-1.2, 1.2] and clamping puts positive mass on the endpoints,
  // where extremizers live.
  std::uniform_real_distribution<double> real(-1.2, 1.2);
  Perturbation out;
  out.blocks.reserve(s.size());
  for (const auto& spec : s.blocks()) {
    switch (spec.kind) {
      case BlockKind::ComplexScalar:
        out.blocks.emplace_back(ComplexScalarBlock{std::polar(1.0, angle(rng))});
        break;
      case BlockKind::RealScalar:
        out.blocks.emplace_back(RealScalarBlock{std::clamp(real(rng), -1.0, 1.0)});
        break;
      case BlockKind::ComplexFull: {
        const cplx sigma = std::polar(1.0, angle(rng));
        CVector p = haar_unit_vector(spec.dim, rng);
        CVector q = haar_unit_vector(spec.dim, rng);
        out.blocks.emplace_back(RankOneBlock{sigma, std::move(p), std::move(q)});
        break;
      }
    }
  }
  return out;
}

Perturbation normalize_blocks(const Perturbation& delta) {
  Perturbation out = delta;
  for (auto& v : out.blocks) {
    std::visit(
        [](auto& b) {
          using T = std::decay_t<decltype(b)>;
          if constexpr (std::is_same_v<T, ComplexScalarBlock>) {
            if (const double a = std::abs(b.delta); a > 0.0) b.delta /= a;
          } else if constexpr (std::is_same_v<T, RealScalarBlock>) {
            b.delta = std::clamp(b.delta, -1.0, 1.0);
          } else if constexpr (std::is_same_v<T, RankOneBlock>) {
            if (const double a = std::abs(b.sigma); a > 0.0) b.sigma /= a;
            if (const double a = b.p.norm(); a > 0.0) b.p /= a;
            if (const double a = b.q.norm(); a > 0.0) b.q /= a;
          } else {
            if (const double a = b.value.norm(); a > 0.0) b.value /= a;
          }
        },
        v);
  }
  return out;
}

Perturbation rotate_complex_blocks(const Perturbation& delta, cplx phase) {
  Perturbation out = delta;
  for (auto& v : out.blocks) {
    if (auto* c = std::get_if<ComplexScalarBlock>(&v)) c->delta *= phase;
    else if (auto* r = std::get_if<RankOneBlock>(&v)) r->sigma *= phase;
    else if (auto* d = std::get_if<DenseBlock>(&v)) d->value *= phase;
  }
  return out;
}

Perturbation to_dense_blocks(const Perturbation& delta) {
  Perturbation out = delta;
  for (auto& v : out.blocks)
    if (auto* r = std::get_if<RankOneBlock>(&v))
      v = DenseBlock{r->sigma * r->p * r->q.adjoint()};
  return out;
}

cplx frobenius_inner(const CMatrix& a, const CMatrix& b) {
  return (a.adjoint() * b).trace();
}

}  // namespace mulb
