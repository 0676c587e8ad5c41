#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mulb/types.hpp"

namespace mulb {

enum class BlockKind { ComplexScalar, RealScalar, ComplexFull };

struct BlockSpec {
  BlockKind kind;
  int dim;  // r for repeated scalars, m for square full blocks
};

// Ordered block-diagonal perturbation structure. Blocks may appear in any
// order; offset(k) gives the first row/column covered by block k.
class BlockStructure {
 public:
  BlockStructure() = default;
  explicit BlockStructure(std::vector<BlockSpec> blocks);

  const std::vector<BlockSpec>& blocks() const { return blocks_; }
  std::size_t size() const { return blocks_.size(); }
  const BlockSpec& operator[](std::size_t k) const { return blocks_[k]; }
  int n() const { return n_; }
  int offset(std::size_t k) const { return offsets_[k]; }

  int complex_scalar_count() const;  // S'
  int scalar_count() const;          // S
  int full_count() const;            // F
  bool has_real_blocks() const;

  std::string to_string() const;

 private:
  std::vector<BlockSpec> blocks_;
  std::vector<int> offsets_;
  int n_ = 0;
};

// Parses `cs:<r>`, `rs:<r>`, `cf:<m>` tokens separated by commas.
BlockStructure parse_structure(std::string_view text);

// Per-block values of a perturbation.
struct ComplexScalarBlock {
  cplx delta;
};
struct RealScalarBlock {
  double delta;
};
// sigma * p * q^*, with p and q unit vectors.
struct RankOneBlock {
  cplx sigma;
  CVector p;
  CVector q;
};
struct DenseBlock {
  CMatrix value;
};

using BlockValue =
    std::variant<ComplexScalarBlock, RealScalarBlock, RankOneBlock, DenseBlock>;

struct Perturbation {
  std::vector<BlockValue> blocks;
};

// Checks that every block value has the kind and dimension of `s`.
void check_conforms(const Perturbation& delta, const BlockStructure& s);

// Dense matrix of a single full block value (rank-one blocks expanded).
CMatrix full_block_matrix(const BlockValue& value);

// Frobenius norm of a block as it sits in the assembled matrix divided by
// sqrt(r) for scalar blocks, i.e. |delta| for scalars and ||Delta_j||_F for
// full blocks.
double block_magnitude(const BlockValue& value);

// Frobenius-orthogonal projection onto the structure. Complex scalar blocks
// become trace/r, real scalar blocks Re(trace)/r, full blocks the diagonal
// sub-block (stored dense).
Perturbation project_onto_structure(const CMatrix& c, const BlockStructure& s);

CMatrix assemble_dense(const Perturbation& delta, const BlockStructure& s);

// Random member of the unit ball of the structure: unit-modulus complex
// scalars, real scalars in [-1, 1] (with endpoint mass), Haar rank-one full
// blocks with |sigma| = 1.
Perturbation random_unit_perturbation(const BlockStructure& s, std::uint64_t seed);

// Pushes every block back onto the unit-norm manifold: |delta| = 1 for
// complex scalars, |sigma| = ||p|| = ||q|| = 1 for rank-one blocks,
// ||Delta_j||_F = 1 for dense blocks; real scalars are clamped to [-1, 1].
// Blocks with zero magnitude are left untouched.
Perturbation normalize_blocks(const Perturbation& delta);

// Multiplies every complex block by `phase` (real blocks are untouched).
Perturbation rotate_complex_blocks(const Perturbation& delta, cplx phase);

// Replaces rank-one representations by their dense expansion.
Perturbation to_dense_blocks(const Perturbation& delta);

// Frobenius inner product <A, B> = trace(A^* B).
cplx frobenius_inner(const CMatrix& a, const CMatrix& b);

}  // namespace mulb
