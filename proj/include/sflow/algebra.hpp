#pragma once

#include <cstdint>
#include <vector>

#include "sflow/types.hpp"

namespace sflow {

// Coefficient algebra: a finite direct sum of blocks, each either a matrix
// algebra M_k ("scalar") or a loop algebra C(S^1) (x) M_k sampled on a
// uniform theta grid ("loop").
enum class BlockKind { scalar, loop };

struct BlockSpec {
  BlockKind kind = BlockKind::scalar;
  int dim = 1;            // k
  int theta_samples = 1;  // uniform grid on [0, 2pi); 1 for scalar blocks

  bool operator==(const BlockSpec&) const = default;
};

struct AlgebraShape {
  std::vector<BlockSpec> blocks;

  bool operator==(const AlgebraShape&) const = default;

  int block_count() const { return static_cast<int>(blocks.size()); }
  int theta_count(int b) const {
    return blocks[b].kind == BlockKind::loop ? blocks[b].theta_samples : 1;
  }
  // matrix size of block b for an element of M_rank(A)
  int block_matrix_dim(int b, int rank) const { return blocks[b].dim * rank; }

  void validate() const;

  static AlgebraShape scalar(int dim) { return AlgebraShape{{BlockSpec{BlockKind::scalar, dim, 1}}}; }
  static AlgebraShape loop(int dim, int theta_samples) {
    return AlgebraShape{{BlockSpec{BlockKind::loop, dim, theta_samples}}};
  }
};

// Element of M_rank(A): one matrix per scalar block, a theta-indexed matrix
// loop per loop block.
struct AElement {
  AlgebraShape shape;
  int rank = 1;
  std::vector<std::vector<Matrix>> blocks;  // [block][theta]

  const Matrix& at(int b, int theta = 0) const { return blocks[b][theta]; }
  Matrix& at(int b, int theta = 0) { return blocks[b][theta]; }

  static AElement zero(const AlgebraShape& shape, int rank);
  static AElement identity(const AlgebraShape& shape, int rank);

  AElement adjoint() const;
  double norm() const;  // max over blocks and theta of Frobenius norms
  double hermiticity_defect() const;

  // max over blocks of consecutive step norms including the wrap step
  double loop_step_defect() const;

  void check_same_shape(const AElement& other) const;
  void validate() const;  // dimensions, finiteness, loop continuity
};

AElement operator+(const AElement& a, const AElement& b);
AElement operator-(const AElement& a, const AElement& b);
AElement operator*(const AElement& a, const AElement& b);
AElement operator*(double s, const AElement& a);
AElement operator*(Complex s, const AElement& a);

// K-theory values, one integer component per block.
struct KZeroClass {
  AlgebraShape shape;
  std::vector<long long> components;

  bool operator==(const KZeroClass&) const = default;
  static KZeroClass zero(const AlgebraShape& shape);
};

// K_1 components live on loop blocks only; scalar components are pinned to 0
// and a nonzero scalar component is rejected at construction.
struct KOneClass {
  AlgebraShape shape;
  std::vector<long long> components;

  KOneClass() = default;
  KOneClass(AlgebraShape s, std::vector<long long> c);

  bool operator==(const KOneClass&) const = default;
  static KOneClass zero(const AlgebraShape& shape);
};

KZeroClass k_add(const KZeroClass& x, const KZeroClass& y);
KOneClass k_add(const KOneClass& x, const KOneClass& y);
KZeroClass k_neg(const KZeroClass& x);
KOneClass k_neg(const KOneClass& x);

// Supported unital-enough homomorphisms between shapes: evaluation of one
// loop block at a grid angle, rotation of one loop block by a grid shift,
// permutation of blocks, and inclusion into a larger direct sum.
struct Homomorphism {
  enum class Kind { evaluate_loop, rotate_loop, permute_blocks, include_blocks };

  Kind kind = Kind::permute_blocks;
  AlgebraShape source;
  AlgebraShape target;
  int block = 0;        // evaluate_loop / rotate_loop
  int theta_index = 0;  // grid index: evaluation angle or rotation shift
  std::vector<int> block_map;  // permute: target position of each source block;
                               // include: target slot of each source block

  static Homomorphism evaluate(const AlgebraShape& source, int block, int theta_index);
  static Homomorphism rotate(const AlgebraShape& source, int block, int shift);
  static Homomorphism permute(const AlgebraShape& source, std::vector<int> perm);
  static Homomorphism include(const AlgebraShape& source, const AlgebraShape& target,
                              std::vector<int> slots);
};

KZeroClass pushforward(const KZeroClass& c, const Homomorphism& hom);
KOneClass pushforward(const KOneClass& c, const Homomorphism& hom);
AElement apply(const Homomorphism& hom, const AElement& a);

}  // namespace sflow
