#include "sflow/algebra.hpp"

#include <algorithm>
#include <numeric>

namespace sflow {

void AlgebraShape::validate() const {
  if (blocks.empty()) fail(Errc::bad_input, "algebra shape needs at least one block");
  for (const BlockSpec& b : blocks) {
    if (b.dim < 1) fail(Errc::bad_input, "block dim must be >= 1");
    if (b.kind == BlockKind::loop && b.theta_samples < 8) {
      fail(Errc::bad_input, "loop blocks need theta_samples >= 8");
    }
    if (b.kind == BlockKind::scalar && b.theta_samples != 1) {
      fail(Errc::bad_input, "scalar blocks carry no theta grid");
    }
  }
}

AElement AElement::zero(const AlgebraShape& shape, int rank) {
  AElement out;
  out.shape = shape;
  out.rank = rank;
  out.blocks.resize(shape.block_count());
  for (int b = 0; b < shape.block_count(); ++b) {
    const int d = shape.block_matrix_dim(b, rank);
    out.blocks[b].assign(shape.theta_count(b), Matrix::Zero(d, d));
  }
  return out;
}

AElement AElement::identity(const AlgebraShape& shape, int rank) {
  AElement out = zero(shape, rank);
  for (auto& blk : out.blocks) {
    for (Matrix& m : blk) m = Matrix::Identity(m.rows(), m.cols());
  }
  return out;
}

AElement AElement::adjoint() const {
  AElement out = *this;
  for (auto& blk : out.blocks) {
    for (Matrix& m : blk) m = m.adjoint().eval();
  }
  return out;
}

double AElement::norm() const {
  double n = 0.0;
  for (const auto& blk : blocks) {
    for (const Matrix& m : blk) n = std::max(n, m.norm());
  }
  return n;
}

double AElement::hermiticity_defect() const {
  double d = 0.0;
  for (const auto& blk : blocks) {
    for (const Matrix& m : blk) d = std::max(d, (m - m.adjoint()).norm());
  }
  return d;
}

double AElement::loop_step_defect() const {
  double d = 0.0;
  for (int b = 0; b < shape.block_count(); ++b) {
    if (shape.blocks[b].kind != BlockKind::loop) continue;
    const auto& blk = blocks[b];
    const int n = static_cast<int>(blk.size());
    for (int j = 0; j < n; ++j) {
      d = std::max(d, (blk[(j + 1) % n] - blk[j]).norm());
    }
  }
  return d;
}

void AElement::check_same_shape(const AElement& other) const {
  if (!(shape == other.shape) || rank != other.rank) {
    fail(Errc::shape_mismatch, "operands live over different shapes or ranks");
  }
}

void AElement::validate() const {
  shape.validate();
  if (rank < 1) fail(Errc::bad_input, "rank must be >= 1");
  if (static_cast<int>(blocks.size()) != shape.block_count()) {
    fail(Errc::bad_input, "block count mismatch");
  }
  for (int b = 0; b < shape.block_count(); ++b) {
    if (static_cast<int>(blocks[b].size()) != shape.theta_count(b)) {
      fail(Errc::bad_input, "theta sample count mismatch");
    }
    const int d = shape.block_matrix_dim(b, rank);
    for (const Matrix& m : blocks[b]) {
      if (m.rows() != d || m.cols() != d) fail(Errc::bad_input, "block matrix size mismatch");
      if (!m.allFinite()) fail(Errc::bad_input, "non-finite entries");
    }
  }
  const double scale = norm();
  if (loop_step_defect() > 0.75 * (1.0 + scale)) {
    fail(Errc::bad_input, "loop block samples do not form a continuous loop");
  }
}

namespace {

template <typename Op>
AElement zip(const AElement& a, const AElement& b, Op op) {
  a.check_same_shape(b);
  AElement out = a;
  for (std::size_t i = 0; i < out.blocks.size(); ++i) {
    for (std::size_t j = 0; j < out.blocks[i].size(); ++j) {
      out.blocks[i][j] = op(a.blocks[i][j], b.blocks[i][j]);
    }
  }
  return out;
}

}  // namespace

AElement operator+(const AElement& a, const AElement& b) {
  return zip(a, b, [](const Matrix& x, const Matrix& y) { return x + y; });
}

AElement operator-(const AElement& a, const AElement& b) {
  return zip(a, b, [](const Matrix& x, const Matrix& y) { return x - y; });
}

AElement operator*(const AElement& a, const AElement& b) {
  return zip(a, b, [](const Matrix& x, const Matrix& y) -> Matrix { return x * y; });
}

AElement operator*(double s, const AElement& a) {
  AElement out = a;
  for (auto& blk : out.blocks) {
    for (Matrix& m : blk) m *= s;
  }
  return out;
}

AElement operator*(Complex s, const AElement& a) {
  AElement out = a;
  for (auto& blk : out.blocks) {
    for (Matrix& m : blk) m *= s;
  }
  return out;
}

KZeroClass KZeroClass::zero(const AlgebraShape& shape) {
  return KZeroClass{shape, std::vector<long long>(shape.block_count(), 0)};
}

KOneClass::KOneClass(AlgebraShape s, std::vector<long long> c)
    : shape(std::move(s)), components(std::move(c)) {
  if (components.size() != shape.blocks.size()) fail(Errc::shape_mismatch, "component count");
  for (int b = 0; b < shape.block_count(); ++b) {
    if (shape.blocks[b].kind == BlockKind::scalar && components[b] != 0) {
      fail(Errc::bad_input, "K1 component of a matrix block must vanish");
    }
  }
}

KOneClass KOneClass::zero(const AlgebraShape& shape) {
  return KOneClass(shape, std::vector<long long>(shape.block_count(), 0));
}

namespace {

template <typename K>
K k_add_impl(const K& x, const K& y) {
  if (!(x.shape == y.shape)) fail(Errc::shape_mismatch, "k_add over different shapes");
  K out = x;
  for (std::size_t i = 0; i < out.components.size(); ++i) out.components[i] += y.components[i];
  return out;
}

template <typename K>
K k_neg_impl(const K& x) {
  K out = x;
  for (auto& c : out.components) c = -c;
  return out;
}

}  // namespace

KZeroClass k_add(const KZeroClass& x, const KZeroClass& y) { return k_add_impl(x, y); }
KOneClass k_add(const KOneClass& x, const KOneClass& y) {
  if (!(x.shape == y.shape)) fail(Errc::shape_mismatch, "k_add over different shapes");
  std::vector<long long> c = x.components;
  for (std::size_t i = 0; i < c.size(); ++i) c[i] += y.components[i];
  return KOneClass(x.shape, std::move(c));
}
KZeroClass k_neg(const KZeroClass& x) { return k_neg_impl(x); }
KOneClass k_neg(const KOneClass& x) {
  std::vector<long long> c = x.components;
  for (auto& v : c) v = -v;
  return KOneClass(x.shape, std::move(c));
}

Homomorphism Homomorphism::evaluate(const AlgebraShape& source, int block, int theta_index) {
  if (block < 0 || block >= source.block_count() ||
      source.blocks[block].kind != BlockKind::loop) {
    fail(Errc::unsupported_homomorphism, "evaluation needs a loop block");
  }
  if (theta_index < 0 || theta_index >= source.blocks[block].theta_samples) {
    fail(Errc::unsupported_homomorphism, "evaluation angle must be a grid sample");
  }
  Homomorphism h;
  h.kind = Kind::evaluate_loop;
  h.source = source;
  h.target = source;
  h.target.blocks[block] = BlockSpec{BlockKind::scalar, source.blocks[block].dim, 1};
  h.block = block;
  h.theta_index = theta_index;
  return h;
}

Homomorphism Homomorphism::rotate(const AlgebraShape& source, int block, int shift) {
  if (block < 0 || block >= source.block_count() ||
      source.blocks[block].kind != BlockKind::loop) {
    fail(Errc::unsupported_homomorphism, "rotation needs a loop block");
  }
  Homomorphism h;
  h.kind = Kind::rotate_loop;
  h.source = source;
  h.target = source;
  h.block = block;
  const int n = source.blocks[block].theta_samples;
  h.theta_index = ((shift % n) + n) % n;
  return h;
}

Homomorphism Homomorphism::permute(const AlgebraShape& source, std::vector<int> perm) {
  if (static_cast<int>(perm.size()) != source.block_count()) {
    fail(Errc::unsupported_homomorphism, "permutation size mismatch");
  }
  std::vector<char> seen(perm.size(), 0);
  for (int p : perm) {
    if (p < 0 || p >= static_cast<int>(perm.size()) || seen[p]) {
      fail(Errc::unsupported_homomorphism, "not a permutation");
    }
    seen[p] = 1;
  }
  Homomorphism h;
  h.kind = Kind::permute_blocks;
  h.source = source;
  h.target = source;
  for (int b = 0; b < source.block_count(); ++b) h.target.blocks[perm[b]] = source.blocks[b];
  h.block_map = std::move(perm);
  return h;
}

Homomorphism Homomorphism::include(const AlgebraShape& source, const AlgebraShape& target,
                                   std::vector<int> slots) {
  if (static_cast<int>(slots.size()) != source.block_count()) {
    fail(Errc::unsupported_homomorphism, "inclusion slot count mismatch");
  }
  std::vector<char> seen(target.blocks.size(), 0);
  for (int b = 0; b < source.block_count(); ++b) {
    int s = slots[b];
    if (s < 0 || s >= target.block_count() || seen[s] ||
        !(target.blocks[s] == source.blocks[b])) {
      fail(Errc::unsupported_homomorphism, "inclusion slots must match block specs");
    }
    seen[s] = 1;
  }
  Homomorphism h;
  h.kind = Kind::include_blocks;
  h.source = source;
  h.target = target;
  h.block_map = std::move(slots);
  return h;
}

namespace {

template <typename K>
std::vector<long long> pushed_components(const K& c, const Homomorphism& hom, bool is_k1) {
  if (!(c.shape == hom.source)) fail(Errc::shape_mismatch, "class not over the source shape");
  switch (hom.kind) {
    case Homomorphism::Kind::evaluate_loop: {
      std::vector<long long> out = c.components;
      // K1 of a matrix algebra vanishes; K0 rank data passes through.
      if (is_k1) out[hom.block] = 0;
      return out;
    }
    case Homomorphism::Kind::rotate_loop:
      return c.components;  // homotopic to the identity
    case Homomorphism::Kind::permute_blocks: {
      std::vector<long long> out(c.components.size(), 0);
      for (std::size_t b = 0; b < c.components.size(); ++b) {
        out[hom.block_map[b]] = c.components[b];
      }
      return out;
    }
    case Homomorphism::Kind::include_blocks: {
      std::vector<long long> out(hom.target.block_count(), 0);
      for (std::size_t b = 0; b < c.components.size(); ++b) {
        out[hom.block_map[b]] = c.components[b];
      }
      return out;
    }
  }
  fail(Errc::unsupported_homomorphism, "unknown kind");
}

}  // namespace

KZeroClass pushforward(const KZeroClass& c, const Homomorphism& hom) {
  return KZeroClass{hom.target, pushed_components(c, hom, false)};
}

KOneClass pushforward(const KOneClass& c, const Homomorphism& hom) {
  return KOneClass(hom.target, pushed_components(c, hom, true));
}

AElement apply(const Homomorphism& hom, const AElement& a) {
  if (!(a.shape == hom.source)) fail(Errc::shape_mismatch, "element not over the source shape");
  AElement out = AElement::zero(hom.target, a.rank);
  switch (hom.kind) {
    case Homomorphism::Kind::evaluate_loop:
      for (int b = 0; b < a.shape.block_count(); ++b) {
        if (b == hom.block) {
          out.blocks[b][0] = a.blocks[b][hom.theta_index];
        } else {
          out.blocks[b] = a.blocks[b];
        }
      }
      return out;
    case Homomorphism::Kind::rotate_loop:
      for (int b = 0; b < a.shape.block_count(); ++b) {
        if (b == hom.block) {
          const int n = static_cast<int>(a.blocks[b].size());
          for (int j = 0; j < n; ++j) out.blocks[b][j] = a.blocks[b][(j + hom.theta_index) % n];
        } else {
          out.blocks[b] = a.blocks[b];
        }
      }
      return out;
    case Homomorphism::Kind::permute_blocks:
      for (int b = 0; b < a.shape.block_count(); ++b) {
        out.blocks[hom.block_map[b]] = a.blocks[b];
      }
      return out;
    case Homomorphism::Kind::include_blocks:
      for (int b = 0; b < a.shape.block_count(); ++b) {
        out.blocks[hom.block_map[b]] = a.blocks[b];
      }
      return out;
  }
  fail(Errc::unsupported_homomorphism, "unknown kind");
}

}  // namespace sflow
