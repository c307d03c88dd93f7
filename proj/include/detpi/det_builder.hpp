#pragma once

#include <cstdint>
#include <vector>

#include "detpi/circuit.hpp"

namespace detpi {

enum class MatrixShape { Full, LowerTriangular, IdentityShift };

// Entry (i, j) of an n x n symbolic matrix is variable i*n + j. The shifted
// shape uses variable n*n as z and places delta_ij + z*x_ij at each entry.
struct MatrixLayout {
  std::uint32_t n = 0;
  MatrixShape shape = MatrixShape::Full;

  static MatrixLayout full(std::uint32_t n) { return {n, MatrixShape::Full}; }
  static MatrixLayout lower_triangular(std::uint32_t n) { return {n, MatrixShape::LowerTriangular}; }
  static MatrixLayout identity_shift(std::uint32_t n) { return {n, MatrixShape::IdentityShift}; }

  std::uint32_t var_of(std::uint32_t i, std::uint32_t j) const { return i * n + j; }
  std::uint32_t z_var() const { return n * n; }
  std::uint32_t var_count() const { return shape == MatrixShape::IdentityShift ? n * n + 1 : n * n; }
};

using NodeMatrix = std::vector<std::vector<NodeId>>;

NodeMatrix layout_leaves(Builder& b, const MatrixLayout& layout);

// Entry (i, j) is sum_k x_ik * y_kj with x at i*n + k and y at n*n + k*n + j.
NodeMatrix product_leaves(Builder& b, std::uint32_t n);

// One level of the Schur complement recursion, for the leading k x k block.
struct InverseLevel {
  std::uint32_t k = 0;
  NodeId delta = kNoNode;   // x_kk - v2 E v1^t, or x_11 at level 1
  NodeId t = kNoNode;       // Inv(delta)
  std::vector<NodeId> u;    // E v1^t
  std::vector<NodeId> w;    // v2 E
  NodeMatrix inv;           // k x k entries of the inverse
};

// Levels 1..upto over the leaf matrix x (upto <= x.size()).
std::vector<InverseLevel> build_inverse_levels(Builder& b, const NodeMatrix& x, std::uint32_t upto);

// Root of Det^-1 over x, a left comb x_11 * delta_2 * ... * delta_n.
NodeId det_inv_node(Builder& b, const NodeMatrix& x);
// Same, reusing already built levels 1..n-1.
NodeId det_inv_from_levels(Builder& b, const NodeMatrix& x, const std::vector<InverseLevel>& levels);

// n^2 outputs, row-major.
Circuit build_inverse(std::uint32_t n);
Circuit build_det_inv(const MatrixLayout& layout);
// n^2 single inner-product outputs over 2n^2 variables.
Circuit build_product_layout(std::uint32_t n);
// Det^-1 applied to the product layout XY.
Circuit build_det_inv_product(std::uint32_t n);

}  // namespace detpi
