#include "detpi/det_builder.hpp"

namespace detpi {

namespace {
void check_dim(std::uint32_t n) {
  if (n == 0) throw CircuitError("matrix dimension must be at least 1");
}
}  // namespace

NodeMatrix layout_leaves(Builder& b, const MatrixLayout& layout) {
  const std::uint32_t n = layout.n;
  check_dim(n);
  NodeMatrix x(n, std::vector<NodeId>(n));
  const NodeId z = layout.shape == MatrixShape::IdentityShift ? b.var(layout.z_var()) : kNoNode;
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j = 0; j < n; ++j) {
      switch (layout.shape) {
        case MatrixShape::Full: x[i][j] = b.var(layout.var_of(i, j)); break;
        case MatrixShape::LowerTriangular:
          x[i][j] = i < j ? b.constant(0) : b.var(layout.var_of(i, j));
          break;
        case MatrixShape::IdentityShift:
          x[i][j] = b.add(b.constant(i == j ? 1 : 0), b.mul(z, b.var(layout.var_of(i, j))));
          break;
      }
    }
  }
  return x;
}

NodeMatrix product_leaves(Builder& b, std::uint32_t n) {
  check_dim(n);
  NodeMatrix a(n, std::vector<NodeId>(n));
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j = 0; j < n; ++j) {
      std::vector<NodeId> terms;
      for (std::uint32_t k = 0; k < n; ++k) terms.push_back(b.mul(b.var(i * n + k), b.var(n * n + k * n + j)));
      a[i][j] = sum_tree(b, terms);
    }
  }
  return a;
}

std::vector<InverseLevel> build_inverse_levels(Builder& b, const NodeMatrix& x, std::uint32_t upto) {
  std::vector<InverseLevel> levels;
  if (upto == 0) return levels;
  if (upto > x.size()) throw CircuitError("inverse level exceeds matrix dimension");
  {
    InverseLevel l1;
    l1.k = 1;
    l1.delta = x[0][0];
    l1.t = b.inv(l1.delta);
    l1.inv = {{l1.t}};
    levels.push_back(std::move(l1));
  }
  for (std::uint32_t k = 2; k <= upto; ++k) {
    const NodeMatrix& e = levels.back().inv;
    const std::uint32_t m = k - 1;
    InverseLevel lv;
    lv.k = k;
    std::vector<NodeId> terms;
    for (std::uint32_t p = 0; p < m; ++p) {
      terms.clear();
      for (std::uint32_t q = 0; q < m; ++q) terms.push_back(b.mul(e[p][q], x[q][m]));
      lv.u.push_back(sum_tree(b, terms));
    }
    for (std::uint32_t r = 0; r < m; ++r) {
      terms.clear();
      for (std::uint32_t q = 0; q < m; ++q) terms.push_back(b.mul(x[m][q], e[q][r]));
      lv.w.push_back(sum_tree(b, terms));
    }
    terms.clear();
    for (std::uint32_t q = 0; q < m; ++q) terms.push_back(b.mul(x[m][q], lv.u[q]));
    lv.delta = b.sub(x[m][m], sum_tree(b, terms));
    lv.t = b.inv(lv.delta);
    lv.inv.assign(k, std::vector<NodeId>(k));
    for (std::uint32_t p = 0; p < m; ++p) {
      for (std::uint32_t r = 0; r < m; ++r) {
        terms.clear();
        for (std::uint32_t q = 0; q < m; ++q) {
          const NodeId corr = b.mul(lv.t, b.mul(x[q][m], lv.w[r]));
          terms.push_back(b.mul(e[p][q], b.add(b.constant(q == r ? 1 : 0), corr)));
        }
        lv.inv[p][r] = sum_tree(b, terms);
      }
      lv.inv[p][m] = b.neg(b.mul(lv.t, lv.u[p]));
    }
    for (std::uint32_t r = 0; r < m; ++r) lv.inv[m][r] = b.neg(b.mul(lv.t, lv.w[r]));
    lv.inv[m][m] = lv.t;
    levels.push_back(std::move(lv));
  }
  return levels;
}

NodeId det_inv_from_levels(Builder& b, const NodeMatrix& x, const std::vector<InverseLevel>& levels) {
  const std::uint32_t n = static_cast<std::uint32_t>(x.size());
  check_dim(n);
  NodeId acc = x[0][0];
  for (std::uint32_t k = 2; k <= n; ++k) {
    if (k <= levels.size()) {
      acc = b.mul(acc, levels[k - 1].delta);
      continue;
    }
    const NodeMatrix& e = levels.at(k - 2).inv;
    const std::uint32_t m = k - 1;
    std::vector<NodeId> terms, uterms;
    for (std::uint32_t q = 0; q < m; ++q) {
      uterms.clear();
      for (std::uint32_t r = 0; r < m; ++r) uterms.push_back(b.mul(e[q][r], x[r][m]));
      terms.push_back(b.mul(x[m][q], sum_tree(b, uterms)));
    }
    acc = b.mul(acc, b.sub(x[m][m], sum_tree(b, terms)));
  }
  return acc;
}

NodeId det_inv_node(Builder& b, const NodeMatrix& x) {
  const std::uint32_t n = static_cast<std::uint32_t>(x.size());
  check_dim(n);
  const auto levels = build_inverse_levels(b, x, n - 1);
  return det_inv_from_levels(b, x, levels);
}

Circuit build_inverse(std::uint32_t n) {
  check_dim(n);
  Builder b;
  const NodeMatrix x = layout_leaves(b, MatrixLayout::full(n));
  const auto levels = build_inverse_levels(b, x, n);
  std::vector<NodeId> outs;
  for (const auto& row : levels.back().inv) outs.insert(outs.end(), row.begin(), row.end());
  return b.finish(outs, n * n);
}

Circuit build_det_inv(const MatrixLayout& layout) {
  Builder b;
  const NodeMatrix x = layout_leaves(b, layout);
  const NodeId root = det_inv_node(b, x);
  return b.finish({root}, layout.var_count());
}

Circuit build_product_layout(std::uint32_t n) {
  Builder b;
  const NodeMatrix a = product_leaves(b, n);
  std::vector<NodeId> outs;
  for (const auto& row : a) outs.insert(outs.end(), row.begin(), row.end());
  return b.finish(outs, 2 * n * n);
}

Circuit build_det_inv_product(std::uint32_t n) {
  Builder b;
  const NodeMatrix a = product_leaves(b, n);
  const NodeId root = det_inv_node(b, a);
  return b.finish({root}, 2 * n * n);
}

}  // namespace detpi
