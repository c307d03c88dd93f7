#pragma once

#include <random>
#include <vector>

#include "detpi/circuit.hpp"
#include "detpi/evaluator.hpp"
#include "detpi/homogenizer.hpp"
#include "detpi/numeric.hpp"

namespace testsupport {

using detpi::Int;
using detpi::IntMatrix;
using detpi::Rat;

inline IntMatrix random_matrix(std::mt19937_64& rng, std::uint32_t n, long lo = -50, long hi = 50) {
  std::uniform_int_distribution<long> d(lo, hi);
  IntMatrix m(n, std::vector<Int>(n));
  for (auto& row : m)
    for (auto& e : row) e = d(rng);
  return m;
}

inline bool leading_minors_nonzero(const IntMatrix& m) {
  for (std::size_t k = 1; k <= m.size(); ++k) {
    IntMatrix s(k, std::vector<Int>(k));
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) s[i][j] = m[i][j];
    if (detpi::bareiss_det(s) == 0) return false;
  }
  return true;
}

inline std::vector<Int> flatten(const IntMatrix& m, std::size_t extra = 0) {
  std::vector<Int> v;
  for (const auto& row : m) v.insert(v.end(), row.begin(), row.end());
  v.resize(v.size() + extra, Int(0));
  return v;
}

inline std::vector<Rat> to_rat(const std::vector<Int>& v) { return {v.begin(), v.end()}; }

// Random division-free circuit over `vars` variables with at most
// max_size nodes and exact syntactic degree in [1, max_degree].
inline detpi::Circuit random_circuit(std::mt19937_64& rng, std::uint32_t vars, std::size_t max_size,
                                     std::uint64_t max_degree) {
  using namespace detpi;
  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_int_distribution<long> cval(-3, 3);
  std::uniform_int_distribution<std::size_t> len(max_size / 3, max_size);
  for (;;) {
    Builder b;
    std::vector<NodeId> pool;
    std::vector<std::uint64_t> deg;
    for (std::uint32_t v = 0; v < vars; ++v) {
      pool.push_back(b.var(v));
      deg.push_back(1);
    }
    pool.push_back(b.constant(cval(rng)));
    deg.push_back(0);
    const std::size_t target = len(rng);
    while (b.size() < target) {
      std::uniform_int_distribution<std::size_t> any(0, pool.size() - 1);
      // Bias toward recent nodes so the DAG gets some depth.
      const std::size_t i = std::max(any(rng), any(rng)), j = any(rng);
      const bool mul = coin(rng);
      const std::uint64_t d = mul ? deg[i] + deg[j] : std::max(deg[i], deg[j]);
      if (d > max_degree) continue;
      pool.push_back(mul ? b.mul(pool[i], pool[j]) : b.add(pool[i], pool[j]));
      deg.push_back(d);
    }
    if (deg.back() == 0) continue;
    return b.extract({pool.back()}, vars);
  }
}

}  // namespace testsupport
