#include "detpi/numeric.hpp"

namespace detpi {

bool parse_int(std::string_view text, Int& out) {
  if (text.empty()) return false;
  std::size_t i = 0;
  if (text[0] == '-' || text[0] == '+') i = 1;
  if (i == text.size()) return false;
  for (std::size_t j = i; j < text.size(); ++j)
    if (text[j] < '0' || text[j] > '9') return false;
  std::string digits(text.substr(text[0] == '+' ? 1 : 0));
  return out.set_str(digits, 10) == 0;
}

std::string to_string(const Int& v) { return v.get_str(10); }

std::string to_string(const Rat& v) { return v.get_str(10); }

std::uint64_t hash_int(const Int& v) {
  const mpz_srcptr p = v.get_mpz_t();
  std::uint64_t h = mix64(static_cast<std::uint64_t>(mpz_sgn(p)) + 17);
  const std::size_t limbs = mpz_size(p);
  for (std::size_t i = 0; i < limbs; ++i)
    h = hash_combine(h, static_cast<std::uint64_t>(mpz_getlimbn(p, i)));
  return h;
}

IntMatrix identity_matrix(std::size_t n) {
  IntMatrix m(n, std::vector<Int>(n, 0));
  for (std::size_t i = 0; i < n; ++i) m[i][i] = 1;
  return m;
}

IntMatrix matrix_mul(const IntMatrix& a, const IntMatrix& b) {
  const std::size_t n = a.size();
  const std::size_t k = b.size();
  const std::size_t m = k ? b[0].size() : 0;
  IntMatrix c(n, std::vector<Int>(m, 0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      if (a[i][j] == 0) continue;
      for (std::size_t l = 0; l < m; ++l) c[i][l] += a[i][j] * b[j][l];
    }
  return c;
}

}  // namespace detpi
