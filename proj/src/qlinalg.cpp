#include "hall/qlinalg.hpp"

#include <algorithm>

namespace hall {

std::vector<int> q_row_reduce(QMatrix& rows) {
  std::vector<int> pivots;
  if (rows.empty()) return pivots;
  std::size_t cols = rows[0].size();
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows.size(); ++c) {
    std::size_t p = r;
    while (p < rows.size() && rows[p][c] == 0) ++p;
    if (p == rows.size()) continue;
    std::swap(rows[p], rows[r]);
    Rational inv = 1 / rows[r][c];
    for (auto& x : rows[r]) x *= inv;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (i == r || rows[i][c] == 0) continue;
      Rational m = rows[i][c];
      for (std::size_t k = c; k < cols; ++k) rows[i][k] -= m * rows[r][k];
    }
    pivots.push_back(static_cast<int>(c));
    ++r;
  }
  rows.resize(r);
  return pivots;
}

int q_rank(QMatrix rows) { return static_cast<int>(q_row_reduce(rows).size()); }

QMatrix q_row_relations(const QMatrix& rows) {
  // Kernel of the transpose.
  std::size_t n = rows.size();
  if (n == 0) return {};
  std::size_t cols = rows[0].size();
  QMatrix t(cols, QVector(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < cols; ++j) t[j][i] = rows[i][j];
  auto piv = q_row_reduce(t);
  std::vector<bool> is_pivot(n, false);
  for (int p : piv) is_pivot[static_cast<std::size_t>(p)] = true;
  QMatrix out;
  for (std::size_t f = 0; f < n; ++f) {
    if (is_pivot[f]) continue;
    QVector v(n);
    v[f] = 1;
    for (std::size_t r = 0; r < piv.size(); ++r) v[static_cast<std::size_t>(piv[r])] = -t[r][f];
    out.push_back(q_primitive(std::move(v)));
  }
  return out;
}

QVector q_primitive(QVector v) {
  BigInt den = 1, num = 0;
  for (auto& x : v) {
    x.canonicalize();
    if (x == 0) continue;
    mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), x.get_den_mpz_t());
  }
  for (auto& x : v) x *= den;
  for (const auto& x : v) mpz_gcd(num.get_mpz_t(), num.get_mpz_t(), x.get_num_mpz_t());
  if (num == 0) return v;
  auto first = std::find_if(v.begin(), v.end(), [](const Rational& x) { return x != 0; });
  if (*first < 0) num = -num;
  for (auto& x : v) {
    x /= num;
    x.canonicalize();
  }
  return v;
}

}  // namespace hall
