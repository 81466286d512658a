#include "hall/ffield.hpp"

#include <algorithm>
#include <map>
#include <mutex>

#include "hall/budget.hpp"

namespace hall {

bool is_prime(int n) {
  if (n < 2) return false;
  for (int d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

std::optional<std::pair<int, int>> prime_power(int q) {
  if (q < 2) return std::nullopt;
  int p = 2;
  while (q % p != 0) ++p;
  int k = 0, r = q;
  while (r % p == 0) {
    r /= p;
    ++k;
  }
  if (r != 1) return std::nullopt;
  return std::make_pair(p, k);
}

namespace {

using Poly = std::vector<int>;

void trim(Poly& a) {
  while (!a.empty() && a.back() == 0) a.pop_back();
}

int inv_mod(int a, int p) {
  for (int x = 1; x < p; ++x)
    if (a * x % p == 1) return x;
  return 0;
}

// Remainder of a modulo b over F_p.
Poly poly_mod(Poly a, Poly b, int p) {
  trim(a);
  trim(b);
  int lead_inv = inv_mod(b.back(), p);
  while (a.size() >= b.size()) {
    int c = a.back() * lead_inv % p;
    std::size_t shift = a.size() - b.size();
    for (std::size_t i = 0; i < b.size(); ++i) a[shift + i] = ((a[shift + i] - c * b[i]) % p + p) % p;
    trim(a);
  }
  return a;
}

Poly digits(Elem e, int p, int k) {
  Poly d(k);
  for (int i = 0; i < k; ++i) {
    d[i] = static_cast<int>(e % p);
    e /= p;
  }
  return d;
}

Elem undigits(const Poly& d, int p) {
  Elem e = 0;
  for (int i = static_cast<int>(d.size()) - 1; i >= 0; --i) e = e * p + static_cast<Elem>(d[i]);
  return e;
}

}  // namespace

bool is_irreducible(int p, const std::vector<int>& poly_in) {
  Poly poly = poly_in;
  for (int& c : poly) c = ((c % p) + p) % p;
  trim(poly);
  int deg = static_cast<int>(poly.size()) - 1;
  if (deg < 1) return false;
  if (deg == 1) return true;
  // Trial division by every monic polynomial of degree <= deg/2.
  for (int d = 1; d <= deg / 2; ++d) {
    long long count = 1;
    for (int i = 0; i < d; ++i) count *= p;
    for (long long idx = 0; idx < count; ++idx) {
      Poly div(d + 1);
      long long r = idx;
      for (int i = 0; i < d; ++i) {
        div[i] = static_cast<int>(r % p);
        r /= p;
      }
      div[d] = 1;
      if (poly_mod(poly, div, p).empty()) return false;
    }
  }
  return true;
}

std::shared_ptr<const FiniteField> FiniteField::make(int p, int k, std::vector<int> modulus) {
  if (!is_prime(p)) throw InputError("field characteristic must be prime, got " + std::to_string(p));
  if (k < 1 || k > 4) throw InputError("field degree must be in 1..4");
  if (k > 1 && modulus.empty()) {
    long long count = 1;
    for (int i = 0; i < k; ++i) count *= p;
    for (long long idx = 0; idx < count && modulus.empty(); ++idx) {
      Poly cand(k + 1);
      long long r = idx;
      for (int i = 0; i < k; ++i) {
        cand[i] = static_cast<int>(r % p);
        r /= p;
      }
      cand[k] = 1;
      if (is_irreducible(p, cand)) modulus = cand;
    }
  }
  if (k > 1) {
    if (static_cast<int>(modulus.size()) != k + 1 || modulus.back() % p != 1)
      throw InputError("modulus must be monic of degree k");
    if (!is_irreducible(p, modulus)) throw InputError("modulus is not irreducible");
  } else {
    modulus = {0, 1};
  }
  std::shared_ptr<FiniteField> f(new FiniteField());
  f->p_ = p;
  f->k_ = k;
  f->q_ = 1;
  for (int i = 0; i < k; ++i) f->q_ *= p;
  for (int& c : modulus) c = ((c % p) + p) % p;
  f->modulus_ = modulus;
  int q = f->q_;
  f->neg_.resize(q);
  for (Elem a = 0; a < static_cast<Elem>(q); ++a) {
    Poly d = digits(a, p, k);
    for (int& c : d) c = (p - c) % p;
    f->neg_[a] = undigits(d, p);
  }
  if (q <= 1024) {
    f->add_.resize(static_cast<std::size_t>(q) * q);
    f->mul_.resize(static_cast<std::size_t>(q) * q);
    for (Elem a = 0; a < static_cast<Elem>(q); ++a)
      for (Elem b = 0; b < static_cast<Elem>(q); ++b) {
        Poly da = digits(a, p, k), db = digits(b, p, k);
        for (int i = 0; i < k; ++i) da[i] = (da[i] + db[i]) % p;
        f->add_[a * q + b] = static_cast<std::uint16_t>(undigits(da, p));
        f->mul_[a * q + b] = static_cast<std::uint16_t>(f->mul_slow(a, b));
      }
  }
  f->inv_.assign(q, 0);
  for (Elem a = 1; a < static_cast<Elem>(q); ++a)
    for (Elem b = 1; b < static_cast<Elem>(q); ++b)
      if (f->mul(a, b) == 1) {
        f->inv_[a] = b;
        break;
      }
  for (Elem g = 1; g < static_cast<Elem>(q); ++g) {
    int order = 1;
    Elem x = g;
    while (x != 1) {
      x = f->mul(x, g);
      ++order;
    }
    if (order == q - 1) {
      f->primitive_ = g;
      break;
    }
  }
  return f;
}

std::shared_ptr<const FiniteField> FiniteField::of_order(int q) {
  static std::mutex mu;
  static std::map<int, Field> cache;
  auto pk = prime_power(q);
  if (!pk) throw InputError("q must be a prime power > 1, got " + std::to_string(q));
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(q);
  if (it != cache.end()) return it->second;
  auto f = make(pk->first, pk->second);
  cache.emplace(q, f);
  return f;
}

Elem FiniteField::mul_slow(Elem a, Elem b) const {
  Poly da = digits(a, p_, k_), db = digits(b, p_, k_);
  Poly prod(2 * k_, 0);
  for (int i = 0; i < k_; ++i)
    for (int j = 0; j < k_; ++j) prod[i + j] = (prod[i + j] + da[i] * db[j]) % p_;
  Poly r = k_ > 1 ? poly_mod(prod, modulus_, p_) : Poly{prod[0] % p_};
  r.resize(k_, 0);
  return undigits(r, p_);
}

Elem FiniteField::add(Elem a, Elem b) const {
  if (!add_.empty()) return add_[a * q_ + b];
  Poly da = digits(a, p_, k_), db = digits(b, p_, k_);
  for (int i = 0; i < k_; ++i) da[i] = (da[i] + db[i]) % p_;
  return undigits(da, p_);
}
Elem FiniteField::neg(Elem a) const { return neg_[a]; }
Elem FiniteField::sub(Elem a, Elem b) const { return add(a, neg_[b]); }
Elem FiniteField::mul(Elem a, Elem b) const {
  if (!mul_.empty()) return mul_[a * q_ + b];
  return mul_slow(a, b);
}
Elem FiniteField::inv(Elem a) const {
  if (a == 0) throw InputError("inverse of zero");
  return inv_[a];
}
bool FiniteField::is_square(Elem a) const {
  for (Elem x = 0; x < static_cast<Elem>(q_); ++x)
    if (mul(x, x) == a) return true;
  return false;
}
Elem FiniteField::from_int(long long v) const { return static_cast<Elem>(((v % p_) + p_) % p_); }

Matrix::Matrix(Field f, int rows, int cols)
    : f_(std::move(f)), rows_(rows), cols_(cols), a_(static_cast<std::size_t>(rows) * cols, 0) {}

Matrix Matrix::identity(Field f, int n) {
  Matrix m(std::move(f), n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1;
  return m;
}

Matrix Matrix::operator*(const Matrix& o) const {
  if (cols_ != o.rows_) throw InputError("matrix product shape mismatch");
  Matrix r(f_, rows_, o.cols_);
  for (int i = 0; i < rows_; ++i)
    for (int k = 0; k < cols_; ++k) {
      Elem x = (*this)(i, k);
      if (x == 0) continue;
      for (int j = 0; j < o.cols_; ++j) r(i, j) = f_->add(r(i, j), f_->mul(x, o(k, j)));
    }
  return r;
}

Matrix Matrix::operator+(const Matrix& o) const {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw InputError("matrix sum shape mismatch");
  Matrix r(f_, rows_, cols_);
  for (std::size_t i = 0; i < a_.size(); ++i) r.a_[i] = f_->add(a_[i], o.a_[i]);
  return r;
}

Matrix Matrix::operator-(const Matrix& o) const {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw InputError("matrix difference shape mismatch");
  Matrix r(f_, rows_, cols_);
  for (std::size_t i = 0; i < a_.size(); ++i) r.a_[i] = f_->sub(a_[i], o.a_[i]);
  return r;
}

Matrix Matrix::transpose() const {
  Matrix r(f_, cols_, rows_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) r(j, i) = (*this)(i, j);
  return r;
}

Matrix Matrix::scaled(Elem s) const {
  Matrix r = *this;
  for (auto& x : r.a_) x = f_->mul(x, s);
  return r;
}

bool Matrix::is_zero() const {
  return std::all_of(a_.begin(), a_.end(), [](Elem x) { return x == 0; });
}

Matrix Matrix::column(int c) const {
  Matrix r(f_, rows_, 1);
  for (int i = 0; i < rows_; ++i) r(i, 0) = (*this)(i, c);
  return r;
}

Matrix Matrix::hstack(const Matrix& o) const {
  if (rows_ != o.rows_) throw InputError("hstack shape mismatch");
  Matrix r(f_ ? f_ : o.f_, rows_, cols_ + o.cols_);
  for (int i = 0; i < rows_; ++i) {
    for (int j = 0; j < cols_; ++j) r(i, j) = (*this)(i, j);
    for (int j = 0; j < o.cols_; ++j) r(i, cols_ + j) = o(i, j);
  }
  return r;
}

Matrix Matrix::vstack(const Matrix& o) const {
  if (cols_ != o.cols_) throw InputError("vstack shape mismatch");
  Matrix r(f_ ? f_ : o.f_, rows_ + o.rows_, cols_);
  std::copy(a_.begin(), a_.end(), r.a_.begin());
  std::copy(o.a_.begin(), o.a_.end(), r.a_.begin() + static_cast<std::ptrdiff_t>(a_.size()));
  return r;
}

Matrix Matrix::submatrix(const std::vector<int>& rows, const std::vector<int>& cols) const {
  Matrix r(f_, static_cast<int>(rows.size()), static_cast<int>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) r(static_cast<int>(i), static_cast<int>(j)) = (*this)(rows[i], cols[j]);
  return r;
}

Echelon rref(const Matrix& a) {
  const auto& f = a.field();
  Matrix m = a;
  std::vector<int> pivots;
  int r = 0;
  for (int c = 0; c < m.cols() && r < m.rows(); ++c) {
    int piv = -1;
    for (int i = r; i < m.rows(); ++i)
      if (m(i, c) != 0) {
        piv = i;
        break;
      }
    if (piv < 0) continue;
    if (piv != r)
      for (int j = 0; j < m.cols(); ++j) std::swap(m(r, j), m(piv, j));
    Elem s = f->inv(m(r, c));
    for (int j = 0; j < m.cols(); ++j) m(r, j) = f->mul(m(r, j), s);
    for (int i = 0; i < m.rows(); ++i) {
      if (i == r || m(i, c) == 0) continue;
      Elem t = m(i, c);
      for (int j = 0; j < m.cols(); ++j) m(i, j) = f->sub(m(i, j), f->mul(t, m(r, j)));
    }
    pivots.push_back(c);
    ++r;
  }
  std::vector<int> keep(r);
  for (int i = 0; i < r; ++i) keep[i] = i;
  std::vector<int> cols(m.cols());
  for (int j = 0; j < m.cols(); ++j) cols[j] = j;
  Echelon e{m.submatrix(keep, cols), pivots};
  if (!e.reduced.field()) e.reduced = Matrix(f, r, a.cols());
  return e;
}

int rank(const Matrix& a) { return static_cast<int>(rref(a).pivots.size()); }

std::optional<Matrix> inverse(const Matrix& a) {
  if (a.rows() != a.cols()) return std::nullopt;
  auto s = solve(a, Matrix::identity(a.field(), a.rows()));
  if (!s.consistent || s.kernel.cols() != 0) return std::nullopt;
  return s.particular;
}

Matrix kernel_basis(const Matrix& a) {
  const auto& f = a.field();
  Echelon e = rref(a);
  std::vector<bool> is_piv(a.cols(), false);
  for (int c : e.pivots) is_piv[c] = true;
  std::vector<int> free;
  for (int c = 0; c < a.cols(); ++c)
    if (!is_piv[c]) free.push_back(c);
  Matrix k(f, a.cols(), static_cast<int>(free.size()));
  for (std::size_t t = 0; t < free.size(); ++t) {
    k(free[t], static_cast<int>(t)) = 1;
    for (std::size_t r = 0; r < e.pivots.size(); ++r)
      k(e.pivots[r], static_cast<int>(t)) = f->neg(e.reduced(static_cast<int>(r), free[t]));
  }
  return k;
}

SolveResult solve(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw InputError("solve: A and B must have the same number of rows");
  const auto& f = a.field();
  SolveResult res;
  res.kernel = kernel_basis(a);
  Echelon e = rref(a.hstack(b));
  res.consistent = true;
  for (int c : e.pivots)
    if (c >= a.cols()) res.consistent = false;
  res.particular = Matrix(f, a.cols(), b.cols());
  if (!res.consistent) return res;
  for (std::size_t r = 0; r < e.pivots.size(); ++r)
    for (int j = 0; j < b.cols(); ++j) res.particular(e.pivots[r], j) = e.reduced(static_cast<int>(r), a.cols() + j);
  return res;
}

void enumerate_subspaces(int n, int d, const Field& f, const std::function<void(const Matrix&)>& visit) {
  if (d < 0 || n < 0 || d > n) throw InputError("enumerate_subspaces requires 0 <= d <= n");
  const int q = f->q();
  std::vector<int> piv(d);
  // Iterate pivot sets in lexicographic order, then free entries.
  std::function<void(int, int)> choose = [&](int idx, int start) {
    if (idx == d) {
      std::vector<std::pair<int, int>> free_cells;
      for (int r = 0; r < d; ++r)
        for (int c = piv[r] + 1; c < n; ++c)
          if (std::find(piv.begin(), piv.end(), c) == piv.end()) free_cells.emplace_back(r, c);
      Matrix m(f, d, n);
      for (int r = 0; r < d; ++r) m(r, piv[r]) = 1;
      std::vector<int> counter(free_cells.size(), 0);
      while (true) {
        for (std::size_t t = 0; t < free_cells.size(); ++t) m(free_cells[t].first, free_cells[t].second) = static_cast<Elem>(counter[t]);
        visit(m);
        std::size_t t = 0;
        while (t < counter.size() && ++counter[t] == q) counter[t++] = 0;
        if (t == counter.size()) break;
      }
      return;
    }
    for (int c = start; c <= n - (d - idx); ++c) {
      piv[idx] = c;
      choose(idx + 1, c + 1);
    }
  };
  choose(0, 0);
}

std::uint64_t count_subspaces(int n, int d, const Field& f) {
  std::uint64_t c = 0;
  enumerate_subspaces(n, d, f, [&](const Matrix&) { ++c; });
  return c;
}

BigInt gl_order(int n, long long q) {
  BigInt r = 1, qn, qi = 1;
  mpz_ui_pow_ui(qn.get_mpz_t(), static_cast<unsigned long>(q), static_cast<unsigned long>(n));
  for (int i = 0; i < n; ++i) {
    r *= qn - qi;
    qi *= static_cast<long>(q);
  }
  return r;
}

BigInt binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  BigInt r;
  mpz_bin_uiui(r.get_mpz_t(), static_cast<unsigned long>(n), static_cast<unsigned long>(k));
  return r;
}

namespace qint {

BigInt integer(int n, long long q) {
  BigInt r = 0, p = 1;
  for (int i = 0; i < n; ++i) {
    r += p;
    p *= static_cast<long>(q);
  }
  return r;
}

BigInt factorial(int n, long long q) {
  BigInt r = 1;
  for (int i = 1; i <= n; ++i) r *= integer(i, q);
  return r;
}

BigInt binomial(int n, int k, long long q) {
  if (k < 0 || k > n) return 0;
  BigInt num = factorial(n, q), den = factorial(k, q) * factorial(n - k, q);
  return num / den;
}

std::vector<BigInt> binomial_poly(int n, int k) {
  if (k < 0 || k > n) return {};
  // q-Pascal: [n,k] = [n-1,k-1] + q^k [n-1,k].
  std::vector<std::vector<std::vector<BigInt>>> t(n + 1);
  for (int a = 0; a <= n; ++a) {
    t[a].resize(a + 1);
    t[a][0] = {1};
    t[a][a] = {1};
    for (int b = 1; b < a; ++b) {
      const auto& x = t[a - 1][b - 1];
      const auto& y = t[a - 1][b];
      std::vector<BigInt> r(std::max(x.size(), y.size() + b), 0);
      for (std::size_t i = 0; i < x.size(); ++i) r[i] += x[i];
      for (std::size_t i = 0; i < y.size(); ++i) r[i + b] += y[i];
      t[a][b] = r;
    }
  }
  return t[n][k];
}

}  // namespace qint

}  // namespace hall
