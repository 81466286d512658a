#pragma once
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hall/rational.hpp"

namespace hall {

using Elem = std::uint32_t;

// F_{p^k}; elements are base-p digit strings of polynomials modulo the modulus.
class FiniteField {
 public:
  // modulus: coefficients low to high, monic, degree k. Empty selects a built-in.
  static std::shared_ptr<const FiniteField> make(int p, int k = 1, std::vector<int> modulus = {});
  // Accepts prime powers q = p^k with k <= 4.
  static std::shared_ptr<const FiniteField> of_order(int q);

  int p() const { return p_; }
  int k() const { return k_; }
  int q() const { return q_; }
  const std::vector<int>& modulus() const { return modulus_; }

  Elem add(Elem a, Elem b) const;
  Elem sub(Elem a, Elem b) const;
  Elem neg(Elem a) const;
  Elem mul(Elem a, Elem b) const;
  Elem inv(Elem a) const;
  // A generator of the multiplicative group.
  Elem primitive() const { return primitive_; }
  bool is_square(Elem a) const;
  // Image of an integer under Z -> F_p -> F.
  Elem from_int(long long v) const;

 private:
  FiniteField() = default;
  Elem mul_slow(Elem a, Elem b) const;

  int p_ = 2, k_ = 1, q_ = 2;
  std::vector<int> modulus_;
  std::vector<std::uint16_t> add_, mul_;
  std::vector<Elem> neg_, inv_;
  Elem primitive_ = 1;
};

using Field = std::shared_ptr<const FiniteField>;

bool is_prime(int n);
// Decomposes q = p^k; nullopt when q is not a prime power.
std::optional<std::pair<int, int>> prime_power(int q);
bool is_irreducible(int p, const std::vector<int>& poly);

class Matrix {
 public:
  Matrix() = default;
  Matrix(Field f, int rows, int cols);
  static Matrix identity(Field f, int n);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  const Field& field() const { return f_; }
  Elem operator()(int r, int c) const { return a_[static_cast<std::size_t>(r) * cols_ + c]; }
  Elem& operator()(int r, int c) { return a_[static_cast<std::size_t>(r) * cols_ + c]; }
  const std::vector<Elem>& data() const { return a_; }
  std::vector<Elem>& data() { return a_; }

  Matrix operator*(const Matrix& o) const;
  Matrix operator+(const Matrix& o) const;
  Matrix operator-(const Matrix& o) const;
  bool operator==(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_ && a_ == o.a_; }
  Matrix transpose() const;
  Matrix scaled(Elem s) const;
  bool is_zero() const;
  Matrix column(int c) const;
  Matrix hstack(const Matrix& o) const;
  Matrix vstack(const Matrix& o) const;
  Matrix submatrix(const std::vector<int>& rows, const std::vector<int>& cols) const;

 private:
  Field f_;
  int rows_ = 0, cols_ = 0;
  std::vector<Elem> a_;
};

struct Echelon {
  Matrix reduced;           // reduced row echelon form, zero rows dropped
  std::vector<int> pivots;  // pivot column of each row
};

Echelon rref(const Matrix& a);
int rank(const Matrix& a);
std::optional<Matrix> inverse(const Matrix& a);

struct SolveResult {
  bool consistent = false;
  Matrix particular;  // X with A X = B
  Matrix kernel;      // columns span {x : A x = 0}
};
// Throws InputError on shape mismatch.
SolveResult solve(const Matrix& a, const Matrix& b);
Matrix kernel_basis(const Matrix& a);

// Visits every d-dim subspace of F^n once, as its d x n reduced echelon basis.
void enumerate_subspaces(int n, int d, const Field& f, const std::function<void(const Matrix&)>& visit);
std::uint64_t count_subspaces(int n, int d, const Field& f);

BigInt gl_order(int n, long long q);

// Quantum integers evaluated at an integer q.
namespace qint {
BigInt integer(int n, long long q);
BigInt factorial(int n, long long q);
BigInt binomial(int n, int k, long long q);
// Coefficients (low to high) of the Gaussian binomial as a polynomial in q.
std::vector<BigInt> binomial_poly(int n, int k);
}  // namespace qint

BigInt binomial(int n, int k);

}  // namespace hall
