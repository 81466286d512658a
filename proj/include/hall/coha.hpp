#pragma once
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "hall/rational.hpp"

// Cohomological Hall algebra of the m-loop quiver as a shuffle algebra, and its signed-shuffle module.
namespace hall::coha {

using Exponents = std::vector<int>;

// Polynomial in a fixed number of variables with rational coefficients.
struct Poly {
  int nvars = 0;
  std::map<Exponents, Rational> terms;

  static Poly constant(int nvars, const Rational& c);
  static Poly variable(int nvars, int i, const Rational& c = 1);
  void prune();
  bool is_zero() const;
  Poly operator+(const Poly& o) const;
  Poly operator*(const Poly& o) const;
  Poly scaled(const Rational& c) const;
  // Largest total degree; -1 for zero.
  int degree() const;
  bool homogeneous() const;
  bool operator==(const Poly& o) const;
};

// Linear form sum_i coeffs[i] x_i.
using LinearForm = std::vector<Rational>;
Poly to_poly(const LinearForm& l);
// Exact division; throws std::logic_error when l does not divide p.
Poly divide_exact(const Poly& p, const LinearForm& l);

// Sum of num_t / prod(den_t) over a common denominator; throws std::logic_error if the total is not polynomial.
struct RationalTerm {
  Poly num;
  std::vector<LinearForm> den;
};
Poly sum_to_polynomial(const std::vector<RationalTerm>& terms, int nvars);

// Partitions of n into at most k parts, as length-k non-increasing vectors, in lexicographically decreasing order.
std::vector<Exponents> partitions(int n, int k);

// Symmetric polynomial in x_1..x_weight, in the monomial symmetric basis m_lambda. |x_i| = 2.
struct SymPoly {
  int weight = 0;
  std::map<Exponents, Rational> coeffs;  // lambda as a non-increasing vector of length weight

  static SymPoly monomial(int weight, Exponents lambda, const Rational& c = 1);
  static SymPoly one(int weight) { return monomial(weight, Exponents(static_cast<std::size_t>(weight), 0)); }
  // Throws std::logic_error if p is not symmetric.
  static SymPoly from_poly(const Poly& p);
  Poly expand() const;
  void prune();
  bool is_zero() const;
  SymPoly operator+(const SymPoly& o) const;
  SymPoly scaled(const Rational& c) const;
  bool operator==(const SymPoly& o) const;
  // Cohomological degree 2 * polynomial degree; -1 for zero.
  int degree() const;

  nlohmann::ordered_json to_json() const;
  // {"weight": d, "terms": {"m(2,1)": "3", ...}}, or "d" for 1 in weight d, or "d:2,1" for m_(2,1).
  static SymPoly parse(const std::string& text);
};

// Polynomial in z_1..z_weight invariant under permutations and sign changes, in the basis m_mu(z^2). |z_i| = 2.
struct SignedSymPoly {
  int weight = 0;
  std::map<Exponents, Rational> coeffs;  // mu: exponents of z^2

  static SignedSymPoly monomial(int weight, Exponents mu, const Rational& c = 1);
  static SignedSymPoly one(int weight) { return monomial(weight, Exponents(static_cast<std::size_t>(weight), 0)); }
  // Throws std::logic_error unless p is invariant under the signed symmetric group.
  static SignedSymPoly from_poly(const Poly& p);
  Poly expand() const;
  void prune();
  bool is_zero() const;
  SignedSymPoly operator+(const SignedSymPoly& o) const;
  SignedSymPoly scaled(const Rational& c) const;
  bool operator==(const SignedSymPoly& o) const;
  int degree() const;

  // Keys show z exponents: "m(2)" is z_1^2 + ... + z_e^2.
  nlohmann::ordered_json to_json() const;
  // Same forms as SymPoly::parse; exponents are those of z and must be even ("1:2" is m(2)).
  static SignedSymPoly parse(const std::string& text);
};

// Shuffle product with kernel prod (x''_l - x'_k)^(m-1); m = 0 sums rational functions.
SymPoly shuffle_product(const SymPoly& f, const SymPoly& g, int m);
// Signed-shuffle action with prefactor 2^((m-1)d) and kernel (prod(-x_i) prod(-x_i-x_j) prod(x_i^2-z_j^2))^(m-1).
SignedSymPoly module_action(const SymPoly& f, const SignedSymPoly& g, int m);

// Cohomological degree shift of the weight-d part: the Euler form (1-m) d^2.
int euler_shift(int m, int d);
// Polynomial degree of the action kernel for weights d acting on e (before the m-1 power).
int action_kernel_degree(int d, int e);

// Integer table indexed by weight 0..weight_cap and cohomological degree min_degree..degree_cap.
struct Series {
  int weight_cap = 0, min_degree = 0, degree_cap = 0;
  std::vector<std::vector<BigInt>> table;

  Series(int weight_cap, int min_degree, int degree_cap);
  BigInt at(int weight, int degree) const;
  BigInt& at(int weight, int degree);
  nlohmann::ordered_json to_json() const;
  // Rows = weight, columns = cohomological degree.
  std::string to_csv() const;
};

// dim H_d in each cohomological degree (partitions into <= d parts), optionally shifted by euler_shift.
Series hilbert_series(int m, int weight_cap, int degree_cap, bool shift);
// Multiplicities of V^prim: super plethystic logarithm of the shifted series times (1 - t^u_degree).
// Throws std::logic_error on a negative or non-integral multiplicity. Needs m >= 1.
// Degrees run from euler_shift(m, weight_cap) to degree_cap.
Series dt_invariants(int m, int weight_cap, int degree_cap, int u_degree = 2);
// dim of M / (H_+ * M) by degree, from the ranks of the action images.
Series wprim(int m, int weight_cap, int degree_cap);
// dim of the module component of weight e in each degree: partitions of k/4 into <= e parts.
Series module_series(int weight_cap, int degree_cap);

}  // namespace hall::coha
