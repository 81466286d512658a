#pragma once
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hall/instance.hpp"
#include "hall/qlinalg.hpp"
#include "hall/sconstruct.hpp"

namespace hall {

// Finitely supported function on iso keys; zero coefficients are dropped.
struct HallElement {
  std::map<std::string, Rational> coeffs;

  static HallElement basis(const std::string& key, Rational c = 1);
  void prune();
  Rational at(const std::string& key) const;
  HallElement& operator+=(const HallElement& o);
  HallElement operator+(const HallElement& o) const;
  HallElement scaled(const Rational& c) const;
  bool operator==(const HallElement& o) const;
  // {"key": "p/q", ...}
  nlohmann::ordered_json to_json(const ProtoExactInstance& inst) const;
};

using Tensor2 = std::map<std::pair<std::string, std::string>, Rational>;
using Tensor3 = std::map<std::vector<std::string>, Rational>;

// Hall algebra of an instance, optionally restricted to the full subcategory of objects
// whose sizes pass `sub`. Products whose size leaves `cap` throw ResourceError.
class HallAlgebra {
 public:
  explicit HallAlgebra(InstancePtr inst, SizeFilter sub = {}, std::optional<SizeKey> cap = {});

  const InstancePtr& instance() const { return inst_; }
  const std::optional<SizeKey>& cap() const { return cap_; }
  bool in_subcategory(const SizeKey& d) const { return !sub_ || sub_(d); }
  // Basis keys of size d in the subcategory, sorted by key_less.
  std::vector<std::string> basis(const SizeKey& d) const;
  std::vector<std::string> basis_below(const SizeKey& cap) const;

  std::uint64_t structure_constant_count(const std::string& u, const std::string& w, const std::string& v) const;
  // |Aut V| / (|Aut U| |Aut W|) * |Ext^1(W,U)_V| / |Hom(W,U)|; exact instances only.
  BigInt structure_constant_autext(const std::string& u, const std::string& w, const std::string& v) const;

  HallElement unit() const;
  HallElement multiply(const HallElement& a, const HallElement& b) const;
  HallElement product(const std::vector<HallElement>& factors) const;

  // Incidence coproduct of delta_v by pulling back along d_1 and pushing forward along (d_2, d_0).
  Tensor2 comultiply(const std::string& v) const;
  // (Delta x id) Delta and (id x Delta) Delta of delta_v.
  Tensor3 comultiply_left(const std::string& v) const;
  Tensor3 comultiply_right(const std::string& v) const;

 private:
  void check_cap(const SizeKey& d) const;
  SConstructionPtr construction_for(const SizeKey& d) const;

  InstancePtr inst_;
  SizeFilter sub_;
  std::optional<SizeKey> cap_;
  mutable std::mutex mu_;
  mutable std::map<SizeKey, SConstructionPtr> constructions_;
  mutable std::map<std::string, Tensor2> coproducts_;
};

// Structure constant as a polynomial in q, interpolated over primes and checked at a held-out prime.
struct HallPolynomial {
  std::vector<BigInt> coeffs;  // low to high
  std::vector<int> primes;
  int holdout = 0;
  std::vector<BigInt> samples;  // brute-force values at primes
  BigInt holdout_value;
  bool polynomial = false;  // integer interpolant matching the holdout
  std::string message;

  nlohmann::ordered_json to_json() const;
};

// family(q) builds the instance at q; keys must be spelled identically for every q.
HallPolynomial hall_polynomial(const std::function<InstancePtr(int)>& family, const std::string& u,
                               const std::string& w, const std::string& v, const std::vector<int>& primes, int holdout);

// Dimension of the span of all products of generators with total size d.
int subalgebra_component_dim(const HallAlgebra& alg, const std::vector<HallElement>& generators, const SizeKey& d);

struct WordRelations {
  std::vector<std::string> words;   // generator names concatenated with spaces
  std::vector<HallElement> values;  // product of each word
  QMatrix relations;                // primitive integer vectors over words
  nlohmann::ordered_json to_json(const ProtoExactInstance& inst) const;
};
// Linear relations among all generator words of total size d.
WordRelations word_relations(const HallAlgebra& alg, const std::vector<std::pair<std::string, HallElement>>& generators,
                             const SizeKey& d);

// Inclusion of the full subcategory `sub` of sizes into the ambient instance, with CULF and IKEO
// certificates and brute-force hom checks on basis elements below `cap`.
struct InducedMap {
  Report culf, ikeo;
  bool algebra_hom = false, coalgebra_hom = false;
  std::string algebra_witness, coalgebra_witness;
  // A hom property is asserted only when its certificate passed.
  bool algebra_asserted() const { return ikeo.pass && algebra_hom; }
  bool coalgebra_asserted() const { return culf.pass && coalgebra_hom; }
  bool warning() const { return !ikeo.pass || !culf.pass; }
  HallElement apply(const HallElement& a) const { return a; }
  nlohmann::ordered_json to_json() const;
};
InducedMap induced_algebra_map(const InstancePtr& inst, const SizeFilter& sub, const SizeKey& cap, int n_max = 2);

// Multiplication table over basis keys below cap with size(U) + size(W) <= cap.
struct MultTable {
  std::vector<std::string> keys;
  std::map<std::pair<std::string, std::string>, HallElement> cells;
  nlohmann::ordered_json to_json(const ProtoExactInstance& inst) const;
  std::string to_csv() const;
};
MultTable multiplication_table(const HallAlgebra& alg, const SizeKey& cap);

}  // namespace hall
