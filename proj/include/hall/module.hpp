#pragma once
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hall/hall.hpp"
#include "hall/instance.hpp"
#include "hall/sconstruct.hpp"
#include "hall/simplicial.hpp"

namespace hall {

// An object together with extra data (a form, a framing section), acted on by a group.
struct Decorated {
  Rep rep;
  std::vector<std::int32_t> extra;
  bool operator==(const Decorated&) const = default;
  auto operator<=>(const Decorated&) const = default;
};

// Recipe for a simplicial groupoid Y_n of objects T with flags 0 = U_0 <= U_1 <= ... <= U_n inside T,
// whose restriction to {i_0 < ... < i_k} reduces T by U_{i_0}. It maps to the S-construction by
// keeping the flag and forgetting T.
struct FlagRecipe {
  InstancePtr inst;
  // Level-0 objects of each size; every reduction must land among them.
  std::function<std::vector<Decorated>(const SizeKey&)> objects;
  std::function<FiniteGroup(const SizeKey&)> group;
  std::function<Decorated(Idx g, const Decorated&)> act;
  // Image of a group element in inst->aut_group(d).
  std::function<Idx(Idx g, const SizeKey& d)> base_element;
  // May U be the largest member of a flag in T?
  std::function<bool(const Decorated&, const Sub&)> admissible;
  // Subobject B >= U with T // U = B / U.
  std::function<Sub(const Decorated&, const Sub&)> ambient;
  std::function<Decorated(const Decorated& t, const Sub& u, const Sub& b)> reduce;
  std::function<Idx(Idx g, const Decorated& t, const Sub& u, const Sub& b)> reduce_element;
  std::function<std::string(const Decorated&)> label;
  // Full subcategory for the flags and for the S-construction target.
  SizeFilter sizes;
  ObjectFilter flag_objects;
};

class FlagConstruction {
 public:
  struct Entry {
    Decorated top;
    std::vector<Sub> chain;  // U_0 .. U_n
  };
  FlagConstruction(FlagRecipe recipe, SizeKey cap, int n_max);

  const SimplicialPtr& simplicial() const { return y_; }
  const SConstructionPtr& target() const { return x_; }
  const SimplicialMap& forget() const { return f_; }
  const FlagRecipe& recipe() const;
  const Entry& entry(int n, const Obj& o) const;
  // Object of Y_0 holding t, if present.
  std::optional<Obj> locate0(const Decorated& t) const;

 private:
  struct Data;
  std::shared_ptr<Data> data_;
  SimplicialPtr y_;
  SConstructionPtr x_;
  SimplicialMap f_;
};
using FlagConstructionPtr = std::shared_ptr<const FlagConstruction>;

// Vertexwise dual twisted by the quiver involution, with Theta = theta_sign * vertex sign * evaluation.
// The structure map of P(V) at alpha is arrow_sign(alpha) * transpose(V_sigma(alpha)).
class Duality {
 public:
  // Linear instances only. Signs default to +1; an instance without an involution uses the identity.
  Duality(InstancePtr inst, int theta_sign, std::vector<int> vertex_signs = {}, std::vector<int> arrow_signs = {});

  const InstancePtr& instance() const { return inst_; }
  const Field& field() const { return f_; }
  int theta_sign() const { return theta_; }
  int sign(int vertex) const { return theta_ * vsign_[static_cast<std::size_t>(vertex)]; }
  int arrow_sign(int arrow) const { return asign_[static_cast<std::size_t>(arrow)]; }
  int partner(int vertex) const { return sigma_v_[static_cast<std::size_t>(vertex)]; }
  int arrow_partner(int arrow) const { return sigma_a_[static_cast<std::size_t>(arrow)]; }
  // Vertices carrying an independent Gram block: i <= sigma(i).
  bool primary(int vertex) const { return vertex <= partner(vertex); }
  // Sign -1 on a fixed vertex in characteristic 2 asks for an alternating block.
  bool alternating(int vertex) const;
  SizeKey dual_size(const SizeKey& d) const;
  bool self_dual(const SizeKey& d) const { return dual_size(d) == d; }
  bool is_vect() const { return inst_->kind() == ProtoExactInstance::Kind::VectFq; }

  // Checks P(Theta_U) Theta_{P(U)} = id and naturality of Theta on every object of size d; "" if fine.
  std::string check_double_dual(const SizeKey& d) const;
  nlohmann::ordered_json to_json() const;

 private:
  InstancePtr inst_;
  Field f_;
  int theta_ = 1;
  std::vector<int> vsign_, asign_, sigma_v_, sigma_a_;
};
using DualityPtr = std::shared_ptr<const Duality>;

// Gram blocks per vertex: gram[i] is d_i x d_sigma(i) with B_i(x, y) = x^T gram[i] y.
struct SymmetricForm {
  Rep rep;
  std::vector<Matrix> gram;
};

// Checks symmetry, invertibility, the alternating condition and compatibility with arrows; "" if valid.
std::string validate_form(const Duality& dual, const SymmetricForm& form);
Decorated encode_form(const Duality& dual, const SymmetricForm& form);
SymmetricForm decode_form(const Duality& dual, const Decorated& d);
// Transport along g in inst->aut_group(size).
SymmetricForm act_form(const Duality& dual, Idx g, const SymmetricForm& form);
// Every valid form of size d, in a fixed order.
std::vector<SymmetricForm> all_forms(const Duality& dual, const SizeKey& d);

struct FormClass {
  std::string key;
  SymmetricForm representative;
  BigInt isometry_order;
};

// Isometry classes of size d, found by orbit enumeration. For vect_fq the keys follow the invariants
// (dimension, then "+"/"-" for the discriminant class in odd characteristic, "a" for alternating
// orthogonal forms in characteristic 2); elsewhere keys are "<size>#<k>".
std::vector<FormClass> enumerate_symmetric_forms(const Duality& dual, const SizeKey& d);

struct Reduction {
  Sub sub, perp;
  std::string sub_key;  // iso class of U in the instance
  SymmetricForm reduced;
  std::string reduced_key;
};

class HallModule;

// Isotropic U of size e in N with U^perp and N // U; e = nullopt lists every size.
std::vector<Reduction> isotropic_subobjects(const HallModule& module, const SymmetricForm& form,
                                            const std::optional<SizeKey>& e = {});

struct HallModuleElement {
  std::map<std::string, Rational> coeffs;

  static HallModuleElement basis(const std::string& key, Rational c = 1);
  void prune();
  Rational at(const std::string& key) const;
  HallModuleElement& operator+=(const HallModuleElement& o);
  HallModuleElement scaled(const Rational& c) const;
  bool operator==(const HallModuleElement& o) const;
  // Keys in the given order, or lexicographic.
  nlohmann::ordered_json to_json(const std::function<bool(const std::string&, const std::string&)>& less = {}) const;
};

struct ModuleConstant {
  std::uint64_t naive = 0;  // isotropic U' <= N with U' ~ U and N // U' ~ M
  Rational weighted;        // sum over isometry orbits of such U' of |Isom N| / |Stab U'|
};

// Hall module of symmetric forms over a duality, for forms of size <= cap.
class HallModule {
 public:
  HallModule(DualityPtr dual, SizeKey cap);

  const DualityPtr& duality() const { return dual_; }
  const SizeKey& cap() const { return cap_; }
  const InstancePtr& instance() const { return dual_->instance(); }

  const std::vector<FormClass>& classes(const SizeKey& d) const;
  std::vector<std::string> basis(const SizeKey& d) const;
  std::vector<std::string> basis_below(const SizeKey& cap) const;
  const FormClass& form_class(const std::string& key) const;
  std::string key_of(const SymmetricForm& form) const;
  SizeKey size_of(const std::string& key) const;
  bool key_less(const std::string& a, const std::string& b) const;

  // The zero form.
  HallModuleElement unit() const;
  ModuleConstant structure_constant(const std::string& u, const std::string& m, const std::string& n) const;
  // Needs no isometry group, so it works past kIsometryLimit.
  std::uint64_t naive_constant(const std::string& u, const std::string& m, const std::string& n) const;
  // 1_U * 1^P_M with the weighted constants.
  HallModuleElement act_basis(const std::string& u, const std::string& m) const;
  HallModuleElement act(const HallElement& a, const HallModuleElement& v) const;
  // Naive constants of 1_U * 1^P_M, for comparison.
  HallModuleElement act_basis_naive(const std::string& u, const std::string& m) const;

  // Groups larger than this are not enumerated; ResourceError instead.
  static constexpr std::uint64_t kIsometryLimit = 400000;

 private:
  struct Sites;
  struct Classified;
  const Sites& sites(const std::string& n, const SizeKey& e) const;
  const Classified& classified(const SizeKey& d) const;
  void check_cap(const SizeKey& d) const;

  DualityPtr dual_;
  SizeKey cap_;
  mutable std::mutex mu_;
  mutable std::map<SizeKey, std::shared_ptr<const Classified>> classes_;
  mutable std::map<std::string, SizeKey> key_size_;
  mutable std::map<std::pair<std::string, SizeKey>, std::shared_ptr<const Sites>> sites_;
  mutable std::map<std::pair<std::string, std::string>, HallModuleElement> products_;
};

// Module axiom (a b) * v = a * (b * v) over basis triples with total size <= cap.
struct ModuleAxiomReport {
  std::size_t triples = 0;
  bool pass = true;
  std::string witness;
  nlohmann::ordered_json to_json() const;
};
ModuleAxiomReport check_module_axiom(const HallModule& module, const SizeKey& cap);

// R-construction: forms with isotropic flags, over the S-construction of the instance.
FlagConstructionPtr r_construction(const DualityPtr& dual, const SizeKey& cap, int n_max);
// Pushforward along d_1 of (F_1^* delta_U) (d_0^* delta_M) on Y_1: a function on Y_0.
LinFunction span_action(const FlagConstruction& r, const std::string& u, const Obj& m);
// 1_U * 1^P_M computed through the R_1 span by groupoid pullback and pushforward.
HallModuleElement act_through_span(const FlagConstruction& r, const HallModule& module, const std::string& u,
                                   const std::string& m);

// Naive, weighted and closed-form constants for 1_n * 1^P_{2m} in symplectic vect_fq.
struct ReconciliationRow {
  int n = 0, m = 0, q = 0;
  std::uint64_t naive = 0;
  std::optional<Rational> weighted;
  std::string weighted_note;
  BigInt closed_form;       // q^{n(n+1)/2} [n+m choose n]_q
  BigInt grassmannian;      // points of the isotropic Grassmannian IGr(n, 2(n+m))
  Rational aut_rescaled;    // naive |Aut U| |Aut M| / |Aut N|
  Rational aut_inverse;     // naive |Aut N| / (|Aut U| |Aut M|)
};
struct ReconciliationReport {
  std::vector<ReconciliationRow> rows;
  std::string finding;
  nlohmann::ordered_json to_json() const;
};
ReconciliationReport reconciliation_report(const std::vector<std::pair<int, int>>& nm, const std::vector<int>& qs);

// ---- stable framed ----

struct Stability {
  std::vector<std::pair<Rational, Rational>> zeta;  // (re, im) per vertex, each in the upper half plane
  std::vector<int> framing;
  Rational phase;  // in (0, 1]
  static Stability from_json(const nlohmann::json& j);
  nlohmann::ordered_json to_json() const;
};

class FramedModule {
 public:
  // inst must be linear; cap bounds dimension vectors.
  FramedModule(InstancePtr inst, Stability st, SizeKey cap, int n_max = 2);

  const InstancePtr& instance() const { return inst_; }
  const Stability& stability() const { return st_; }
  bool semistable(const Rep& r) const;  // zero counts as semistable
  bool stable_framed(const Rep& r, const std::vector<Matrix>& section) const;
  // Iso keys of semistable objects of the phase, sizes <= cap.
  std::vector<std::string> semistable_keys() const;
  // Components of Y_0 (stable framed pairs up to iso and scalar), labelled.
  std::vector<std::string> module_basis() const;
  const FlagConstruction& construction() const { return *y_; }

  HallModuleElement act_basis(const std::string& u, const std::string& m) const;
  HallModuleElement act(const HallElement& a, const HallModuleElement& v) const;
  Report certificate(int n_max) const;
  // (a b) * v = a * (b * v) on semistable basis pairs and module basis elements within cap.
  ModuleAxiomReport check_axiom() const;
  nlohmann::ordered_json to_json() const;

 private:
  InstancePtr inst_;
  Stability st_;
  SizeKey cap_;
  FlagConstructionPtr y_;
  std::vector<std::string> labels_;  // per Y_0 component
  std::map<std::string, Idx> comp_of_;
};

}  // namespace hall
