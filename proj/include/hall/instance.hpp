#pragma once
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hall/ffield.hpp"
#include "hall/groupoid.hpp"

namespace hall {

// Dimension vector, one entry per vertex.
using SizeKey = std::vector<int>;

std::string size_string(const SizeKey& d);
SizeKey size_add(const SizeKey& a, const SizeKey& b);
SizeKey size_sub(const SizeKey& a, const SizeKey& b);
bool size_leq(const SizeKey& a, const SizeKey& b);
int size_total(const SizeKey& d);
// All d with 0 <= d <= cap componentwise, ordered by total then lexicographically.
std::vector<SizeKey> sizes_below(const SizeKey& cap);

struct Quiver {
  struct Arrow {
    int source = 0, target = 0;
    std::string name;
  };
  std::vector<std::string> vertices;
  std::vector<Arrow> arrows;
  // Optional anti-involution: vertex permutation and arrow permutation.
  std::vector<int> vertex_involution, arrow_involution;
  bool nilpotent = false;

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  bool acyclic() const;
  bool is_jordan() const;
  // Throws InputError on a malformed quiver or involution.
  void validate() const;

  static Quiver point();
  static Quiver jordan();
  static Quiver a2();            // 1 -> 2
  static Quiver d4_inward();     // three outer vertices into the centre
  static Quiver from_json(const nlohmann::json& j);
  nlohmann::ordered_json to_json() const;
};

// A representation: per arrow the structure map, concatenated.
// Linear: d_target x d_source matrix, row-major, entries in F_q.
// F1: for each source element (1-based) its image in 0..d_target, 0 being the base point.
struct Rep {
  SizeKey dim;
  std::vector<std::int32_t> data;
  bool operator==(const Rep&) const = default;
  auto operator<=>(const Rep&) const = default;
};

// A subobject: per vertex a reduced echelon basis (linear) or a sorted subset (F1), concatenated.
struct Sub {
  SizeKey dim;
  std::vector<std::int32_t> data;
  bool operator==(const Sub&) const = default;
  auto operator<=>(const Sub&) const = default;
};

// Per-vertex components of a morphism, in the same encodings as arrow data.
struct Morphism {
  std::vector<std::vector<std::int32_t>> parts;
  bool operator==(const Morphism&) const = default;
};

struct Site {
  Sub sub;
  Rep sub_rep, quot_rep;  // charted
  std::string sub_key, quot_key;
};

struct ExtClass {
  std::string middle;
  Rep middle_rep;   // sub occupies the leading coordinates
  std::string description;
};

using SiteCounts = std::map<std::pair<std::string, std::string>, std::uint64_t>;

// Finitary proto-exact category of quiver representations over F_q or F_1.
class ProtoExactInstance {
 public:
  enum class Kind { VectFq, VectF1, RepFq, RepF1, NilJordanFq };

  virtual ~ProtoExactInstance() = default;

  Kind kind() const { return kind_; }
  const Quiver& quiver() const { return quiver_; }
  int num_vertices() const { return quiver_.num_vertices(); }
  // Field order, or 1 over F_1.
  virtual int q() const = 0;
  virtual bool exact() const = 0;
  // e.g. "vect_fq(q=2)"
  std::string name() const;
  SizeKey zero_size() const { return SizeKey(static_cast<std::size_t>(num_vertices()), 0); }
  // Parses "2" or "(1,1)" or "1,1".
  SizeKey parse_size(const std::string& s) const;

  // Objects.
  virtual std::vector<Rep> all_reps(const SizeKey& d) const = 0;
  std::vector<Rep> enumerate_objects(const SizeKey& d) const;
  std::vector<std::string> keys_of_size(const SizeKey& d) const;
  virtual std::string iso_key(const Rep& r) const = 0;
  // Canonical representative for a key produced by iso_key; InputError if unknown.
  Rep object(const std::string& key) const;
  SizeKey size_of(const std::string& key) const;
  // Orders keys by size then by text.
  bool key_less(const std::string& a, const std::string& b) const;
  virtual std::string describe(const Rep& r) const;
  virtual std::string validate_rep(const Rep& r) const = 0;

  // Morphisms.
  virtual std::vector<Morphism> hom_set(const Rep& u, const Rep& v) const = 0;
  virtual BigInt hom_count(const Rep& u, const Rep& v) const;
  virtual bool is_inflation(const Morphism& f, const Rep& u, const Rep& v) const = 0;
  virtual bool is_deflation(const Morphism& f, const Rep& u, const Rep& v) const = 0;
  virtual Morphism inclusion(const Rep& v, const Sub& s) const = 0;
  virtual Morphism projection(const Rep& v, const Sub& s) const = 0;
  virtual bool is_morphism(const Morphism& f, const Rep& u, const Rep& v) const = 0;
  virtual Morphism compose(const Morphism& g, const Morphism& f, const Rep& u, const Rep& v, const Rep& w) const = 0;
  virtual bool is_zero(const Morphism& f) const = 0;

  virtual BigInt aut_order(const Rep& r) const = 0;
  std::vector<Site> admissible_subobjects(const Rep& v) const;
  // Site counts keyed by (sub key, quotient key); memoized per iso class.
  SiteCounts site_counts(const std::string& v_key) const;
  virtual std::vector<ExtClass> ext1_classes(const Rep& w, const Rep& u) const;

  // Action-groupoid plumbing used by the S-construction.
  virtual FiniteGroup aut_group(const SizeKey& d) const = 0;
  virtual Rep act(Idx g, const Rep& r) const = 0;
  virtual std::vector<Sub> subobjects(const Rep& v, const SizeKey& d) const = 0;
  virtual Sub act_sub(Idx g, const Rep& v, const Sub& s) const = 0;
  virtual Sub zero_sub(const Rep& v) const = 0;
  virtual Sub full_sub(const Rep& v) const = 0;
  virtual bool contains(const Rep& v, const Sub& big, const Sub& small) const = 0;
  // b / a in canonical coordinates; identity chart when a = 0 and b = v.
  virtual Rep subquotient(const Rep& v, const Sub& a, const Sub& b) const = 0;
  // c / a inside the chart of b / a, for a <= c <= b.
  virtual Sub relative_sub(const Rep& v, const Sub& a, const Sub& b, const Sub& c) const = 0;
  // The map b/a -> g(b)/g(a) induced by g, as an element of aut_group(dim b - dim a).
  virtual Idx induced_element(Idx g, const Rep& v, const Sub& a, const Sub& b) const = 0;

  // Linear instances only; the defaults throw InputError.
  virtual Field field() const;
  virtual std::vector<Matrix> arrow_maps(const Rep& r) const;
  // Per vertex: rows spanning the subspace.
  virtual std::vector<Matrix> sub_bases(const Rep& v, const Sub& s) const;
  // Per vertex: coordinates of b/a (k x n) and a section (n x k) of the chart used by subquotient.
  virtual std::pair<std::vector<Matrix>, std::vector<Matrix>> chart_maps(const Rep& v, const Sub& a, const Sub& b) const;
  virtual std::vector<Matrix> element_matrices(Idx g, const SizeKey& d) const;
  virtual Idx element_index(const std::vector<Matrix>& parts, const SizeKey& d) const;
  // Sub spanned per vertex by the given rows, which must span a subrepresentation.
  virtual Sub sub_from_rows(const Rep& v, const std::vector<Matrix>& rows) const;

 protected:
  ProtoExactInstance(Kind kind, Quiver quiver);
  // Registers a canonical representative under its key.
  void remember(const std::string& key, const Rep& canonical) const;
  virtual SiteCounts compute_site_counts(const Rep& v) const;
  // Representations whose keys cover every class of size d.
  virtual std::vector<Rep> canonical_candidates(const SizeKey& d) const;
  SizeKey size_from_key(const std::string& key) const;

  Kind kind_;
  Quiver quiver_;
  mutable std::mutex mu_;
  mutable std::map<std::string, Rep> registry_;
  mutable std::map<std::string, SiteCounts> site_cache_;
  mutable std::map<SizeKey, std::vector<std::string>> keys_cache_;
};

using InstancePtr = std::shared_ptr<const ProtoExactInstance>;

InstancePtr instance_vect_fq(int q);
InstancePtr instance_vect_f1();
InstancePtr instance_rep_fq(const Quiver& quiver, int q);
InstancePtr instance_rep_f1(const Quiver& quiver);
InstancePtr instance_nil_jordan_fq(int q);
// By name: vect_fq, vect_f1, rep_fq, rep_f1, nil_jordan_fq.
InstancePtr make_instance(const std::string& name, int q, const std::optional<Quiver>& quiver);

// Helpers shared with the module code.
std::shared_ptr<const CodeGroup> general_linear_group(int n, const Field& f);
std::shared_ptr<const CodeGroup> symmetric_group(int n);
Matrix matrix_from_code(const Field& f, int rows, int cols, const std::vector<std::int32_t>& code,
                        std::size_t offset = 0);
void append_code(std::vector<std::int32_t>& out, const Matrix& m);
// Partition from the ranks of powers of a nilpotent matrix.
std::vector<int> jordan_type(const Matrix& x);
std::string partition_string(const std::vector<int>& parts);

}  // namespace hall
