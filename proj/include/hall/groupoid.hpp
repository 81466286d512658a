#pragma once
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "hall/rational.hpp"

namespace hall {

using Idx = std::int64_t;

// A factor of a finite group. Element 0 is the identity.
class GroupFactor {
 public:
  virtual ~GroupFactor() = default;
  virtual Idx order() const = 0;
  virtual Idx mul(Idx a, Idx b) const = 0;
  virtual Idx inv(Idx a) const = 0;
};

// Group given by an explicit multiplication table.
class TableGroup : public GroupFactor {
 public:
  explicit TableGroup(std::vector<std::vector<Idx>> table);
  static std::shared_ptr<const TableGroup> cyclic(Idx n);
  static std::shared_ptr<const TableGroup> trivial() { return cyclic(1); }
  Idx order() const override { return n_; }
  Idx mul(Idx a, Idx b) const override { return t_[static_cast<std::size_t>(a * n_ + b)]; }
  Idx inv(Idx a) const override { return inv_[static_cast<std::size_t>(a)]; }

 private:
  Idx n_;
  std::vector<Idx> t_, inv_;
};

// Group whose elements are integer codes multiplied by a callback.
class CodeGroup : public GroupFactor {
 public:
  using Code = std::vector<std::int32_t>;
  // elements[0] must be the identity.
  CodeGroup(std::vector<Code> elements, std::function<Code(const Code&, const Code&)> mul);
  Idx order() const override { return static_cast<Idx>(elems_.size()); }
  Idx mul(Idx a, Idx b) const override;
  Idx inv(Idx a) const override { return inv_[static_cast<std::size_t>(a)]; }
  const Code& element(Idx a) const { return elems_[static_cast<std::size_t>(a)]; }
  Idx index_of(const Code& c) const;

 private:
  std::vector<Code> elems_;
  std::function<Code(const Code&, const Code&)> mulf_;
  std::map<Code, Idx> index_;
  std::vector<Idx> table_, inv_;
};

// Direct product of factors; elements are mixed-radix indices.
class FiniteGroup {
 public:
  FiniteGroup();  // trivial group
  explicit FiniteGroup(std::vector<std::shared_ptr<const GroupFactor>> factors);
  static FiniteGroup product(const FiniteGroup& a, const FiniteGroup& b);

  Idx order() const { return order_; }
  Idx mul(Idx a, Idx b) const;
  Idx inv(Idx a) const;
  static constexpr Idx identity() { return 0; }
  std::vector<Idx> split(Idx a) const;
  Idx join(const std::vector<Idx>& parts) const;
  const std::vector<std::shared_ptr<const GroupFactor>>& factors() const { return factors_; }
  // In product(a, b) the element (x, y) has index x + a.order() * y.
  static Idx pair(Idx x, Idx y, Idx left_order) { return x + left_order * y; }

 private:
  std::vector<std::shared_ptr<const GroupFactor>> factors_;
  std::vector<Idx> radix_;
  Idx order_ = 1;
};

// Action groupoid [objects / group]; morphisms (g, s) : s -> g.s.
struct ActionBlock {
  FiniteGroup group;
  Idx num_objects = 0;
  std::vector<std::int32_t> action;  // action[g * num_objects + s]
  std::vector<std::string> labels;   // optional, one per object

  Idx act(Idx g, Idx s) const { return action[static_cast<std::size_t>(g * num_objects + s)]; }
};

struct Obj {
  int block = 0;
  Idx index = 0;
  bool operator==(const Obj&) const = default;
  auto operator<=>(const Obj&) const = default;
};

// Finite groupoid stored as a disjoint union of action groupoids, with its skeleton
// (orbit representatives, automorphism groups and transporters) computed on construction.
class FiniteGroupoid {
 public:
  FiniteGroupoid() = default;
  explicit FiniteGroupoid(std::vector<ActionBlock> blocks);
  // Skeletal input: one object per component with the given automorphism group.
  static FiniteGroupoid from_groups(const std::vector<std::pair<std::string, FiniteGroup>>& comps);
  static FiniteGroupoid discrete(Idx n);
  static FiniteGroupoid point() { return discrete(1); }
  // Builds a block from an action callback.
  static ActionBlock make_block(FiniteGroup g, Idx n, const std::function<Idx(Idx, Idx)>& act,
                                std::vector<std::string> labels = {});

  const std::vector<ActionBlock>& blocks() const { return blocks_; }
  const ActionBlock& block(int b) const { return blocks_[static_cast<std::size_t>(b)]; }
  Idx num_objects() const;

  // Skeleton.
  Idx num_components() const { return static_cast<Idx>(reps_.size()); }
  Obj representative(Idx comp) const { return reps_[static_cast<std::size_t>(comp)]; }
  Idx component_of(const Obj& o) const;
  // Elements g of the block group with g.rep = rep.
  const std::vector<Idx>& automorphisms(Idx comp) const { return stab_[static_cast<std::size_t>(comp)]; }
  // Element g with g.rep = o.
  Idx transporter(const Obj& o) const;
  std::string label(const Obj& o) const;

 private:
  std::vector<ActionBlock> blocks_;
  std::vector<std::vector<Idx>> comp_of_;    // per block, per object
  std::vector<std::vector<Idx>> transport_;  // per block, per object
  std::vector<Obj> reps_;
  std::vector<std::vector<Idx>> stab_;
};

using GroupoidPtr = std::shared_ptr<const FiniteGroupoid>;

// Strict functor between action-groupoid presentations.
class GroupoidFunctor {
 public:
  using ObjFn = std::function<Obj(int block, Idx s)>;
  // Image of the morphism (g, s) as an element of the target block group.
  using MorFn = std::function<Idx(int block, Idx g, Idx s)>;

  GroupoidFunctor() = default;
  GroupoidFunctor(GroupoidPtr src, GroupoidPtr tgt, const ObjFn& obj, const MorFn& mor);
  static GroupoidFunctor identity(GroupoidPtr g);
  static GroupoidFunctor to_point(GroupoidPtr g, GroupoidPtr pt);

  const GroupoidPtr& source() const { return src_; }
  const GroupoidPtr& target() const { return tgt_; }
  Obj obj(const Obj& s) const { return obj_[static_cast<std::size_t>(s.block)][static_cast<std::size_t>(s.index)]; }
  Idx mor(int block, Idx g, Idx s) const;

  // Checks identities, composition and source/target compatibility; returns "" if valid.
  std::string validate(Idx max_checks = 200000) const;

 private:
  GroupoidPtr src_, tgt_;
  std::vector<std::vector<Obj>> obj_;
  std::vector<std::vector<std::int32_t>> mor_;  // per block: [g * n + s]
};

GroupoidFunctor compose(const GroupoidFunctor& second, const GroupoidFunctor& first);

struct ProductGroupoid {
  GroupoidPtr groupoid;
  GroupoidFunctor proj_left, proj_right;
  std::vector<std::pair<int, int>> block_pairs;
  std::map<std::pair<int, int>, int> block_index;
};
// keep(i, j) selects which block pairs to build; empty keeps all.
ProductGroupoid product(const GroupoidPtr& a, const GroupoidPtr& b, const std::function<bool(int, int)>& keep = {});
// (f, g) : X -> A x B.
GroupoidFunctor pairing(const GroupoidFunctor& f, const GroupoidFunctor& g, const ProductGroupoid& prod);

Rational groupoid_cardinality(const FiniteGroupoid& g);

struct Fiber {
  GroupoidPtr groupoid;   // objects (a, k : F(a) -> b)
  GroupoidFunctor to_source;
};
Fiber homotopy_fiber(const GroupoidFunctor& f, const Obj& b);

// Iso-comma groupoid of A -F-> C <-G- B with objects (a, b, gamma : F(a) -> G(b)).
struct Pullback {
  GroupoidPtr groupoid;
  GroupoidFunctor proj_a, proj_b;
  struct Triple {
    Obj a, b;
    Idx gamma;
    Obj fa;  // F(a) in C, the source of gamma
  };
  std::vector<std::vector<Triple>> triples;  // per block, per object
  std::vector<std::pair<int, int>> block_pairs;
  // Object index of a triple inside its block, or -1.
  Idx find(int block, const Triple& t) const;

  std::vector<Idx> order_c;  // per block, order of the C-block group
  std::vector<Idx> size_b;   // per block, number of objects in the B-block
  std::vector<std::unordered_map<Idx, Idx>> lookup;
};
Pullback homotopy_pullback(const GroupoidFunctor& f, const GroupoidFunctor& g);

// Functor X -> A x^h_C B from a strictly commuting square f p = g q.
// Throws InputError with a witness when the square does not commute.
GroupoidFunctor comparison(const Pullback& pb, const GroupoidFunctor& f, const GroupoidFunctor& g,
                           const GroupoidFunctor& p, const GroupoidFunctor& q);

// Map of pullbacks induced by a strictly commuting map of cospans.
GroupoidFunctor pullback_map(const Pullback& src, const Pullback& tgt, const GroupoidFunctor& ua,
                             const GroupoidFunctor& ub, const GroupoidFunctor& uc);

struct Verdict {
  bool ok = true;
  std::string witness;
};
Verdict is_equivalence(const GroupoidFunctor& f);

// Finitely supported function on pi_0, keyed by component index.
struct LinFunction {
  GroupoidPtr base;
  std::map<Idx, Rational> values;

  Rational at(Idx comp) const;
  void prune();
  bool operator==(const LinFunction& o) const;
  static LinFunction ones(GroupoidPtr g);
  static LinFunction delta(GroupoidPtr g, Idx comp, Rational v = 1);
};

LinFunction lin_pullback(const GroupoidFunctor& f, const LinFunction& phi);
LinFunction lin_pushforward(const GroupoidFunctor& f, const LinFunction& phi);

}  // namespace hall
