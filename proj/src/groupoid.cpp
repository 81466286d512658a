#include "hall/groupoid.hpp"

#include <algorithm>
#include <set>

#include "hall/budget.hpp"

namespace hall {

TableGroup::TableGroup(std::vector<std::vector<Idx>> table) : n_(static_cast<Idx>(table.size())) {
  t_.reserve(static_cast<std::size_t>(n_ * n_));
  for (const auto& row : table) {
    if (static_cast<Idx>(row.size()) != n_) throw InputError("group table must be square");
    for (Idx x : row) {
      if (x < 0 || x >= n_) throw InputError("group table entry out of range");
      t_.push_back(x);
    }
  }
  for (Idx a = 0; a < n_; ++a)
    if (mul(0, a) != a || mul(a, 0) != a) throw InputError("group element 0 must be the identity");
  inv_.assign(static_cast<std::size_t>(n_), -1);
  for (Idx a = 0; a < n_; ++a)
    for (Idx b = 0; b < n_; ++b)
      if (mul(a, b) == 0) {
        inv_[static_cast<std::size_t>(a)] = b;
        break;
      }
  for (Idx a = 0; a < n_; ++a)
    if (inv_[static_cast<std::size_t>(a)] < 0) throw InputError("group table has a non-invertible element");
}

std::shared_ptr<const TableGroup> TableGroup::cyclic(Idx n) {
  std::vector<std::vector<Idx>> t(static_cast<std::size_t>(n), std::vector<Idx>(static_cast<std::size_t>(n)));
  for (Idx a = 0; a < n; ++a)
    for (Idx b = 0; b < n; ++b) t[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = (a + b) % n;
  return std::make_shared<TableGroup>(std::move(t));
}

CodeGroup::CodeGroup(std::vector<Code> elements, std::function<Code(const Code&, const Code&)> mul)
    : elems_(std::move(elements)), mulf_(std::move(mul)) {
  for (std::size_t i = 0; i < elems_.size(); ++i) index_.emplace(elems_[i], static_cast<Idx>(i));
  const Idx n = order();
  if (n <= 1500) {
    Budget::charge(static_cast<std::uint64_t>(n * n), "group table");
    table_.resize(static_cast<std::size_t>(n * n));
    for (Idx a = 0; a < n; ++a)
      for (Idx b = 0; b < n; ++b) table_[static_cast<std::size_t>(a * n + b)] = index_of(mulf_(elems_[a], elems_[b]));
  }
  inv_.resize(static_cast<std::size_t>(n));
  for (Idx a = 0; a < n; ++a) {
    Idx prev = 0, cur = a;
    while (cur != 0) {
      prev = cur;
      cur = this->mul(cur, a);
    }
    inv_[static_cast<std::size_t>(a)] = a == 0 ? 0 : prev;
  }
}

Idx CodeGroup::mul(Idx a, Idx b) const {
  if (!table_.empty()) return table_[static_cast<std::size_t>(a * order() + b)];
  return index_of(mulf_(elems_[static_cast<std::size_t>(a)], elems_[static_cast<std::size_t>(b)]));
}

Idx CodeGroup::index_of(const Code& c) const {
  auto it = index_.find(c);
  if (it == index_.end()) throw InputError("element not in group");
  return it->second;
}

FiniteGroup::FiniteGroup() = default;

FiniteGroup::FiniteGroup(std::vector<std::shared_ptr<const GroupFactor>> factors) : factors_(std::move(factors)) {
  order_ = 1;
  for (const auto& f : factors_) {
    radix_.push_back(order_);
    order_ *= f->order();
  }
}

FiniteGroup FiniteGroup::product(const FiniteGroup& a, const FiniteGroup& b) {
  auto fs = a.factors_;
  fs.insert(fs.end(), b.factors_.begin(), b.factors_.end());
  return FiniteGroup(std::move(fs));
}

std::vector<Idx> FiniteGroup::split(Idx a) const {
  std::vector<Idx> parts(factors_.size());
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    parts[i] = a % factors_[i]->order();
    a /= factors_[i]->order();
  }
  return parts;
}

Idx FiniteGroup::join(const std::vector<Idx>& parts) const {
  Idx a = 0;
  for (std::size_t i = 0; i < factors_.size(); ++i) a += parts[i] * radix_[i];
  return a;
}

Idx FiniteGroup::mul(Idx a, Idx b) const {
  if (factors_.size() == 1) return factors_[0]->mul(a, b);
  Idx r = 0;
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    Idx n = factors_[i]->order();
    r += factors_[i]->mul(a % n, b % n) * radix_[i];
    a /= n;
    b /= n;
  }
  return r;
}

Idx FiniteGroup::inv(Idx a) const {
  if (factors_.size() == 1) return factors_[0]->inv(a);
  Idx r = 0;
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    Idx n = factors_[i]->order();
    r += factors_[i]->inv(a % n) * radix_[i];
    a /= n;
  }
  return r;
}

FiniteGroupoid::FiniteGroupoid(std::vector<ActionBlock> blocks) : blocks_(std::move(blocks)) {
  comp_of_.resize(blocks_.size());
  transport_.resize(blocks_.size());
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    const auto& blk = blocks_[b];
    if (static_cast<Idx>(blk.action.size()) != blk.group.order() * blk.num_objects)
      throw InputError("action table has the wrong size");
    comp_of_[b].assign(static_cast<std::size_t>(blk.num_objects), -1);
    transport_[b].assign(static_cast<std::size_t>(blk.num_objects), -1);
    for (Idx s = 0; s < blk.num_objects; ++s) {
      if (comp_of_[b][static_cast<std::size_t>(s)] >= 0) continue;
      Idx comp = static_cast<Idx>(reps_.size());
      reps_.push_back(Obj{static_cast<int>(b), s});
      stab_.emplace_back();
      Budget::charge(static_cast<std::uint64_t>(blk.group.order()), "groupoid skeleton");
      for (Idx g = 0; g < blk.group.order(); ++g) {
        Idx t = blk.act(g, s);
        if (comp_of_[b][static_cast<std::size_t>(t)] < 0) {
          comp_of_[b][static_cast<std::size_t>(t)] = comp;
          transport_[b][static_cast<std::size_t>(t)] = g;
        }
        if (t == s) stab_.back().push_back(g);
      }
    }
  }
}

FiniteGroupoid FiniteGroupoid::from_groups(const std::vector<std::pair<std::string, FiniteGroup>>& comps) {
  std::vector<ActionBlock> blocks;
  for (const auto& [label, g] : comps)
    blocks.push_back(make_block(g, 1, [](Idx, Idx s) { return s; }, {label}));
  return FiniteGroupoid(std::move(blocks));
}

FiniteGroupoid FiniteGroupoid::discrete(Idx n) {
  std::vector<std::pair<std::string, FiniteGroup>> comps;
  for (Idx i = 0; i < n; ++i) comps.emplace_back(std::to_string(i), FiniteGroup());
  return from_groups(comps);
}

ActionBlock FiniteGroupoid::make_block(FiniteGroup g, Idx n, const std::function<Idx(Idx, Idx)>& act,
                                       std::vector<std::string> labels) {
  ActionBlock blk;
  blk.group = std::move(g);
  blk.num_objects = n;
  blk.labels = std::move(labels);
  Budget::charge(static_cast<std::uint64_t>(blk.group.order() * n), "action table");
  blk.action.resize(static_cast<std::size_t>(blk.group.order() * n));
  for (Idx x = 0; x < blk.group.order(); ++x)
    for (Idx s = 0; s < n; ++s) blk.action[static_cast<std::size_t>(x * n + s)] = static_cast<std::int32_t>(act(x, s));
  return blk;
}

Idx FiniteGroupoid::num_objects() const {
  Idx n = 0;
  for (const auto& b : blocks_) n += b.num_objects;
  return n;
}

Idx FiniteGroupoid::component_of(const Obj& o) const {
  return comp_of_[static_cast<std::size_t>(o.block)][static_cast<std::size_t>(o.index)];
}

Idx FiniteGroupoid::transporter(const Obj& o) const {
  return transport_[static_cast<std::size_t>(o.block)][static_cast<std::size_t>(o.index)];
}

std::string FiniteGroupoid::label(const Obj& o) const {
  const auto& blk = block(o.block);
  if (static_cast<Idx>(blk.labels.size()) > o.index) return blk.labels[static_cast<std::size_t>(o.index)];
  return "b" + std::to_string(o.block) + ":" + std::to_string(o.index);
}

GroupoidFunctor::GroupoidFunctor(GroupoidPtr src, GroupoidPtr tgt, const ObjFn& obj, const MorFn& mor)
    : src_(std::move(src)), tgt_(std::move(tgt)) {
  obj_.resize(src_->blocks().size());
  mor_.resize(src_->blocks().size());
  for (std::size_t b = 0; b < src_->blocks().size(); ++b) {
    const auto& blk = src_->blocks()[b];
    obj_[b].resize(static_cast<std::size_t>(blk.num_objects));
    for (Idx s = 0; s < blk.num_objects; ++s) obj_[b][static_cast<std::size_t>(s)] = obj(static_cast<int>(b), s);
    Budget::charge(static_cast<std::uint64_t>(blk.group.order() * blk.num_objects), "functor table");
    mor_[b].resize(static_cast<std::size_t>(blk.group.order() * blk.num_objects));
    for (Idx g = 0; g < blk.group.order(); ++g)
      for (Idx s = 0; s < blk.num_objects; ++s)
        mor_[b][static_cast<std::size_t>(g * blk.num_objects + s)] = static_cast<std::int32_t>(mor(static_cast<int>(b), g, s));
  }
}

Idx GroupoidFunctor::mor(int block, Idx g, Idx s) const {
  const auto& blk = src_->block(block);
  return mor_[static_cast<std::size_t>(block)][static_cast<std::size_t>(g * blk.num_objects + s)];
}

GroupoidFunctor GroupoidFunctor::identity(GroupoidPtr g) {
  return GroupoidFunctor(g, g, [](int b, Idx s) { return Obj{b, s}; }, [](int, Idx x, Idx) { return x; });
}

GroupoidFunctor GroupoidFunctor::to_point(GroupoidPtr g, GroupoidPtr pt) {
  return GroupoidFunctor(g, pt, [](int, Idx) { return Obj{0, 0}; }, [](int, Idx, Idx) { return Idx{0}; });
}

std::string GroupoidFunctor::validate(Idx max_checks) const {
  Idx checks = 0;
  for (std::size_t b = 0; b < src_->blocks().size(); ++b) {
    const auto& blk = src_->blocks()[b];
    for (Idx s = 0; s < blk.num_objects; ++s) {
      Obj t = obj(Obj{static_cast<int>(b), s});
      if (mor(static_cast<int>(b), 0, s) != 0) return "identity not preserved at " + src_->label(Obj{static_cast<int>(b), s});
      for (Idx g = 0; g < blk.group.order(); ++g) {
        Obj t2 = obj(Obj{static_cast<int>(b), blk.act(g, s)});
        if (t2.block != t.block || tgt_->block(t.block).act(mor(static_cast<int>(b), g, s), t.index) != t2.index)
          return "morphism image has wrong endpoints at " + src_->label(Obj{static_cast<int>(b), s});
      }
      for (Idx g1 = 0; g1 < blk.group.order() && checks < max_checks; ++g1)
        for (Idx g2 = 0; g2 < blk.group.order() && checks < max_checks; ++g2, ++checks) {
          Idx s1 = blk.act(g1, s);
          Idx lhs = mor(static_cast<int>(b), blk.group.mul(g2, g1), s);
          Idx rhs = tgt_->block(t.block).group.mul(mor(static_cast<int>(b), g2, s1), mor(static_cast<int>(b), g1, s));
          if (lhs != rhs) return "composition not preserved at " + src_->label(Obj{static_cast<int>(b), s});
        }
    }
  }
  return "";
}

GroupoidFunctor compose(const GroupoidFunctor& second, const GroupoidFunctor& first) {
  if (first.target() != second.source()) throw InputError("compose: functors are not composable");
  return GroupoidFunctor(
      first.source(), second.target(), [&](int b, Idx s) { return second.obj(first.obj(Obj{b, s})); },
      [&](int b, Idx g, Idx s) {
        Obj t = first.obj(Obj{b, s});
        return second.mor(t.block, first.mor(b, g, s), t.index);
      });
}

ProductGroupoid product(const GroupoidPtr& a, const GroupoidPtr& b, const std::function<bool(int, int)>& keep) {
  ProductGroupoid res;
  std::vector<ActionBlock> blocks;
  for (std::size_t i = 0; i < a->blocks().size(); ++i)
    for (std::size_t j = 0; j < b->blocks().size(); ++j) {
      if (keep && !keep(static_cast<int>(i), static_cast<int>(j))) continue;
      const auto& ba = a->blocks()[i];
      const auto& bb = b->blocks()[j];
      Idx na = ba.num_objects, nb = bb.num_objects, oa = ba.group.order();
      std::vector<std::string> labels;
      for (Idx x = 0; x < na; ++x)
        for (Idx y = 0; y < nb; ++y)
          labels.push_back("(" + a->label(Obj{static_cast<int>(i), x}) + "," + b->label(Obj{static_cast<int>(j), y}) + ")");
      blocks.push_back(FiniteGroupoid::make_block(
          FiniteGroup::product(ba.group, bb.group), na * nb,
          [&](Idx g, Idx s) { return ba.act(g % oa, s / nb) * nb + bb.act(g / oa, s % nb); }, std::move(labels)));
      res.block_index[{static_cast<int>(i), static_cast<int>(j)}] = static_cast<int>(res.block_pairs.size());
      res.block_pairs.emplace_back(static_cast<int>(i), static_cast<int>(j));
    }
  auto g = std::make_shared<const FiniteGroupoid>(std::move(blocks));
  res.groupoid = g;
  auto pairs = res.block_pairs;
  res.proj_left = GroupoidFunctor(
      g, a, [&](int k, Idx s) { return Obj{pairs[k].first, s / b->block(pairs[k].second).num_objects}; },
      [&](int k, Idx x, Idx) { return x % a->block(pairs[k].first).group.order(); });
  res.proj_right = GroupoidFunctor(
      g, b, [&](int k, Idx s) { return Obj{pairs[k].second, s % b->block(pairs[k].second).num_objects}; },
      [&](int k, Idx x, Idx) { return x / a->block(pairs[k].first).group.order(); });
  return res;
}

GroupoidFunctor pairing(const GroupoidFunctor& f, const GroupoidFunctor& g, const ProductGroupoid& prod) {
  const auto& a = f.target();
  const auto& b = g.target();
  auto block_of = [&](int i, int j) {
    auto it = prod.block_index.find({i, j});
    if (it == prod.block_index.end())
      throw InputError("pairing lands outside the product blocks (" + std::to_string(i) + "," + std::to_string(j) + ")");
    return it->second;
  };
  return GroupoidFunctor(
      f.source(), prod.groupoid,
      [&](int k, Idx s) {
        Obj x = f.obj(Obj{k, s}), y = g.obj(Obj{k, s});
        return Obj{block_of(x.block, y.block), x.index * b->block(y.block).num_objects + y.index};
      },
      [&](int k, Idx e, Idx s) {
        Obj x = f.obj(Obj{k, s});
        return FiniteGroup::pair(f.mor(k, e, s), g.mor(k, e, s), a->block(x.block).group.order());
      });
}

Rational groupoid_cardinality(const FiniteGroupoid& g) {
  Rational r = 0;
  for (Idx c = 0; c < g.num_components(); ++c) r += Rational(1, static_cast<unsigned long>(g.automorphisms(c).size()));
  r.canonicalize();
  return r;
}

Fiber homotopy_fiber(const GroupoidFunctor& f, const Obj& b) {
  const auto& src = f.source();
  const auto& tgt = f.target();
  if (b.block < 0 || b.block >= static_cast<int>(tgt->blocks().size()) || b.index < 0 ||
      b.index >= tgt->block(b.block).num_objects)
    throw InputError("homotopy_fiber: object is not in the target groupoid");
  const auto& tblk = tgt->block(b.block);
  std::vector<ActionBlock> blocks;
  std::vector<int> src_block;
  std::vector<std::vector<std::pair<Idx, Idx>>> objects;
  for (std::size_t sb = 0; sb < src->blocks().size(); ++sb) {
    const auto& blk = src->blocks()[sb];
    std::vector<std::pair<Idx, Idx>> objs;
    for (Idx a = 0; a < blk.num_objects; ++a) {
      Obj fa = f.obj(Obj{static_cast<int>(sb), a});
      if (fa.block != b.block) continue;
      Budget::charge(static_cast<std::uint64_t>(tblk.group.order()), "homotopy fiber");
      for (Idx k = 0; k < tblk.group.order(); ++k)
        if (tblk.act(k, fa.index) == b.index) objs.emplace_back(a, k);
    }
    if (objs.empty()) continue;
    std::map<std::pair<Idx, Idx>, Idx> index;
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < objs.size(); ++i) {
      index.emplace(objs[i], static_cast<Idx>(i));
      labels.push_back("(" + src->label(Obj{static_cast<int>(sb), objs[i].first}) + ",k" + std::to_string(objs[i].second) + ")");
    }
    blocks.push_back(FiniteGroupoid::make_block(
        blk.group, static_cast<Idx>(objs.size()),
        [&](Idx g, Idx s) {
          auto [a, k] = objs[static_cast<std::size_t>(s)];
          Idx fg = f.mor(static_cast<int>(sb), g, a);
          return index.at({blk.act(g, a), tblk.group.mul(k, tblk.group.inv(fg))});
        },
        std::move(labels)));
    src_block.push_back(static_cast<int>(sb));
    objects.push_back(std::move(objs));
  }
  Fiber fib;
  fib.groupoid = std::make_shared<const FiniteGroupoid>(std::move(blocks));
  fib.to_source = GroupoidFunctor(
      fib.groupoid, src,
      [&](int k, Idx s) { return Obj{src_block[static_cast<std::size_t>(k)], objects[static_cast<std::size_t>(k)][static_cast<std::size_t>(s)].first}; },
      [](int, Idx g, Idx) { return g; });
  return fib;
}

Idx Pullback::find(int block, const Triple& t) const {
  Idx key = (t.a.index * size_b[static_cast<std::size_t>(block)] + t.b.index) * order_c[static_cast<std::size_t>(block)] + t.gamma;
  const auto& m = lookup[static_cast<std::size_t>(block)];
  auto it = m.find(key);
  return it == m.end() ? -1 : it->second;
}

Pullback homotopy_pullback(const GroupoidFunctor& f, const GroupoidFunctor& g) {
  if (f.target() != g.target()) throw InputError("homotopy_pullback: functors have different targets");
  const auto& A = f.source();
  const auto& B = g.source();
  const auto& C = f.target();
  Pullback pb;
  std::vector<ActionBlock> blocks;
  for (std::size_t ia = 0; ia < A->blocks().size(); ++ia)
    for (std::size_t ib = 0; ib < B->blocks().size(); ++ib) {
      const auto& ba = A->blocks()[ia];
      const auto& bb = B->blocks()[ib];
      std::vector<Pullback::Triple> objs;
      int cblock = -1;
      // Objects of B-block by their image in C.
      std::map<Obj, std::vector<Idx>> b_by_image;
      for (Idx y = 0; y < bb.num_objects; ++y) b_by_image[g.obj(Obj{static_cast<int>(ib), y})].push_back(y);
      for (Idx x = 0; x < ba.num_objects; ++x) {
        Obj fx = f.obj(Obj{static_cast<int>(ia), x});
        const auto& cb = C->block(fx.block);
        Budget::charge(static_cast<std::uint64_t>(cb.group.order()), "homotopy pullback");
        for (Idx gam = 0; gam < cb.group.order(); ++gam) {
          Obj t{fx.block, cb.act(gam, fx.index)};
          auto it = b_by_image.find(t);
          if (it == b_by_image.end()) continue;
          for (Idx y : it->second) objs.push_back({Obj{static_cast<int>(ia), x}, Obj{static_cast<int>(ib), y}, gam, fx});
          cblock = fx.block;
        }
      }
      if (objs.empty()) continue;
      const auto& cb = C->block(cblock);
      int blk_index = static_cast<int>(blocks.size());
      pb.order_c.push_back(cb.group.order());
      pb.size_b.push_back(bb.num_objects);
      pb.lookup.emplace_back();
      auto& lk = pb.lookup.back();
      std::vector<std::string> labels;
      for (std::size_t i = 0; i < objs.size(); ++i) {
        Idx key = (objs[i].a.index * bb.num_objects + objs[i].b.index) * cb.group.order() + objs[i].gamma;
        lk.emplace(key, static_cast<Idx>(i));
        labels.push_back("(" + A->label(objs[i].a) + "," + B->label(objs[i].b) + ",g" + std::to_string(objs[i].gamma) + ")");
      }
      Idx oa = ba.group.order();
      blocks.push_back(FiniteGroupoid::make_block(
          FiniteGroup::product(ba.group, bb.group), static_cast<Idx>(objs.size()),
          [&](Idx e, Idx s) {
            const auto& t = objs[static_cast<std::size_t>(s)];
            Idx h = e % oa, k = e / oa;
            Idx fh = f.mor(t.a.block, h, t.a.index);
            Idx gk = g.mor(t.b.block, k, t.b.index);
            Idx gam = cb.group.mul(gk, cb.group.mul(t.gamma, cb.group.inv(fh)));
            Pullback::Triple nt{Obj{t.a.block, ba.act(h, t.a.index)}, Obj{t.b.block, bb.act(k, t.b.index)}, gam, {}};
            Idx key = (nt.a.index * bb.num_objects + nt.b.index) * cb.group.order() + nt.gamma;
            return lk.at(key);
          },
          std::move(labels)));
      (void)blk_index;
      pb.triples.push_back(std::move(objs));
      pb.block_pairs.emplace_back(static_cast<int>(ia), static_cast<int>(ib));
    }
  pb.groupoid = std::make_shared<const FiniteGroupoid>(std::move(blocks));
  const auto* P = &pb;
  pb.proj_a = GroupoidFunctor(
      pb.groupoid, A, [&](int k, Idx s) { return P->triples[static_cast<std::size_t>(k)][static_cast<std::size_t>(s)].a; },
      [&](int k, Idx e, Idx) { return e % A->block(P->block_pairs[static_cast<std::size_t>(k)].first).group.order(); });
  pb.proj_b = GroupoidFunctor(
      pb.groupoid, B, [&](int k, Idx s) { return P->triples[static_cast<std::size_t>(k)][static_cast<std::size_t>(s)].b; },
      [&](int k, Idx e, Idx) { return e / A->block(P->block_pairs[static_cast<std::size_t>(k)].first).group.order(); });
  return pb;
}

namespace {
int pullback_block(const Pullback& pb, int ia, int ib) {
  for (std::size_t k = 0; k < pb.block_pairs.size(); ++k)
    if (pb.block_pairs[k] == std::make_pair(ia, ib)) return static_cast<int>(k);
  return -1;
}
}  // namespace

GroupoidFunctor comparison(const Pullback& pb, const GroupoidFunctor& f, const GroupoidFunctor& g,
                           const GroupoidFunctor& p, const GroupoidFunctor& q) {
  const auto& X = p.source();
  if (q.source() != X || p.target() != f.source() || q.target() != g.source())
    throw InputError("comparison: square is not well formed");
  for (std::size_t b = 0; b < X->blocks().size(); ++b) {
    const auto& blk = X->blocks()[b];
    for (Idx s = 0; s < blk.num_objects; ++s) {
      Obj x{static_cast<int>(b), s};
      Obj a = p.obj(x), bo = q.obj(x);
      if (!(f.obj(a) == g.obj(bo))) throw InputError("square does not commute on object " + X->label(x));
      for (Idx e = 0; e < blk.group.order(); ++e)
        if (f.mor(a.block, p.mor(x.block, e, s), a.index) != g.mor(bo.block, q.mor(x.block, e, s), bo.index))
          throw InputError("square does not commute on a morphism at " + X->label(x));
    }
  }
  const auto& A = f.source();
  return GroupoidFunctor(
      X, pb.groupoid,
      [&](int b, Idx s) {
        Obj a = p.obj(Obj{b, s}), bo = q.obj(Obj{b, s});
        int k = pullback_block(pb, a.block, bo.block);
        Idx idx = k < 0 ? -1 : pb.find(k, {a, bo, 0, {}});
        if (idx < 0) throw InputError("comparison: no pullback object for " + X->label(Obj{b, s}));
        return Obj{k, idx};
      },
      [&](int b, Idx e, Idx s) {
        Obj a = p.obj(Obj{b, s});
        return FiniteGroup::pair(p.mor(b, e, s), q.mor(b, e, s), A->block(a.block).group.order());
      });
}

GroupoidFunctor pullback_map(const Pullback& src, const Pullback& tgt, const GroupoidFunctor& ua,
                             const GroupoidFunctor& ub, const GroupoidFunctor& uc) {
  const auto& A2 = ua.target();
  auto image = [&](int k, Idx s) {
    const auto& t = src.triples[static_cast<std::size_t>(k)][static_cast<std::size_t>(s)];
    Obj a2 = ua.obj(t.a), b2 = ub.obj(t.b);
    Idx gam = uc.mor(t.fa.block, t.gamma, t.fa.index);
    int k2 = pullback_block(tgt, a2.block, b2.block);
    Idx idx = k2 < 0 ? -1 : tgt.find(k2, {a2, b2, gam, {}});
    if (idx < 0) throw InputError("pullback_map: cospan map does not commute");
    return Obj{k2, idx};
  };
  return GroupoidFunctor(
      src.groupoid, tgt.groupoid, image,
      [&](int k, Idx e, Idx s) {
        const auto& t = src.triples[static_cast<std::size_t>(k)][static_cast<std::size_t>(s)];
        Idx oa = src.proj_a.target()->block(t.a.block).group.order();
        Idx h = e % oa, kk = e / oa;
        Obj a2 = ua.obj(t.a);
        return FiniteGroup::pair(ua.mor(t.a.block, h, t.a.index), ub.mor(t.b.block, kk, t.b.index),
                                 A2->block(a2.block).group.order());
      });
}

Verdict is_equivalence(const GroupoidFunctor& f) {
  const auto& src = f.source();
  const auto& tgt = f.target();
  std::vector<Idx> hit(static_cast<std::size_t>(tgt->num_components()), -1);
  for (Idx c = 0; c < src->num_components(); ++c) {
    Obj r = src->representative(c);
    Obj t = f.obj(r);
    Idx tc = tgt->component_of(t);
    if (hit[static_cast<std::size_t>(tc)] >= 0)
      return {false, "not fully faithful: non-isomorphic objects " + src->label(src->representative(hit[static_cast<std::size_t>(tc)])) +
                         " and " + src->label(r) + " both map to the class of " + tgt->label(t)};
    hit[static_cast<std::size_t>(tc)] = c;
    const auto& aut = src->automorphisms(c);
    std::set<Idx> images;
    for (Idx g : aut) images.insert(f.mor(r.block, g, r.index));
    std::size_t tgt_aut = tgt->automorphisms(tc).size();
    if (images.size() != aut.size())
      return {false, "not faithful at " + src->label(r) + ": |Aut| = " + std::to_string(aut.size()) + ", image size " +
                         std::to_string(images.size())};
    if (tgt_aut != aut.size())
      return {false, "not full at " + src->label(r) + ": |Aut| = " + std::to_string(aut.size()) + " but target |Aut| = " +
                         std::to_string(tgt_aut)};
  }
  for (Idx tc = 0; tc < tgt->num_components(); ++tc)
    if (hit[static_cast<std::size_t>(tc)] < 0)
      return {false, "not essentially surjective: class of " + tgt->label(tgt->representative(tc)) + " is missed"};
  return {true, ""};
}

Rational LinFunction::at(Idx comp) const {
  auto it = values.find(comp);
  return it == values.end() ? Rational(0) : it->second;
}

void LinFunction::prune() {
  for (auto it = values.begin(); it != values.end();) {
    if (it->second == 0)
      it = values.erase(it);
    else
      ++it;
  }
}

bool LinFunction::operator==(const LinFunction& o) const {
  LinFunction a = *this, b = o;
  a.prune();
  b.prune();
  return a.values == b.values;
}

LinFunction LinFunction::ones(GroupoidPtr g) {
  LinFunction f{g, {}};
  for (Idx c = 0; c < g->num_components(); ++c) f.values[c] = 1;
  return f;
}

LinFunction LinFunction::delta(GroupoidPtr g, Idx comp, Rational v) {
  LinFunction f{std::move(g), {}};
  f.values[comp] = std::move(v);
  return f;
}

LinFunction lin_pullback(const GroupoidFunctor& f, const LinFunction& phi) {
  LinFunction out{f.source(), {}};
  for (Idx c = 0; c < f.source()->num_components(); ++c) {
    Rational v = phi.at(f.target()->component_of(f.obj(f.source()->representative(c))));
    if (v != 0) out.values[c] = v;
  }
  return out;
}

LinFunction lin_pushforward(const GroupoidFunctor& f, const LinFunction& phi) {
  const auto& src = f.source();
  const auto& tgt = f.target();
  std::set<Idx> targets;
  for (const auto& [c, v] : phi.values)
    if (v != 0) targets.insert(tgt->component_of(f.obj(src->representative(c))));
  LinFunction out{tgt, {}};
  for (Idx y : targets) {
    Fiber fib = homotopy_fiber(f, tgt->representative(y));
    Rational total = 0;
    for (Idx z = 0; z < fib.groupoid->num_components(); ++z) {
      Obj a = fib.to_source.obj(fib.groupoid->representative(z));
      Rational v = phi.at(src->component_of(a));
      if (v == 0) continue;
      total += v / Rational(static_cast<unsigned long>(fib.groupoid->automorphisms(z).size()));
    }
    total.canonicalize();
    if (total != 0) out.values[y] = total;
  }
  return out;
}

}  // namespace hall
