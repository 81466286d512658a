#include "hall/sconstruct.hpp"

#include <algorithm>

#include "hall/budget.hpp"

namespace hall {

struct SConstruction::Data {
  InstancePtr inst;
  SizeKey cap;
  int n_max = 0;
  SizeFilter allowed;
  std::vector<std::vector<Block>> levels;
  std::vector<std::map<std::vector<SizeKey>, int>> block_of_profile;
  std::vector<GroupoidPtr> groupoids;
  std::vector<std::string> x1_keys;
  std::map<std::string, Idx> x1_components;

  std::optional<Obj> locate(int n, const Flag& f) const {
    std::vector<SizeKey> profile;
    for (std::size_t i = 1; i < f.chain.size(); ++i) profile.push_back(f.chain[i].dim);
    const auto& bp = block_of_profile[static_cast<std::size_t>(n)];
    auto it = bp.find(profile);
    if (it == bp.end()) return std::nullopt;
    const auto& blk = levels[static_cast<std::size_t>(n)][static_cast<std::size_t>(it->second)];
    auto jt = blk.index.find(encode(f));
    if (jt == blk.index.end()) return std::nullopt;
    return Obj{it->second, jt->second};
  }

  Obj must_locate(int n, const Flag& f) const {
    auto o = locate(n, f);
    if (!o) throw std::logic_error("S-construction: flag outside level " + std::to_string(n));
    return *o;
  }

  static std::string encode(const Flag& f) {
    std::string s;
    auto put = [&](const std::vector<std::int32_t>& v) {
      for (auto x : v) s += std::to_string(x) + ",";
      s += ";";
    };
    put(f.top.data);
    for (const auto& u : f.chain) put(u.data);
    return s;
  }
};

namespace {

std::string flag_label(const ProtoExactInstance& inst, const SConstruction::Flag& f) {
  std::string s = inst.describe(f.top) + " flag";
  for (std::size_t i = 1; i + 1 < f.chain.size(); ++i) s += " " + size_string(f.chain[i].dim);
  return s;
}

}  // namespace

SConstruction::SConstruction(InstancePtr inst, SizeKey cap, int n_max, SizeFilter allowed, ObjectFilter objects)
    : data_(std::make_shared<Data>()) {
  if (n_max < 0 || n_max > TruncatedSimplicialGroupoid::kMaxLevel) throw InputError("S-construction level must be in 0..4");
  if (static_cast<int>(cap.size()) != inst->num_vertices()) throw InputError("cap has the wrong number of entries");
  for (int c : cap)
    if (c < 0) throw InputError("cap must be nonnegative");
  auto& d = *data_;
  d.inst = std::move(inst);
  d.cap = std::move(cap);
  d.n_max = n_max;
  d.allowed = std::move(allowed);
  const auto& I = *d.inst;
  SizeKey zero = I.zero_size();
  auto ok = [&](const SizeKey& s) { return !d.allowed || d.allowed(s); };

  d.levels.resize(static_cast<std::size_t>(n_max) + 1);
  d.block_of_profile.resize(static_cast<std::size_t>(n_max) + 1);
  std::vector<SizeKey> tops;
  for (const auto& t : sizes_below(d.cap))
    if (ok(t)) tops.push_back(t);

  for (int n = 0; n <= n_max; ++n) {
    // Profiles d_1 <= ... <= d_n with every difference d_j - d_i (d_0 = 0) allowed.
    std::vector<std::vector<SizeKey>> profiles;
    if (n == 0) {
      profiles.push_back({});
    } else {
      for (const auto& t : tops) {
        std::vector<SizeKey> cur;
        std::function<void(int)> rec = [&](int k) {
          if (k == n - 1) {
            cur.push_back(t);
            bool good = true;
            for (std::size_t j = 0; j < cur.size() && good; ++j) {
              if (!ok(cur[j])) good = false;
              for (std::size_t i = 0; i < j && good; ++i)
                if (!ok(size_sub(cur[j], cur[i]))) good = false;
            }
            if (good) profiles.push_back(cur);
            cur.pop_back();
            return;
          }
          SizeKey lo = cur.empty() ? zero : cur.back();
          for (const auto& s : sizes_below(t))
            if (size_leq(lo, s)) {
              cur.push_back(s);
              rec(k + 1);
              cur.pop_back();
            }
        };
        rec(0);
      }
    }
    auto& blocks = d.levels[static_cast<std::size_t>(n)];
    std::vector<ActionBlock> action_blocks;
    for (const auto& prof : profiles) {
      Block blk;
      blk.profile = prof;
      SizeKey top = n == 0 ? zero : prof.back();
      for (const auto& v : I.all_reps(top)) {
        Sub z = I.zero_sub(v), full = I.full_sub(v);
        std::vector<Sub> chain{z};
        std::function<void(int)> rec = [&](int k) {
          if (k == n) {
            if (n > 0) chain.push_back(full);
            bool keep = true;
            if (objects)
              for (std::size_t j = 1; j < chain.size() && keep; ++j)
                for (std::size_t i = 0; i < j && keep; ++i) keep = objects(I.subquotient(v, chain[i], chain[j]));
            if (!keep) {
              if (n > 0) chain.pop_back();
              return;
            }
            Flag f{v, chain};
            blk.index.emplace(Data::encode(f), static_cast<Idx>(blk.flags.size()));
            blk.flags.push_back(std::move(f));
            if (n > 0) chain.pop_back();
            return;
          }
          if (k == n - 1) {
            rec(n);
            return;
          }
          for (auto& s : I.subobjects(v, prof[static_cast<std::size_t>(k)])) {
            if (!I.contains(v, s, chain.back())) continue;
            chain.push_back(std::move(s));
            rec(k + 1);
            chain.pop_back();
          }
        };
        rec(0);
      }
      if (blk.flags.empty()) continue;
      d.block_of_profile[static_cast<std::size_t>(n)][prof] = static_cast<int>(blocks.size());
      FiniteGroup grp = I.aut_group(top);
      Budget::charge(static_cast<std::uint64_t>(grp.order()) * blk.flags.size(), "S-construction action table");
      std::vector<std::string> labels;
      for (const auto& f : blk.flags) labels.push_back(flag_label(I, f));
      const Block& bref = blk;
      action_blocks.push_back(FiniteGroupoid::make_block(
          grp, static_cast<Idx>(blk.flags.size()),
          [&](Idx g, Idx s) {
            const Flag& f = bref.flags[static_cast<std::size_t>(s)];
            Flag h{I.act(g, f.top), {}};
            for (const auto& u : f.chain) h.chain.push_back(I.act_sub(g, f.top, u));
            auto it = bref.index.find(Data::encode(h));
            if (it == bref.index.end()) throw std::logic_error("S-construction: action leaves the block");
            return it->second;
          },
          std::move(labels)));
      blocks.push_back(std::move(blk));
    }
    d.groupoids.push_back(std::make_shared<const FiniteGroupoid>(std::move(action_blocks)));
  }

  if (n_max >= 1) {
    const auto& x1 = *d.groupoids[1];
    for (Idx c = 0; c < x1.num_components(); ++c) {
      Obj r = x1.representative(c);
      const auto& f = d.levels[1][static_cast<std::size_t>(r.block)].flags[static_cast<std::size_t>(r.index)];
      std::string key = I.iso_key(f.top);
      d.x1_keys.push_back(key);
      d.x1_components[key] = c;
    }
  }

  auto data = data_;
  auto restrict_fn = [data](int n, const std::vector<int>& subset) {
    const auto& D = *data;
    const auto& I = *D.inst;
    int k = static_cast<int>(subset.size()) - 1;
    int lo = subset.front(), hi = subset.back();
    auto image = [&D, &I, subset, lo, hi](const Flag& f) {
      Flag h{I.subquotient(f.top, f.chain[static_cast<std::size_t>(lo)], f.chain[static_cast<std::size_t>(hi)]), {}};
      h.chain.push_back(I.zero_sub(h.top));
      for (std::size_t j = 1; j + 1 < subset.size(); ++j)
        h.chain.push_back(I.relative_sub(f.top, f.chain[static_cast<std::size_t>(lo)], f.chain[static_cast<std::size_t>(hi)],
                                         f.chain[static_cast<std::size_t>(subset[j])]));
      if (subset.size() > 1) h.chain.push_back(I.full_sub(h.top));
      return h;
    };
    const auto& src_blocks = D.levels[static_cast<std::size_t>(n)];
    return GroupoidFunctor(
        D.groupoids[static_cast<std::size_t>(n)], D.groupoids[static_cast<std::size_t>(k)],
        [&](int b, Idx s) { return D.must_locate(k, image(src_blocks[static_cast<std::size_t>(b)].flags[static_cast<std::size_t>(s)])); },
        [&](int b, Idx g, Idx s) {
          const Flag& f = src_blocks[static_cast<std::size_t>(b)].flags[static_cast<std::size_t>(s)];
          return I.induced_element(g, f.top, f.chain[static_cast<std::size_t>(lo)], f.chain[static_cast<std::size_t>(hi)]);
        });
  };
  auto degen_fn = [data](int n, int i) {
    const auto& D = *data;
    const auto& src_blocks = D.levels[static_cast<std::size_t>(n)];
    return GroupoidFunctor(
        D.groupoids[static_cast<std::size_t>(n)], D.groupoids[static_cast<std::size_t>(n) + 1],
        [&](int b, Idx s) {
          Flag f = src_blocks[static_cast<std::size_t>(b)].flags[static_cast<std::size_t>(s)];
          f.chain.insert(f.chain.begin() + i, f.chain[static_cast<std::size_t>(i)]);
          return D.must_locate(n + 1, f);
        },
        [](int, Idx g, Idx) { return g; });
  };
  simplicial_ = std::make_shared<const TruncatedSimplicialGroupoid>(d.groupoids, restrict_fn, degen_fn);
}

const InstancePtr& SConstruction::instance() const { return data_->inst; }
const SizeKey& SConstruction::cap() const { return data_->cap; }
int SConstruction::top() const { return data_->n_max; }
const std::vector<SConstruction::Block>& SConstruction::blocks(int n) const {
  if (n < 0 || n > data_->n_max) throw InputError("missing level " + std::to_string(n));
  return data_->levels[static_cast<std::size_t>(n)];
}

std::optional<Obj> SConstruction::locate(int n, const Flag& flag) const {
  if (n < 0 || n > data_->n_max) return std::nullopt;
  return data_->locate(n, flag);
}

Idx SConstruction::component_of_key(const std::string& key) const {
  auto it = data_->x1_components.find(key);
  if (it == data_->x1_components.end()) throw InputError("object " + key + " lies outside the construction's cap");
  return it->second;
}

std::string SConstruction::key_of_component(Idx comp) const { return data_->x1_keys.at(static_cast<std::size_t>(comp)); }

SConstructionPtr s_construction(InstancePtr inst, const SizeKey& cap, int n_max, SizeFilter allowed, ObjectFilter objects) {
  return std::make_shared<const SConstruction>(std::move(inst), cap, n_max, std::move(allowed), std::move(objects));
}

SimplicialMap inclusion_map(const SConstructionPtr& sub, const SConstructionPtr& full) {
  SimplicialMap m{sub->simplicial(), full->simplicial(), {}};
  int top = std::min(sub->top(), full->top());
  for (int n = 0; n <= top; ++n) {
    const auto& blocks = sub->blocks(n);
    m.levels.push_back(std::make_shared<const GroupoidFunctor>(
        sub->simplicial()->level(n), full->simplicial()->level(n),
        [&](int b, Idx s) {
          auto o = full->locate(n, blocks[static_cast<std::size_t>(b)].flags[static_cast<std::size_t>(s)]);
          if (!o) throw InputError("subcategory object outside the ambient construction");
          return *o;
        },
        [](int, Idx g, Idx) { return g; }));
  }
  return m;
}

TruncatedSimplicialGroupoid with_duplicated_block(const SimplicialPtr& x, int n, int b) {
  std::vector<GroupoidPtr> levels;
  for (int k = 0; k <= x->top(); ++k) levels.push_back(x->level(k));
  const auto& old = x->level(n);
  if (b < 0 || b >= static_cast<int>(old->blocks().size())) throw InputError("no such block to duplicate");
  auto blocks = old->blocks();
  blocks.push_back(old->block(b));
  for (auto& l : blocks.back().labels) l += " (copy)";
  levels[static_cast<std::size_t>(n)] = std::make_shared<const FiniteGroupoid>(std::move(blocks));
  int nb = static_cast<int>(old->blocks().size());
  auto orig = [b, nb](int blk) { return blk == nb ? b : blk; };
  TruncatedSimplicialGroupoid::RestrictFn rf = [x, n, orig, levels](int m, const std::vector<int>& s) {
    auto f = x->restrict(m, s);
    int k = static_cast<int>(s.size()) - 1;
    if (m != n && k != n) return *f;
    return GroupoidFunctor(
        levels[static_cast<std::size_t>(m)], levels[static_cast<std::size_t>(k)],
        [&](int blk, Idx s2) { return f->obj(Obj{m == n ? orig(blk) : blk, s2}); },
        [&](int blk, Idx g, Idx s2) { return f->mor(m == n ? orig(blk) : blk, g, s2); });
  };
  TruncatedSimplicialGroupoid::DegenFn df = [x, n, orig, levels](int m, int i) {
    auto f = x->degeneracy(m, i);
    if (m != n && m + 1 != n) return *f;
    return GroupoidFunctor(
        levels[static_cast<std::size_t>(m)], levels[static_cast<std::size_t>(m) + 1],
        [&](int blk, Idx s2) { return f->obj(Obj{m == n ? orig(blk) : blk, s2}); },
        [&](int blk, Idx g, Idx s2) { return f->mor(m == n ? orig(blk) : blk, g, s2); });
  };
  return TruncatedSimplicialGroupoid(levels, rf, df);
}

}  // namespace hall
