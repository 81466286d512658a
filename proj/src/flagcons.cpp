#include <functional>
#include <unordered_map>

#include "hall/budget.hpp"
#include "hall/module.hpp"

namespace hall {

struct FlagConstruction::Data {
  FlagRecipe r;
  SizeKey cap;
  int n_max = 0;
  struct Block {
    SizeKey top;
    std::vector<SizeKey> profile;
    std::vector<Entry> entries;
    std::unordered_map<std::string, Idx> index;
  };
  std::vector<std::vector<Block>> levels;
  std::vector<std::map<std::pair<SizeKey, std::vector<SizeKey>>, int>> block_of;
  std::vector<GroupoidPtr> groupoids;

  static std::string encode(const Entry& e) {
    std::string s;
    auto put = [&](const std::vector<std::int32_t>& v) {
      for (auto x : v) s += std::to_string(x) + ",";
      s += ";";
    };
    put(e.top.rep.data);
    put(e.top.extra);
    for (const auto& u : e.chain) put(u.data);
    return s;
  }

  std::vector<SizeKey> profile_of(const Entry& e) const {
    std::vector<SizeKey> p;
    for (std::size_t i = 1; i < e.chain.size(); ++i) p.push_back(e.chain[i].dim);
    return p;
  }

  std::optional<Obj> locate(int n, const Entry& e) const {
    const auto& bo = block_of[static_cast<std::size_t>(n)];
    auto it = bo.find({e.top.rep.dim, profile_of(e)});
    if (it == bo.end()) return std::nullopt;
    const auto& blk = levels[static_cast<std::size_t>(n)][static_cast<std::size_t>(it->second)];
    auto jt = blk.index.find(encode(e));
    if (jt == blk.index.end()) return std::nullopt;
    return Obj{it->second, jt->second};
  }

  Obj must_locate(int n, const Entry& e) const {
    auto o = locate(n, e);
    if (!o) throw std::logic_error("flag construction: image outside level " + std::to_string(n) + " at " + r.label(e.top));
    return *o;
  }

  const Entry& entry(int n, int b, Idx s) const {
    return levels[static_cast<std::size_t>(n)][static_cast<std::size_t>(b)].entries[static_cast<std::size_t>(s)];
  }

  // Restriction to the vertices in `subset`.
  Entry image(const Entry& e, const std::vector<int>& subset) const {
    const auto& I = *r.inst;
    const Sub& lo = e.chain[static_cast<std::size_t>(subset.front())];
    Sub b = r.ambient(e.top, lo);
    Entry out{r.reduce(e.top, lo, b), {}};
    out.chain.push_back(I.zero_sub(out.top.rep));
    for (std::size_t j = 1; j < subset.size(); ++j)
      out.chain.push_back(I.relative_sub(e.top.rep, lo, b, e.chain[static_cast<std::size_t>(subset[j])]));
    return out;
  }
};

FlagConstruction::FlagConstruction(FlagRecipe recipe, SizeKey cap, int n_max) : data_(std::make_shared<Data>()) {
  if (n_max < 0 || n_max > TruncatedSimplicialGroupoid::kMaxLevel) throw InputError("flag construction level must be in 0..4");
  auto& D = *data_;
  D.r = std::move(recipe);
  D.cap = std::move(cap);
  D.n_max = n_max;
  const auto& I = *D.r.inst;
  auto ok = [&](const SizeKey& s) { return !D.r.sizes || D.r.sizes(s); };
  SizeKey zero = I.zero_size();

  // Level-0 lookup first: later levels check their reductions against it.
  std::map<std::string, bool> level0;
  std::vector<std::pair<SizeKey, std::vector<Decorated>>> tops;
  for (const auto& d : sizes_below(D.cap)) {
    auto objs = D.r.objects(d);
    for (const auto& t : objs) level0[Data::encode(Entry{t, {I.zero_sub(t.rep)}})] = true;
    if (!objs.empty()) tops.emplace_back(d, std::move(objs));
  }

  D.levels.resize(static_cast<std::size_t>(n_max) + 1);
  D.block_of.resize(static_cast<std::size_t>(n_max) + 1);
  for (int n = 0; n <= n_max; ++n) {
    std::vector<ActionBlock> action_blocks;
    auto& blocks = D.levels[static_cast<std::size_t>(n)];
    for (const auto& [d, objs] : tops) {
      std::vector<std::vector<SizeKey>> profiles;
      std::vector<SizeKey> cur;
      std::function<void(int)> rec = [&](int k) {
        if (k == n) {
          for (std::size_t j = 0; j < cur.size(); ++j) {
            if (!ok(cur[j])) return;
            for (std::size_t i = 0; i < j; ++i)
              if (!ok(size_sub(cur[j], cur[i]))) return;
          }
          profiles.push_back(cur);
          return;
        }
        SizeKey lo = cur.empty() ? zero : cur.back();
        for (const auto& s : sizes_below(d))
          if (size_leq(lo, s)) {
            cur.push_back(s);
            rec(k + 1);
            cur.pop_back();
          }
      };
      rec(0);
      for (const auto& prof : profiles) {
        Data::Block blk;
        blk.top = d;
        blk.profile = prof;
        for (const auto& t : objs) {
          // Chains are chosen from the top down.
          std::vector<Sub> rev;
          std::function<void(int)> pick = [&](int k) {
            if (k == 0) {
              Entry e{t, {I.zero_sub(t.rep)}};
              for (auto it = rev.rbegin(); it != rev.rend(); ++it) e.chain.push_back(*it);
              if (D.r.flag_objects)
                for (std::size_t j = 1; j < e.chain.size(); ++j)
                  for (std::size_t i = 0; i < j; ++i)
                    if (!D.r.flag_objects(I.subquotient(t.rep, e.chain[i], e.chain[j]))) return;
              for (std::size_t j = 1; j < e.chain.size(); ++j) {
                Sub b = D.r.ambient(t, e.chain[j]);
                Decorated red = D.r.reduce(t, e.chain[j], b);
                if (!level0.count(Data::encode(Entry{red, {I.zero_sub(red.rep)}}))) return;
              }
              blk.index.emplace(Data::encode(e), static_cast<Idx>(blk.entries.size()));
              blk.entries.push_back(std::move(e));
              return;
            }
            const SizeKey& want = prof[static_cast<std::size_t>(k - 1)];
            for (auto& s : I.subobjects(t.rep, want)) {
              if (rev.empty()) {
                if (!D.r.admissible(t, s)) continue;
              } else if (!I.contains(t.rep, rev.back(), s)) {
                continue;
              }
              rev.push_back(std::move(s));
              pick(k - 1);
              rev.pop_back();
            }
          };
          pick(n);
        }
        if (blk.entries.empty()) continue;
        D.block_of[static_cast<std::size_t>(n)][{d, prof}] = static_cast<int>(blocks.size());
        FiniteGroup grp = D.r.group(d);
        Budget::charge(static_cast<std::uint64_t>(grp.order()) * blk.entries.size(), "flag construction action table");
        std::vector<std::string> labels;
        for (const auto& e : blk.entries) {
          std::string s = D.r.label(e.top) + " flag";
          for (std::size_t i = 1; i < e.chain.size(); ++i) s += " " + size_string(e.chain[i].dim);
          labels.push_back(std::move(s));
        }
        blocks.push_back(std::move(blk));
        const Data::Block& bref = blocks.back();
        action_blocks.push_back(FiniteGroupoid::make_block(
            grp, static_cast<Idx>(bref.entries.size()),
            [&](Idx g, Idx s) {
              const Entry& e = bref.entries[static_cast<std::size_t>(s)];
              Idx h = D.r.base_element(g, e.top.rep.dim);
              Entry out{D.r.act(g, e.top), {}};
              for (const auto& u : e.chain) out.chain.push_back(I.act_sub(h, e.top.rep, u));
              auto it = bref.index.find(Data::encode(out));
              if (it == bref.index.end()) throw std::logic_error("flag construction: action leaves the block");
              return it->second;
            },
            std::move(labels)));
      }
    }
    D.groupoids.push_back(std::make_shared<const FiniteGroupoid>(std::move(action_blocks)));
  }

  auto data = data_;
  auto restrict_fn = [data](int n, const std::vector<int>& subset) {
    const auto& D = *data;
    int k = static_cast<int>(subset.size()) - 1;
    return GroupoidFunctor(
        D.groupoids[static_cast<std::size_t>(n)], D.groupoids[static_cast<std::size_t>(k)],
        [&D, n, k, subset](int b, Idx s) { return D.must_locate(k, D.image(D.entry(n, b, s), subset)); },
        [&D, n, subset](int b, Idx g, Idx s) {
          const Entry& e = D.entry(n, b, s);
          const Sub& lo = e.chain[static_cast<std::size_t>(subset.front())];
          return D.r.reduce_element(g, e.top, lo, D.r.ambient(e.top, lo));
        });
  };
  auto degen_fn = [data](int n, int i) {
    const auto& D = *data;
    return GroupoidFunctor(
        D.groupoids[static_cast<std::size_t>(n)], D.groupoids[static_cast<std::size_t>(n) + 1],
        [&D, n, i](int b, Idx s) {
          Entry e = D.entry(n, b, s);
          e.chain.insert(e.chain.begin() + i, e.chain[static_cast<std::size_t>(i)]);
          return D.must_locate(n + 1, e);
        },
        [](int, Idx g, Idx) { return g; });
  };
  y_ = std::make_shared<const TruncatedSimplicialGroupoid>(D.groupoids, restrict_fn, degen_fn);
  x_ = s_construction(D.r.inst, D.cap, n_max, D.r.sizes, D.r.flag_objects);

  f_.source = y_;
  f_.target = x_->simplicial();
  for (int n = 0; n <= n_max; ++n) {
    auto x = x_;
    f_.levels.push_back(std::make_shared<const GroupoidFunctor>(
        D.groupoids[static_cast<std::size_t>(n)], x->simplicial()->level(n),
        [data, x, n](int b, Idx s) {
          const auto& D = *data;
          const auto& I = *D.r.inst;
          const Entry& e = D.entry(n, b, s);
          const Rep& v = e.top.rep;
          Sub z = I.zero_sub(v);
          SConstruction::Flag f{I.subquotient(v, z, e.chain.back()), {}};
          for (const auto& u : e.chain) f.chain.push_back(I.relative_sub(v, z, e.chain.back(), u));
          auto o = x->locate(n, f);
          if (!o) throw std::logic_error("flag construction: flag of " + D.r.label(e.top) + " is missing from the S-construction");
          return *o;
        },
        [data, n](int b, Idx g, Idx s) {
          const auto& D = *data;
          const auto& I = *D.r.inst;
          const Entry& e = D.entry(n, b, s);
          const Rep& v = e.top.rep;
          return I.induced_element(D.r.base_element(g, v.dim), v, I.zero_sub(v), e.chain.back());
        }));
  }
}

const FlagRecipe& FlagConstruction::recipe() const { return data_->r; }

const FlagConstruction::Entry& FlagConstruction::entry(int n, const Obj& o) const { return data_->entry(n, o.block, o.index); }

std::optional<Obj> FlagConstruction::locate0(const Decorated& t) const {
  return data_->locate(0, Entry{t, {data_->r.inst->zero_sub(t.rep)}});
}

}  // namespace hall
