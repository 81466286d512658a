#include "hall/simplicial.hpp"

#include <numeric>

#include "hall/budget.hpp"

namespace hall {

TruncatedSimplicialGroupoid::TruncatedSimplicialGroupoid(std::vector<GroupoidPtr> levels, RestrictFn restrict_fn,
                                                         DegenFn degen_fn)
    : levels_(std::move(levels)), restrict_fn_(std::move(restrict_fn)), degen_fn_(std::move(degen_fn)) {
  if (levels_.empty()) throw InputError("simplicial groupoid needs at least one level");
  if (top() > kMaxLevel) throw InputError("truncation level above 4 is not supported");
}

TruncatedSimplicialGroupoid TruncatedSimplicialGroupoid::from_faces(std::vector<GroupoidPtr> levels,
                                                                    std::vector<std::vector<FunctorPtr>> faces,
                                                                    std::vector<std::vector<FunctorPtr>> degens) {
  auto fs = std::make_shared<std::vector<std::vector<FunctorPtr>>>(std::move(faces));
  auto ds = std::make_shared<std::vector<std::vector<FunctorPtr>>>(std::move(degens));
  auto lv = levels;
  RestrictFn restrict_fn = [fs, lv](int n, const std::vector<int>& subset) {
    GroupoidFunctor cur = GroupoidFunctor::identity(lv[static_cast<std::size_t>(n)]);
    int level = n;
    for (int k = n; k >= 0; --k) {
      if (std::find(subset.begin(), subset.end(), k) != subset.end()) continue;
      const auto& face = (*fs)[static_cast<std::size_t>(level)][static_cast<std::size_t>(k)];
      cur = compose(*face, cur);
      --level;
    }
    return cur;
  };
  DegenFn degen_fn = [ds](int n, int i) { return *(*ds)[static_cast<std::size_t>(n)][static_cast<std::size_t>(i)]; };
  return TruncatedSimplicialGroupoid(std::move(levels), restrict_fn, degen_fn);
}

const GroupoidPtr& TruncatedSimplicialGroupoid::level(int n) const {
  if (n < 0 || n > top()) throw InputError("missing level " + std::to_string(n));
  return levels_[static_cast<std::size_t>(n)];
}

FunctorPtr TruncatedSimplicialGroupoid::restrict(int n, const std::vector<int>& subset) const {
  level(n);
  if (subset.empty()) throw InputError("restriction to the empty subset");
  for (std::size_t k = 0; k < subset.size(); ++k)
    if (subset[k] < 0 || subset[k] > n || (k > 0 && subset[k] <= subset[k - 1]))
      throw InputError("restriction subset must be increasing inside [0, n]");
  auto key = std::make_pair(n, subset);
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = restrict_cache_.find(key);
    if (it != restrict_cache_.end()) return it->second;
  }
  auto f = std::make_shared<const GroupoidFunctor>(restrict_fn_(n, subset));
  std::lock_guard<std::mutex> lock(mu_);
  return restrict_cache_.emplace(key, f).first->second;
}

FunctorPtr TruncatedSimplicialGroupoid::face(int n, int i) const {
  std::vector<int> subset;
  for (int k = 0; k <= n; ++k)
    if (k != i) subset.push_back(k);
  return restrict(n, subset);
}

FunctorPtr TruncatedSimplicialGroupoid::degeneracy(int n, int i) const {
  level(n + 1);
  if (i < 0 || i > n) throw InputError("degeneracy index out of range");
  auto key = std::make_pair(n, i);
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = degen_cache_.find(key);
    if (it != degen_cache_.end()) return it->second;
  }
  auto f = std::make_shared<const GroupoidFunctor>(degen_fn_(n, i));
  std::lock_guard<std::mutex> lock(mu_);
  return degen_cache_.emplace(key, f).first->second;
}

namespace {

// Do two functors with common source and target agree on objects up to isomorphism?
std::string agree_on_classes(const GroupoidFunctor& a, const GroupoidFunctor& b, const std::string& what) {
  const auto& src = a.source();
  const auto& tgt = a.target();
  for (Idx c = 0; c < src->num_components(); ++c) {
    Obj r = src->representative(c);
    if (tgt->component_of(a.obj(r)) != tgt->component_of(b.obj(r))) return what + " fails at " + src->label(r);
  }
  return "";
}

}  // namespace

std::string TruncatedSimplicialGroupoid::check_identities() const {
  for (int n = 2; n <= top(); ++n)
    for (int j = 1; j <= n; ++j)
      for (int i = 0; i < j; ++i) {
        auto lhs = compose(*face(n - 1, i), *face(n, j));
        auto rhs = compose(*face(n - 1, j - 1), *face(n, i));
        std::string e = agree_on_classes(lhs, rhs, "d" + std::to_string(i) + "d" + std::to_string(j) + " at level " + std::to_string(n));
        if (!e.empty()) return e;
      }
  for (int n = 0; n < top(); ++n)
    for (int j = 0; j <= n; ++j) {
      auto s = degeneracy(n, j);
      for (int i = 0; i <= n + 1; ++i) {
        auto lhs = compose(*face(n + 1, i), *s);
        std::string e;
        std::string what = "d" + std::to_string(i) + "s" + std::to_string(j) + " at level " + std::to_string(n);
        if (i == j || i == j + 1) {
          e = agree_on_classes(lhs, GroupoidFunctor::identity(level(n)), what);
        } else if (n >= 1 && i < j) {
          e = agree_on_classes(lhs, compose(*degeneracy(n - 1, j - 1), *face(n, i)), what);
        } else if (n >= 1) {
          e = agree_on_classes(lhs, compose(*degeneracy(n - 1, j), *face(n, i - 1)), what);
        }
        if (!e.empty()) return e;
      }
    }
  return "";
}

void Report::add(SquareResult r) {
  pass = pass && r.pass;
  squares.push_back(std::move(r));
}

nlohmann::ordered_json Report::to_json() const {
  nlohmann::ordered_json j;
  j["check"] = name;
  j["pass"] = pass;
  auto arr = nlohmann::ordered_json::array();
  for (const auto& s : squares) {
    nlohmann::ordered_json e;
    e["kind"] = s.kind;
    e["n"] = s.n;
    e["i"] = s.i;
    e["j"] = s.j;
    e["pass"] = s.pass;
    if (!s.pass) e["witness"] = s.witness;
    arr.push_back(e);
  }
  j["squares"] = arr;
  return j;
}

Verdict check_cartesian(const GroupoidFunctor& p, const GroupoidFunctor& q, const GroupoidFunctor& f,
                        const GroupoidFunctor& g) {
  Pullback pb;
  GroupoidFunctor cmp;
  try {
    pb = homotopy_pullback(f, g);
    cmp = comparison(pb, f, g, p, q);
  } catch (const InputError& e) {
    return {false, e.what()};
  }
  return is_equivalence(cmp);
}

namespace {

std::vector<int> range(int a, int b) {
  std::vector<int> r;
  for (int k = a; k <= b; ++k) r.push_back(k);
  return r;
}

void run_all(Report& rep, std::vector<SquareResult> jobs_list, const std::function<Verdict(const SquareResult&)>& fn) {
  std::vector<Verdict> out(jobs_list.size());
  parallel_for(jobs_list.size(), [&](std::size_t k) { out[k] = fn(jobs_list[k]); });
  for (std::size_t k = 0; k < jobs_list.size(); ++k) {
    jobs_list[k].pass = out[k].ok;
    jobs_list[k].witness = out[k].witness;
    rep.add(jobs_list[k]);
  }
}

void need_level(const TruncatedSimplicialGroupoid& x, int n) {
  if (n > x.top()) throw InputError("missing level " + std::to_string(n) + " (top is " + std::to_string(x.top()) + ")");
}

}  // namespace

Report check_2segal(const TruncatedSimplicialGroupoid& x, int n_max) {
  need_level(x, n_max);
  Report rep{"2segal", true, {}};
  std::vector<SquareResult> sq;
  for (int n = 3; n <= n_max; ++n)
    for (int i = 0; i <= n; ++i)
      for (int j = i + 1; j <= n; ++j) sq.push_back({"2segal", n, i, j, false, ""});
  run_all(rep, sq, [&](const SquareResult& s) {
    auto inner = range(s.i, s.j);
    auto outer = range(0, s.i);
    for (int k = s.j; k <= s.n; ++k) outer.push_back(k);
    auto p = x.restrict(s.n, inner);
    auto q = x.restrict(s.n, outer);
    auto f = x.restrict(s.j - s.i, {0, s.j - s.i});
    int m = static_cast<int>(outer.size()) - 1;
    auto g = x.restrict(m, {s.i, s.i + 1});
    return check_cartesian(*p, *q, *f, *g);
  });
  return rep;
}

Report check_unital(const TruncatedSimplicialGroupoid& x, int n_max) {
  need_level(x, n_max);
  Report rep{"unital", true, {}};
  std::vector<SquareResult> sq;
  for (int n = 2; n <= n_max; ++n)
    for (int i = 0; i <= n - 1; ++i) sq.push_back({"unital", n, i, i + 1, false, ""});
  run_all(rep, sq, [&](const SquareResult& s) {
    auto p = x.degeneracy(s.n - 1, s.i);
    auto q = x.restrict(s.n - 1, {s.i});
    auto f = x.restrict(s.n, {s.i, s.i + 1});
    auto g = x.degeneracy(0, 0);
    return check_cartesian(*p, *q, *f, *g);
  });
  return rep;
}

Report check_1segal(const TruncatedSimplicialGroupoid& x, int n_max) {
  need_level(x, n_max);
  Report rep{"1segal", true, {}};
  std::vector<SquareResult> sq;
  for (int n = 2; n <= n_max; ++n)
    for (int i = 0; i <= n; ++i) sq.push_back({"1segal", n, i, i, false, ""});
  run_all(rep, sq, [&](const SquareResult& s) {
    auto p = x.restrict(s.n, range(s.i, s.n));
    auto q = x.restrict(s.n, range(0, s.i));
    auto f = x.restrict(s.n - s.i, {0});
    auto g = x.restrict(s.i, {s.i});
    return check_cartesian(*p, *q, *f, *g);
  });
  return rep;
}

namespace {

void need_map(const SimplicialMap& f, int n_max) {
  need_level(*f.source, n_max);
  need_level(*f.target, n_max);
  if (static_cast<int>(f.levels.size()) <= n_max) throw InputError("simplicial map is missing levels");
  for (int n = 0; n <= n_max; ++n)
    if (f.levels[static_cast<std::size_t>(n)]->source() != f.source->level(n) ||
        f.levels[static_cast<std::size_t>(n)]->target() != f.target->level(n))
      throw InputError("simplicial map level " + std::to_string(n) + " has the wrong source or target");
  // Faces must commute strictly.
  for (int n = 1; n <= n_max; ++n)
    for (int i = 0; i <= n; ++i) {
      auto lhs = compose(*f.levels[static_cast<std::size_t>(n - 1)], *f.source->face(n, i));
      auto rhs = compose(*f.target->face(n, i), *f.levels[static_cast<std::size_t>(n)]);
      const auto& src = lhs.source();
      for (std::size_t b = 0; b < src->blocks().size(); ++b)
        for (Idx s = 0; s < src->block(static_cast<int>(b)).num_objects; ++s)
          if (!(lhs.obj(Obj{static_cast<int>(b), s}) == rhs.obj(Obj{static_cast<int>(b), s})))
            throw InputError("map is not simplicial: face d" + std::to_string(i) + " at level " + std::to_string(n) +
                             " differs at " + src->label(Obj{static_cast<int>(b), s}));
    }
}

// Y_n -> Y_1 x_{Y_0} ... x_{Y_0} Y_1 built as iterated homotopy pullbacks.
struct SegalTower {
  std::vector<std::shared_ptr<Pullback>> stages;  // stages[k] joins k+2 edges
  GroupoidPtr result;
  FunctorPtr last_edge;  // result -> Y_1, projection to the final edge
};

SegalTower segal_tower(const TruncatedSimplicialGroupoid& y, int n) {
  SegalTower t;
  t.result = y.level(1);
  t.last_edge = std::make_shared<const GroupoidFunctor>(GroupoidFunctor::identity(y.level(1)));
  auto d0 = y.restrict(1, {1});
  auto d1 = y.restrict(1, {0});
  for (int k = 2; k <= n; ++k) {
    auto f = compose(*d0, *t.last_edge);
    auto pb = std::make_shared<Pullback>(homotopy_pullback(f, *d1));
    t.stages.push_back(pb);
    t.result = pb->groupoid;
    t.last_edge = std::make_shared<const GroupoidFunctor>(pb->proj_b);
  }
  return t;
}

GroupoidFunctor tower_comparison(const TruncatedSimplicialGroupoid& y, const SegalTower& t, int n) {
  GroupoidFunctor cur = *y.restrict(n, {0, 1});
  GroupoidFunctor last = GroupoidFunctor::identity(y.level(1));
  auto d0 = y.restrict(1, {1});
  auto d1 = y.restrict(1, {0});
  for (int k = 2; k <= n; ++k) {
    const auto& pb = *t.stages[static_cast<std::size_t>(k - 2)];
    auto f = compose(*d0, last);
    cur = comparison(pb, f, *d1, cur, *y.restrict(n, {k - 1, k}));
    last = pb.proj_b;
  }
  return cur;
}

}  // namespace

Report check_culf(const SimplicialMap& f, int n_max) {
  need_map(f, n_max);
  Report rep{"culf", true, {}};
  std::vector<SquareResult> sq;
  for (int n = 1; n <= n_max; ++n) sq.push_back({"culf", n, 0, n, false, ""});
  run_all(rep, sq, [&](const SquareResult& s) {
    auto p = f.source->restrict(s.n, {0, s.n});
    const auto& q = f.levels[static_cast<std::size_t>(s.n)];
    const auto& fl = f.levels[1];
    auto g = f.target->restrict(s.n, {0, s.n});
    return check_cartesian(*p, *q, *fl, *g);
  });
  return rep;
}

Report check_ikeo(const SimplicialMap& f, int n_max) {
  need_map(f, n_max);
  Report rep{"ikeo", true, {}};
  Verdict v0 = is_equivalence(*f.levels[0]);
  rep.add({"ikeo-objects", 0, 0, 0, v0.ok, v0.witness});
  std::vector<SquareResult> sq;
  for (int n = 2; n <= n_max; ++n) sq.push_back({"ikeo", n, 0, n, false, ""});
  run_all(rep, sq, [&](const SquareResult& s) -> Verdict {
    try {
      SegalTower ty = segal_tower(*f.source, s.n);
      SegalTower tx = segal_tower(*f.target, s.n);
      GroupoidFunctor p = tower_comparison(*f.source, ty, s.n);
      GroupoidFunctor g = tower_comparison(*f.target, tx, s.n);
      GroupoidFunctor fmap = *f.levels[1];
      for (int k = 2; k <= s.n; ++k)
        fmap = pullback_map(*ty.stages[static_cast<std::size_t>(k - 2)], *tx.stages[static_cast<std::size_t>(k - 2)], fmap,
                            *f.levels[1], *f.levels[0]);
      return check_cartesian(p, *f.levels[static_cast<std::size_t>(s.n)], fmap, g);
    } catch (const InputError& e) {
      return {false, e.what()};
    }
  });
  return rep;
}

Report check_relative_2segal(const SimplicialMap& f, int n_max) {
  need_level(*f.source, n_max);
  need_level(*f.target, n_max);
  Report rep = check_1segal(*f.source, n_max);
  rep.name = "relative-2segal";
  std::vector<SquareResult> sq;
  for (int n = 2; n <= n_max; ++n)
    for (int i = 0; i <= n; ++i)
      for (int j = i + 1; j <= n; ++j) sq.push_back({"relative", n, i, j, false, ""});
  run_all(rep, sq, [&](const SquareResult& s) -> Verdict {
    try {
      auto outer = range(0, s.i);
      for (int k = s.j; k <= s.n; ++k) outer.push_back(k);
      int m = static_cast<int>(outer.size()) - 1;
      auto p = f.source->restrict(s.n, outer);
      auto q = compose(*f.levels[static_cast<std::size_t>(s.j - s.i)], *f.source->restrict(s.n, range(s.i, s.j)));
      auto fr = compose(*f.levels[1], *f.source->restrict(m, {s.i, s.i + 1}));
      auto g = f.target->restrict(s.j - s.i, {0, s.j - s.i});
      return check_cartesian(*p, q, fr, *g);
    } catch (const InputError& e) {
      return {false, e.what()};
    }
  });
  return rep;
}

TruncatedSimplicialGroupoid nerve_of_group(int order, const std::function<int(int, int)>& mul, int top) {
  std::vector<GroupoidPtr> levels;
  std::vector<Idx> sizes;
  for (int n = 0; n <= top; ++n) {
    Idx size = 1;
    for (int k = 0; k < n; ++k) size *= order;
    sizes.push_back(size);
    levels.push_back(std::make_shared<const FiniteGroupoid>(FiniteGroupoid::discrete(size)));
  }
  auto decode = [order](Idx code, int n) {
    std::vector<int> t(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
      t[static_cast<std::size_t>(k)] = static_cast<int>(code % order);
      code /= order;
    }
    return t;
  };
  auto encode = [order](const std::vector<int>& t) {
    Idx c = 0;
    for (int k = static_cast<int>(t.size()) - 1; k >= 0; --k) c = c * order + t[static_cast<std::size_t>(k)];
    return c;
  };
  std::vector<std::vector<FunctorPtr>> faces(static_cast<std::size_t>(top + 1)), degens(static_cast<std::size_t>(top + 1));
  for (int n = 1; n <= top; ++n)
    for (int i = 0; i <= n; ++i)
      faces[static_cast<std::size_t>(n)].push_back(std::make_shared<const GroupoidFunctor>(
          levels[static_cast<std::size_t>(n)], levels[static_cast<std::size_t>(n - 1)],
          [=](int b, Idx) {
            auto t = decode(b, n);
            std::vector<int> r;
            for (int k = 0; k < n; ++k) {
              if (i == 0 && k == 0) continue;
              if (i == n && k == n - 1) continue;
              if (i > 0 && i < n && k == i - 1) {
                r.push_back(mul(t[static_cast<std::size_t>(k)], t[static_cast<std::size_t>(k + 1)]));
                ++k;
                continue;
              }
              r.push_back(t[static_cast<std::size_t>(k)]);
            }
            return Obj{static_cast<int>(encode(r)), 0};
          },
          [](int, Idx, Idx) { return Idx{0}; }));
  for (int n = 0; n < top; ++n)
    for (int i = 0; i <= n; ++i)
      degens[static_cast<std::size_t>(n)].push_back(std::make_shared<const GroupoidFunctor>(
          levels[static_cast<std::size_t>(n)], levels[static_cast<std::size_t>(n + 1)],
          [=](int b, Idx) {
            auto t = decode(b, n);
            t.insert(t.begin() + i, 0);
            return Obj{static_cast<int>(encode(t)), 0};
          },
          [](int, Idx, Idx) { return Idx{0}; }));
  return TruncatedSimplicialGroupoid::from_faces(levels, faces, degens);
}

nlohmann::ordered_json to_json(const FiniteGroupoid& g) {
  nlohmann::ordered_json j;
  auto blocks = nlohmann::ordered_json::array();
  for (std::size_t b = 0; b < g.blocks().size(); ++b) {
    const auto& blk = g.blocks()[b];
    nlohmann::ordered_json jb;
    jb["group_order"] = blk.group.order();
    auto table = nlohmann::ordered_json::array();
    for (Idx x = 0; x < blk.group.order(); ++x) {
      auto row = nlohmann::ordered_json::array();
      for (Idx y = 0; y < blk.group.order(); ++y) row.push_back(blk.group.mul(x, y));
      table.push_back(row);
    }
    jb["group_table"] = table;
    auto labels = nlohmann::ordered_json::array();
    for (Idx s = 0; s < blk.num_objects; ++s) labels.push_back(g.label(Obj{static_cast<int>(b), s}));
    jb["objects"] = labels;
    auto act = nlohmann::ordered_json::array();
    for (Idx x = 0; x < blk.group.order(); ++x) {
      auto row = nlohmann::ordered_json::array();
      for (Idx s = 0; s < blk.num_objects; ++s) row.push_back(blk.act(x, s));
      act.push_back(row);
    }
    jb["action"] = act;
    blocks.push_back(jb);
  }
  j["blocks"] = blocks;
  auto comps = nlohmann::ordered_json::array();
  for (Idx c = 0; c < g.num_components(); ++c) {
    nlohmann::ordered_json jc;
    jc["representative"] = g.label(g.representative(c));
    jc["aut_order"] = g.automorphisms(c).size();
    comps.push_back(jc);
  }
  j["components"] = comps;
  return j;
}

FiniteGroupoid groupoid_from_json(const nlohmann::json& j) {
  std::vector<ActionBlock> blocks;
  for (const auto& jb : j.at("blocks")) {
    std::vector<std::vector<Idx>> table = jb.at("group_table").get<std::vector<std::vector<Idx>>>();
    FiniteGroup g({std::make_shared<const TableGroup>(table)});
    auto labels = jb.at("objects").get<std::vector<std::string>>();
    auto act = jb.at("action").get<std::vector<std::vector<Idx>>>();
    if (static_cast<Idx>(act.size()) != g.order()) throw InputError("action table needs one row per group element");
    Idx n = static_cast<Idx>(labels.size());
    for (const auto& row : act)
      if (static_cast<Idx>(row.size()) != n) throw InputError("action row has the wrong length");
    blocks.push_back(FiniteGroupoid::make_block(g, n, [&](Idx x, Idx s) {
      return act[static_cast<std::size_t>(x)][static_cast<std::size_t>(s)];
    }, labels));
    // The action must be a group action.
    const auto& blk = blocks.back();
    for (Idx x = 0; x < g.order(); ++x)
      for (Idx y = 0; y < g.order(); ++y)
        for (Idx s = 0; s < n; ++s)
          if (blk.act(g.mul(x, y), s) != blk.act(x, blk.act(y, s))) throw InputError("action table is not a group action");
  }
  return FiniteGroupoid(std::move(blocks));
}

nlohmann::ordered_json to_json(const GroupoidFunctor& f) {
  nlohmann::ordered_json j;
  auto blocks = nlohmann::ordered_json::array();
  const auto& src = f.source();
  for (std::size_t b = 0; b < src->blocks().size(); ++b) {
    const auto& blk = src->blocks()[b];
    nlohmann::ordered_json jb;
    auto objs = nlohmann::ordered_json::array();
    for (Idx s = 0; s < blk.num_objects; ++s) {
      Obj t = f.obj(Obj{static_cast<int>(b), s});
      objs.push_back({t.block, t.index});
    }
    jb["objects"] = objs;
    auto mors = nlohmann::ordered_json::array();
    for (Idx x = 0; x < blk.group.order(); ++x) {
      auto row = nlohmann::ordered_json::array();
      for (Idx s = 0; s < blk.num_objects; ++s) row.push_back(f.mor(static_cast<int>(b), x, s));
      mors.push_back(row);
    }
    jb["morphisms"] = mors;
    blocks.push_back(jb);
  }
  j["blocks"] = blocks;
  return j;
}

}  // namespace hall
