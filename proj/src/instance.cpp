#include "hall/instance.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_set>

#include "hall/budget.hpp"

namespace hall {

namespace {

struct VecHash {
  std::size_t operator()(const std::vector<std::int32_t>& v) const {
    std::uint64_t h = 1469598103934665603ULL;
    for (auto x : v) {
      h ^= static_cast<std::uint32_t>(x);
      h *= 1099511628211ULL;
    }
    return static_cast<std::size_t>(h);
  }
};

std::uint64_t ipow(std::uint64_t b, int e) {
  std::uint64_t r = 1;
  for (int i = 0; i < e; ++i) {
    if (r > (std::uint64_t{1} << 62) / std::max<std::uint64_t>(b, 1)) return std::uint64_t{1} << 62;
    r *= b;
  }
  return r;
}

std::vector<std::vector<int>> partitions_of(int n, int max_part) {
  if (n == 0) return {{}};
  std::vector<std::vector<int>> out;
  for (int p = std::min(n, max_part); p >= 1; --p)
    for (auto rest : partitions_of(n - p, p)) {
      rest.insert(rest.begin(), p);
      out.push_back(rest);
    }
  return out;
}

std::vector<std::vector<int>> combinations(int n, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  std::function<void(int)> rec = [&](int start) {
    if (static_cast<int>(cur.size()) == k) {
      out.push_back(cur);
      return;
    }
    for (int x = start; x <= n; ++x) {
      cur.push_back(x);
      rec(x + 1);
      cur.pop_back();
    }
  };
  rec(1);
  return out;
}

// All maps [n] -> {0..m} injective away from 0.
std::vector<std::vector<std::int32_t>> partial_injections(int n, int m) {
  std::vector<std::vector<std::int32_t>> out;
  std::vector<std::int32_t> cur(static_cast<std::size_t>(n));
  std::vector<bool> used(static_cast<std::size_t>(m) + 1, false);
  std::function<void(int)> rec = [&](int i) {
    if (i == n) {
      out.push_back(cur);
      return;
    }
    for (int y = 0; y <= m; ++y) {
      if (y > 0 && used[static_cast<std::size_t>(y)]) continue;
      cur[static_cast<std::size_t>(i)] = y;
      if (y > 0) used[static_cast<std::size_t>(y)] = true;
      rec(i + 1);
      if (y > 0) used[static_cast<std::size_t>(y)] = false;
    }
  };
  rec(0);
  return out;
}

// Cartesian product of per-slot choices, visiting index tuples.
void for_each_tuple(const std::vector<std::size_t>& sizes, const std::function<void(const std::vector<std::size_t>&)>& visit) {
  for (auto s : sizes)
    if (s == 0) return;
  std::vector<std::size_t> idx(sizes.size(), 0);
  while (true) {
    visit(idx);
    std::size_t k = 0;
    while (k < sizes.size()) {
      if (++idx[k] < sizes[k]) break;
      idx[k] = 0;
      ++k;
    }
    if (k == sizes.size()) return;
  }
}

std::string matrix_string(const Matrix& m) {
  std::string s = "[";
  for (int r = 0; r < m.rows(); ++r) {
    if (r) s += ";";
    for (int c = 0; c < m.cols(); ++c) {
      if (c) s += " ";
      s += std::to_string(m(r, c));
    }
  }
  return s + "]";
}

std::string vertex_token(const nlohmann::json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

}  // namespace

// ---------- size keys ----------

std::string size_string(const SizeKey& d) {
  std::string s = "(";
  for (std::size_t i = 0; i < d.size(); ++i) s += (i ? "," : "") + std::to_string(d[i]);
  return s + ")";
}

SizeKey size_add(const SizeKey& a, const SizeKey& b) {
  SizeKey r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

SizeKey size_sub(const SizeKey& a, const SizeKey& b) {
  SizeKey r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

bool size_leq(const SizeKey& a, const SizeKey& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] > b[i]) return false;
  return true;
}

int size_total(const SizeKey& d) { return std::accumulate(d.begin(), d.end(), 0); }

std::vector<SizeKey> sizes_below(const SizeKey& cap) {
  std::vector<SizeKey> out;
  SizeKey cur(cap.size(), 0);
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == cap.size()) {
      out.push_back(cur);
      return;
    }
    for (int x = 0; x <= cap[i]; ++x) {
      cur[i] = x;
      rec(i + 1);
    }
  };
  rec(0);
  std::stable_sort(out.begin(), out.end(), [](const SizeKey& a, const SizeKey& b) {
    int ta = size_total(a), tb = size_total(b);
    return ta != tb ? ta < tb : a < b;
  });
  return out;
}

// ---------- quiver ----------

bool Quiver::acyclic() const {
  int n = num_vertices();
  std::vector<int> state(static_cast<std::size_t>(n), 0);
  std::function<bool(int)> dfs = [&](int v) {
    state[static_cast<std::size_t>(v)] = 1;
    for (const auto& a : arrows) {
      if (a.source != v) continue;
      int t = state[static_cast<std::size_t>(a.target)];
      if (t == 1) return false;
      if (t == 0 && !dfs(a.target)) return false;
    }
    state[static_cast<std::size_t>(v)] = 2;
    return true;
  };
  for (int v = 0; v < n; ++v)
    if (state[static_cast<std::size_t>(v)] == 0 && !dfs(v)) return false;
  return true;
}

bool Quiver::is_jordan() const {
  return num_vertices() == 1 && arrows.size() == 1 && arrows[0].source == 0 && arrows[0].target == 0;
}

void Quiver::validate() const {
  int n = num_vertices();
  if (n == 0) throw InputError("quiver has no vertices");
  for (const auto& a : arrows)
    if (a.source < 0 || a.source >= n || a.target < 0 || a.target >= n)
      throw InputError("arrow " + a.name + " has an endpoint outside the vertex list");
  if (vertex_involution.empty() && arrow_involution.empty()) return;
  if (static_cast<int>(vertex_involution.size()) != n || arrow_involution.size() != arrows.size())
    throw InputError("involution must map every vertex and every arrow");
  for (int v = 0; v < n; ++v) {
    int w = vertex_involution[static_cast<std::size_t>(v)];
    if (w < 0 || w >= n || vertex_involution[static_cast<std::size_t>(w)] != v)
      throw InputError("vertex involution is not an involution at " + vertices[static_cast<std::size_t>(v)]);
  }
  for (std::size_t k = 0; k < arrows.size(); ++k) {
    int m = arrow_involution[k];
    if (m < 0 || m >= static_cast<int>(arrows.size()) || arrow_involution[static_cast<std::size_t>(m)] != static_cast<int>(k))
      throw InputError("arrow involution is not an involution at " + arrows[k].name);
    const auto& a = arrows[k];
    const auto& b = arrows[static_cast<std::size_t>(m)];
    if (b.source != vertex_involution[static_cast<std::size_t>(a.target)] ||
        b.target != vertex_involution[static_cast<std::size_t>(a.source)])
      throw InputError("involution does not reverse arrow " + a.name);
  }
}

Quiver Quiver::point() {
  Quiver q;
  q.vertices = {"1"};
  return q;
}

Quiver Quiver::jordan() {
  Quiver q;
  q.vertices = {"1"};
  q.arrows = {{0, 0, "x"}};
  q.nilpotent = true;
  return q;
}

Quiver Quiver::a2() {
  Quiver q;
  q.vertices = {"1", "2"};
  q.arrows = {{0, 1, "a"}};
  return q;
}

Quiver Quiver::d4_inward() {
  Quiver q;
  q.vertices = {"1", "2", "3", "4"};
  q.arrows = {{0, 3, "a"}, {1, 3, "b"}, {2, 3, "c"}};
  return q;
}

Quiver Quiver::from_json(const nlohmann::json& j) {
  try {
    Quiver q;
    for (const auto& v : j.at("vertices")) q.vertices.push_back(vertex_token(v));
    auto vindex = [&](const nlohmann::json& v) {
      auto t = vertex_token(v);
      auto it = std::find(q.vertices.begin(), q.vertices.end(), t);
      if (it == q.vertices.end()) throw InputError("unknown vertex " + t);
      return static_cast<int>(it - q.vertices.begin());
    };
    if (j.contains("arrows"))
      for (const auto& a : j.at("arrows")) {
        Arrow ar{vindex(a.at("from")), vindex(a.at("to")),
                 a.contains("name") ? vertex_token(a.at("name")) : "a" + std::to_string(q.arrows.size())};
        q.arrows.push_back(ar);
      }
    q.nilpotent = j.value("nilpotent", false);
    if (j.contains("involution") && !j.at("involution").is_null()) {
      const auto& inv = j.at("involution");
      q.vertex_involution.assign(q.vertices.size(), -1);
      for (const auto& [k, v] : inv.at("vertices").items())
        q.vertex_involution[static_cast<std::size_t>(vindex(nlohmann::json(k)))] = vindex(v);
      q.arrow_involution.assign(q.arrows.size(), -1);
      auto aindex = [&](const std::string& name) {
        for (std::size_t k = 0; k < q.arrows.size(); ++k)
          if (q.arrows[k].name == name) return static_cast<int>(k);
        throw InputError("unknown arrow " + name);
      };
      if (inv.contains("arrows"))
        for (const auto& [k, v] : inv.at("arrows").items()) q.arrow_involution[static_cast<std::size_t>(aindex(k))] = aindex(vertex_token(v));
    }
    q.validate();
    return q;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed quiver JSON: ") + e.what());
  }
}

nlohmann::ordered_json Quiver::to_json() const {
  nlohmann::ordered_json j;
  j["vertices"] = vertices;
  j["arrows"] = nlohmann::ordered_json::array();
  for (const auto& a : arrows)
    j["arrows"].push_back({{"from", vertices[static_cast<std::size_t>(a.source)]},
                           {"to", vertices[static_cast<std::size_t>(a.target)]},
                           {"name", a.name}});
  if (!vertex_involution.empty()) {
    nlohmann::ordered_json v, ar;
    for (std::size_t i = 0; i < vertices.size(); ++i) v[vertices[i]] = vertices[static_cast<std::size_t>(vertex_involution[i])];
    for (std::size_t k = 0; k < arrows.size(); ++k) ar[arrows[k].name] = arrows[static_cast<std::size_t>(arrow_involution[k])].name;
    j["involution"] = {{"vertices", v}, {"arrows", ar}};
  }
  j["nilpotent"] = nilpotent;
  return j;
}

// ---------- shared helpers ----------

Matrix matrix_from_code(const Field& f, int rows, int cols, const std::vector<std::int32_t>& code, std::size_t offset) {
  Matrix m(f, rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      m(r, c) = static_cast<Elem>(code[offset + static_cast<std::size_t>(r * cols + c)]);
  return m;
}

void append_code(std::vector<std::int32_t>& out, const Matrix& m) {
  for (auto x : m.data()) out.push_back(static_cast<std::int32_t>(x));
}

std::shared_ptr<const CodeGroup> general_linear_group(int n, const Field& f) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::shared_ptr<const CodeGroup>> cache;
  std::lock_guard lock(mu);
  auto key = std::make_pair(n, f->q());
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  int q = f->q();
  std::uint64_t total = ipow(static_cast<std::uint64_t>(q), n * n);
  Budget::charge(total, "general linear group enumeration");
  std::vector<CodeGroup::Code> elems;
  Matrix id = Matrix::identity(f, n);
  CodeGroup::Code idc;
  append_code(idc, id);
  elems.push_back(idc);
  CodeGroup::Code code(static_cast<std::size_t>(n * n), 0);
  for (std::uint64_t t = 0; t < total; ++t) {
    std::uint64_t x = t;
    for (auto& c : code) {
      c = static_cast<std::int32_t>(x % static_cast<std::uint64_t>(q));
      x /= static_cast<std::uint64_t>(q);
    }
    if (code == idc) continue;
    if (rank(matrix_from_code(f, n, n, code)) == n) elems.push_back(code);
  }
  auto g = std::make_shared<const CodeGroup>(std::move(elems), [f, n](const CodeGroup::Code& a, const CodeGroup::Code& b) {
    CodeGroup::Code c;
    append_code(c, matrix_from_code(f, n, n, a) * matrix_from_code(f, n, n, b));
    return c;
  });
  cache[key] = g;
  return g;
}

std::shared_ptr<const CodeGroup> symmetric_group(int n) {
  static std::mutex mu;
  static std::map<int, std::shared_ptr<const CodeGroup>> cache;
  std::lock_guard lock(mu);
  if (auto it = cache.find(n); it != cache.end()) return it->second;
  std::vector<CodeGroup::Code> elems;
  CodeGroup::Code p(static_cast<std::size_t>(n));
  std::iota(p.begin(), p.end(), 0);
  do elems.push_back(p);
  while (std::next_permutation(p.begin(), p.end()));
  auto g = std::make_shared<const CodeGroup>(std::move(elems), [](const CodeGroup::Code& a, const CodeGroup::Code& b) {
    CodeGroup::Code c(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[static_cast<std::size_t>(b[i])];
    return c;
  });
  cache[n] = g;
  return g;
}

std::vector<int> jordan_type(const Matrix& x) {
  int n = x.rows();
  std::vector<int> ranks{n};
  Matrix p = Matrix::identity(x.field(), n);
  while (ranks.back() > 0) {
    p = p * x;
    int r = rank(p);
    if (r == ranks.back()) throw InputError("matrix is not nilpotent");
    ranks.push_back(r);
  }
  // conj[k] = number of blocks of size > k
  std::vector<int> conj;
  for (std::size_t k = 1; k < ranks.size(); ++k) conj.push_back(ranks[k - 1] - ranks[k]);
  std::vector<int> parts;
  if (conj.empty()) return parts;
  for (int i = 0; i < conj[0]; ++i) {
    int len = 0;
    for (int c : conj)
      if (c > i) ++len;
    parts.push_back(len);
  }
  return parts;
}

std::string partition_string(const std::vector<int>& parts) {
  std::string s = "(";
  for (std::size_t i = 0; i < parts.size(); ++i) s += (i ? "," : "") + std::to_string(parts[i]);
  return s + ")";
}

// ---------- base ----------

ProtoExactInstance::ProtoExactInstance(Kind kind, Quiver quiver) : kind_(kind), quiver_(std::move(quiver)) {}

std::string ProtoExactInstance::name() const {
  switch (kind_) {
    case Kind::VectFq: return "vect_fq(q=" + std::to_string(q()) + ")";
    case Kind::VectF1: return "vect_f1";
    case Kind::NilJordanFq: return "nil_jordan_fq(q=" + std::to_string(q()) + ")";
    case Kind::RepFq: return "rep_fq(q=" + std::to_string(q()) + ")";
    case Kind::RepF1: return "rep_f1";
  }
  return "?";
}

SizeKey ProtoExactInstance::parse_size(const std::string& text) const {
  std::string s;
  for (char c : text)
    if (c != '(' && c != ')' && c != ' ') s += c;
  SizeKey d;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      int v = std::stoi(tok, &used);
      if (used != tok.size() || v < 0) throw InputError("");
      d.push_back(v);
    } catch (const std::exception&) {
      throw InputError("bad size key '" + text + "'");
    }
  }
  if (static_cast<int>(d.size()) != num_vertices())
    throw InputError("size key '" + text + "' needs " + std::to_string(num_vertices()) + " entries");
  return d;
}

std::vector<std::string> ProtoExactInstance::keys_of_size(const SizeKey& d) const {
  {
    std::lock_guard lock(mu_);
    if (auto it = keys_cache_.find(d); it != keys_cache_.end()) return it->second;
  }
  std::set<std::string> keys;
  for (const auto& r : canonical_candidates(d)) keys.insert(iso_key(r));
  std::vector<std::string> out(keys.begin(), keys.end());
  std::lock_guard lock(mu_);
  keys_cache_[d] = out;
  return out;
}

std::vector<Rep> ProtoExactInstance::canonical_candidates(const SizeKey& d) const { return all_reps(d); }

std::vector<Rep> ProtoExactInstance::enumerate_objects(const SizeKey& d) const {
  std::vector<Rep> out;
  for (const auto& k : keys_of_size(d)) out.push_back(object(k));
  return out;
}

void ProtoExactInstance::remember(const std::string& key, const Rep& canonical) const {
  std::lock_guard lock(mu_);
  registry_.emplace(key, canonical);
}

Rep ProtoExactInstance::object(const std::string& key) const {
  {
    std::lock_guard lock(mu_);
    if (auto it = registry_.find(key); it != registry_.end()) return it->second;
  }
  SizeKey d = size_from_key(key);
  keys_of_size(d);
  std::lock_guard lock(mu_);
  if (auto it = registry_.find(key); it != registry_.end()) return it->second;
  throw InputError("no object with key '" + key + "' in " + name());
}

SizeKey ProtoExactInstance::size_from_key(const std::string& key) const {
  try {
    switch (kind_) {
      case Kind::VectFq:
      case Kind::VectF1: return parse_size(key);
      case Kind::NilJordanFq: {
        int total = 0;
        std::string s = key;
        if (s.size() < 2 || s.front() != '(' || s.back() != ')') throw InputError("");
        s = s.substr(1, s.size() - 2);
        std::stringstream ss(s);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
          std::size_t used = 0;
          int v = std::stoi(tok, &used);
          if (used != tok.size() || v <= 0) throw InputError("");
          total += v;
        }
        return {total};
      }
      case Kind::RepFq:
      case Kind::RepF1: return parse_size(key.substr(0, key.find('|')));
    }
  } catch (const std::exception&) {
  }
  throw InputError("malformed object key '" + key + "' for " + name());
}

SizeKey ProtoExactInstance::size_of(const std::string& key) const { return object(key).dim; }

bool ProtoExactInstance::key_less(const std::string& a, const std::string& b) const {
  if (a == b) return false;
  SizeKey da = size_of(a), db = size_of(b);
  int ta = size_total(da), tb = size_total(db);
  if (ta != tb) return ta < tb;
  if (da != db) return da < db;
  return a < b;
}

std::string ProtoExactInstance::describe(const Rep& r) const {
  std::string s = size_string(r.dim) + "|";
  for (std::size_t i = 0; i < r.data.size(); ++i) s += (i ? " " : "") + std::to_string(r.data[i]);
  return s;
}

BigInt ProtoExactInstance::hom_count(const Rep& u, const Rep& v) const {
  return BigInt(static_cast<unsigned long>(hom_set(u, v).size()));
}

std::vector<Site> ProtoExactInstance::admissible_subobjects(const Rep& v) const {
  std::string err = validate_rep(v);
  if (!err.empty()) throw InputError("malformed object: " + err);
  std::vector<Site> out;
  Sub zero = zero_sub(v), full = full_sub(v);
  for (const auto& d : sizes_below(v.dim))
    for (auto& s : subobjects(v, d)) {
      Site site;
      site.sub_rep = subquotient(v, zero, s);
      site.quot_rep = subquotient(v, s, full);
      site.sub_key = iso_key(site.sub_rep);
      site.quot_key = iso_key(site.quot_rep);
      site.sub = std::move(s);
      out.push_back(std::move(site));
    }
  return out;
}

SiteCounts ProtoExactInstance::compute_site_counts(const Rep& v) const {
  SiteCounts counts;
  for (const auto& s : admissible_subobjects(v)) ++counts[{s.sub_key, s.quot_key}];
  return counts;
}

SiteCounts ProtoExactInstance::site_counts(const std::string& v_key) const {
  {
    std::lock_guard lock(mu_);
    if (auto it = site_cache_.find(v_key); it != site_cache_.end()) return it->second;
  }
  SiteCounts c = compute_site_counts(object(v_key));
  std::lock_guard lock(mu_);
  site_cache_.emplace(v_key, c);
  return c;
}

std::vector<ExtClass> ProtoExactInstance::ext1_classes(const Rep& w, const Rep& u) const {
  // Conflation classes U >-> V ->> W with both ends fixed. Aut(V) acts freely on the pairs
  // (inflation, deflation) realizing a site, so each V contributes c |Aut U| |Aut W| / |Aut V|.
  std::string uk = iso_key(u), wk = iso_key(w);
  BigInt au = aut_order(u), aw = aut_order(w);
  std::vector<ExtClass> out;
  for (const auto& vk : keys_of_size(size_add(u.dim, w.dim))) {
    auto counts = site_counts(vk);
    auto it = counts.find({uk, wk});
    if (it == counts.end()) continue;
    Rep v = object(vk);
    BigInt num = BigInt(static_cast<unsigned long>(it->second)) * au * aw;
    BigInt av = aut_order(v);
    if (num % av != 0) throw std::logic_error("conflation count is not integral for " + vk);
    BigInt n = num / av;
    for (BigInt i = 0; i < n; ++i)
      out.push_back({vk, v, "conflation class " + to_string(BigInt(i + 1)) + "/" + to_string(n)});
  }
  return out;
}

// ---------- linear instances ----------

namespace {

struct Chart {
  std::vector<Matrix> c, s;  // per vertex: coordinates k x n, section n x k
};

class LinearInstance final : public ProtoExactInstance {
 public:
  LinearInstance(Kind kind, Quiver quiver, Field f) : ProtoExactInstance(kind, std::move(quiver)), f_(std::move(f)) {
    nilpotent_loop_ = quiver_.is_jordan() && quiver_.nilpotent;
  }

  int q() const override { return f_->q(); }
  bool exact() const override { return true; }

  std::size_t offset(const SizeKey& d, std::size_t arrow) const {
    std::size_t o = 0;
    for (std::size_t k = 0; k < arrow; ++k) o += static_cast<std::size_t>(d[src(k)] * d[tgt(k)]);
    return o;
  }
  std::size_t data_size(const SizeKey& d) const { return offset(d, quiver_.arrows.size()); }
  std::size_t src(std::size_t k) const { return static_cast<std::size_t>(quiver_.arrows[k].source); }
  std::size_t tgt(std::size_t k) const { return static_cast<std::size_t>(quiver_.arrows[k].target); }
  Matrix arrow(const Rep& r, std::size_t k) const {
    return matrix_from_code(f_, r.dim[tgt(k)], r.dim[src(k)], r.data, offset(r.dim, k));
  }
  Matrix sub_basis(const Sub& s, std::size_t v, const SizeKey& ambient) const {
    std::size_t o = 0;
    for (std::size_t i = 0; i < v; ++i) o += static_cast<std::size_t>(s.dim[i] * ambient[i]);
    return matrix_from_code(f_, s.dim[v], ambient[v], s.data, o);
  }
  bool nilpotent(const Matrix& x) const {
    Matrix p = x;
    for (int i = 1; i < x.rows(); ++i) p = p * x;
    return p.is_zero();
  }

  std::string validate_rep(const Rep& r) const override {
    if (static_cast<int>(r.dim.size()) != num_vertices()) return "dimension vector has the wrong length";
    for (int x : r.dim)
      if (x < 0) return "negative dimension";
    if (r.data.size() != data_size(r.dim)) return "structure maps have the wrong shape";
    for (auto x : r.data)
      if (x < 0 || x >= q()) return "entry outside the field";
    if (nilpotent_loop_ && !nilpotent(arrow(r, 0))) return "loop is not nilpotent";
    return "";
  }

  std::vector<Rep> all_reps(const SizeKey& d) const override {
    std::size_t n = data_size(d);
    std::uint64_t total = ipow(static_cast<std::uint64_t>(q()), static_cast<int>(n));
    Budget::charge(total, "representation enumeration");
    std::vector<Rep> out;
    Rep r{d, std::vector<std::int32_t>(n, 0)};
    for (std::uint64_t t = 0; t < total; ++t) {
      std::uint64_t x = t;
      for (auto& c : r.data) {
        c = static_cast<std::int32_t>(x % static_cast<std::uint64_t>(q()));
        x /= static_cast<std::uint64_t>(q());
      }
      if (nilpotent_loop_ && !nilpotent(arrow(r, 0))) continue;
      out.push_back(r);
    }
    return out;
  }

  std::vector<Rep> canonical_candidates(const SizeKey& d) const override {
    if (kind_ == Kind::VectFq) return {Rep{d, {}}};
    if (kind_ == Kind::NilJordanFq) {
      std::vector<Rep> out;
      for (const auto& p : partitions_of(d[0], d[0])) out.push_back(jordan_form(p));
      return out;
    }
    return all_reps(d);
  }

  Rep jordan_form(const std::vector<int>& parts) const {
    int n = std::accumulate(parts.begin(), parts.end(), 0);
    Matrix x(f_, n, n);
    int base = 0;
    for (int p : parts) {
      for (int i = 0; i + 1 < p; ++i) x(base + i, base + i + 1) = 1;
      base += p;
    }
    Rep r{{n}, {}};
    append_code(r.data, x);
    return r;
  }

  std::string iso_key(const Rep& r) const override {
    if (kind_ == Kind::VectFq) {
      std::string k = std::to_string(r.dim[0]);
      remember(k, Rep{r.dim, {}});
      return k;
    }
    if (kind_ == Kind::NilJordanFq) {
      auto parts = jordan_type(arrow(r, 0));
      std::string k = partition_string(parts);
      remember(k, jordan_form(parts));
      return k;
    }
    return orbit(r).first;
  }

  std::string format(const Rep& r) const {
    std::string s = size_string(r.dim);
    for (std::size_t k = 0; k < quiver_.arrows.size(); ++k) s += "|" + quiver_.arrows[k].name + "=" + matrix_string(arrow(r, k));
    return s;
  }
  std::string describe(const Rep& r) const override { return format(r); }

  // Orbit under the product of general linear groups, explored with generators.
  std::pair<std::string, std::uint64_t> orbit(const Rep& r) const {
    std::vector<std::int32_t> tag(r.dim.begin(), r.dim.end());
    tag.push_back(-1);
    tag.insert(tag.end(), r.data.begin(), r.data.end());
    {
      std::lock_guard lock(orbit_mu_);
      if (auto it = orbit_memo_.find(tag); it != orbit_memo_.end()) return it->second;
    }
    std::string err = validate_rep(r);
    if (!err.empty()) throw InputError("malformed object: " + err);
    struct Gen {
      std::size_t vertex;
      Matrix g, ginv;
    };
    std::vector<Gen> gens;
    for (std::size_t v = 0; v < r.dim.size(); ++v) {
      int n = r.dim[v];
      for (int i = 0; i < n; ++i) {
        Matrix dg = Matrix::identity(f_, n);
        dg(i, i) = f_->primitive();
        if (f_->primitive() != 1) gens.push_back({v, dg, *inverse(dg)});
        for (int j = 0; j < n; ++j) {
          if (i == j) continue;
          Matrix t = Matrix::identity(f_, n);
          t(i, j) = 1;
          gens.push_back({v, t, *inverse(t)});
        }
      }
    }
    std::unordered_set<std::vector<std::int32_t>, VecHash> seen{r.data};
    std::deque<std::vector<std::int32_t>> queue{r.data};
    std::vector<std::int32_t> best = r.data;
    while (!queue.empty()) {
      auto cur = std::move(queue.front());
      queue.pop_front();
      Rep rc{r.dim, cur};
      for (const auto& g : gens) {
        Rep nx{r.dim, {}};
        for (std::size_t k = 0; k < quiver_.arrows.size(); ++k) {
          Matrix a = arrow(rc, k);
          if (tgt(k) == g.vertex) a = g.g * a;
          if (src(k) == g.vertex) a = a * g.ginv;
          append_code(nx.data, a);
        }
        if (seen.insert(nx.data).second) {
          Budget::charge(1, "orbit exploration");
          best = std::min(best, nx.data);
          queue.push_back(std::move(nx.data));
        }
      }
    }
    Rep canon{r.dim, best};
    std::pair<std::string, std::uint64_t> res{format(canon), seen.size()};
    remember(res.first, canon);
    std::lock_guard lock(orbit_mu_);
    for (const auto& x : seen) {
      std::vector<std::int32_t> t(r.dim.begin(), r.dim.end());
      t.push_back(-1);
      t.insert(t.end(), x.begin(), x.end());
      orbit_memo_.emplace(std::move(t), res);
    }
    return res;
  }

  BigInt aut_order(const Rep& r) const override {
    if (kind_ == Kind::VectFq) return gl_order(r.dim[0], q());
    if (kind_ == Kind::NilJordanFq) {
      auto parts = jordan_type(arrow(r, 0));
      // q^(sum of squared conjugate parts) * prod over multiplicities m of prod_{k<=m} (1 - q^-k)
      std::map<int, int> mult;
      for (int p : parts) ++mult[p];
      long exponent = 0;
      int longest = parts.empty() ? 0 : parts.front();
      for (int i = 1; i <= longest; ++i) {
        long c = 0;
        for (int p : parts)
          if (p >= i) ++c;
        exponent += c * c;
      }
      BigInt r2 = 1;
      for (auto [part, m] : mult) {
        exponent -= static_cast<long>(m) * (m + 1) / 2;
        for (int k = 1; k <= m; ++k) {
          BigInt qk;
          mpz_ui_pow_ui(qk.get_mpz_t(), static_cast<unsigned long>(q()), static_cast<unsigned long>(k));
          r2 *= qk - 1;
        }
      }
      BigInt qe;
      mpz_ui_pow_ui(qe.get_mpz_t(), static_cast<unsigned long>(q()), static_cast<unsigned long>(exponent));
      return r2 * qe;
    }
    BigInt g = 1;
    for (int n : r.dim) g *= gl_order(n, q());
    return g / BigInt(static_cast<unsigned long>(orbit(r).second));
  }

  // Basis (as columns) of {phi : V_a phi_s = phi_t U_a} inside prod_i Mat(v_i x u_i).
  Matrix hom_space(const Rep& u, const Rep& v) const {
    std::vector<int> off;
    int n = 0;
    for (std::size_t i = 0; i < u.dim.size(); ++i) {
      off.push_back(n);
      n += u.dim[i] * v.dim[i];
    }
    int eqs = 0;
    for (std::size_t k = 0; k < quiver_.arrows.size(); ++k) eqs += v.dim[tgt(k)] * u.dim[src(k)];
    Matrix a(f_, eqs, n);
    int row = 0;
    for (std::size_t k = 0; k < quiver_.arrows.size(); ++k) {
      std::size_t s = src(k), t = tgt(k);
      Matrix va = arrow(v, k), ua = arrow(u, k);
      // (va phi_s - phi_t ua)(i, j)
      for (int i = 0; i < v.dim[t]; ++i)
        for (int j = 0; j < u.dim[s]; ++j, ++row) {
          for (int l = 0; l < v.dim[s]; ++l) {
            int col = off[s] + l * u.dim[s] + j;
            a(row, col) = f_->add(a(row, col), va(i, l));
          }
          for (int l = 0; l < u.dim[t]; ++l) {
            int col = off[t] + i * u.dim[t] + l;
            a(row, col) = f_->sub(a(row, col), ua(l, j));
          }
        }
    }
    return kernel_basis(a);
  }

  Morphism morphism_from_vector(const Rep& u, const Rep& v, const Matrix& x) const {
    Morphism m;
    int pos = 0;
    for (std::size_t i = 0; i < u.dim.size(); ++i) {
      std::vector<std::int32_t> part;
      for (int t = 0; t < u.dim[i] * v.dim[i]; ++t) part.push_back(static_cast<std::int32_t>(x(pos++, 0)));
      m.parts.push_back(std::move(part));
    }
    return m;
  }

  std::vector<Morphism> hom_set(const Rep& u, const Rep& v) const override {
    Matrix basis = hom_space(u, v);
    int k = basis.cols();
    std::uint64_t total = ipow(static_cast<std::uint64_t>(q()), k);
    Budget::charge(total, "hom set enumeration");
    std::vector<Morphism> out;
    std::vector<int> coef(static_cast<std::size_t>(k), 0);
    for (std::uint64_t t = 0; t < total; ++t) {
      std::uint64_t x = t;
      Matrix c(f_, k, 1);
      for (int i = 0; i < k; ++i) {
        c(i, 0) = static_cast<Elem>(x % static_cast<std::uint64_t>(q()));
        x /= static_cast<std::uint64_t>(q());
      }
      out.push_back(morphism_from_vector(u, v, basis * c));
    }
    return out;
  }

  BigInt hom_count(const Rep& u, const Rep& v) const override {
    BigInt r;
    mpz_ui_pow_ui(r.get_mpz_t(), static_cast<unsigned long>(q()), static_cast<unsigned long>(hom_space(u, v).cols()));
    return r;
  }

  Matrix part(const Morphism& f, std::size_t i, const Rep& u, const Rep& v) const {
    return matrix_from_code(f_, v.dim[i], u.dim[i], f.parts[i]);
  }

  bool is_morphism(const Morphism& f, const Rep& u, const Rep& v) const override {
    if (f.parts.size() != u.dim.size()) return false;
    for (std::size_t i = 0; i < u.dim.size(); ++i)
      if (f.parts[i].size() != static_cast<std::size_t>(u.dim[i] * v.dim[i])) return false;
    for (std::size_t k = 0; k < quiver_.arrows.size(); ++k)
      if (!(arrow(v, k) * part(f, src(k), u, v) == part(f, tgt(k), u, v) * arrow(u, k))) return false;
    return true;
  }

  bool is_inflation(const Morphism& f, const Rep& u, const Rep& v) const override {
    if (!is_morphism(f, u, v)) return false;
    for (std::size_t i = 0; i < u.dim.size(); ++i)
      if (rank(part(f, i, u, v)) != u.dim[i]) return false;
    return true;
  }

  bool is_deflation(const Morphism& f, const Rep& u, const Rep& v) const override {
    if (!is_morphism(f, u, v)) return false;
    for (std::size_t i = 0; i < u.dim.size(); ++i)
      if (rank(part(f, i, u, v)) != v.dim[i]) return false;
    return true;
  }

  bool is_zero(const Morphism& f) const override {
    for (const auto& p : f.parts)
      for (auto x : p)
        if (x != 0) return false;
    return true;
  }

  Morphism compose(const Morphism& g, const Morphism& f, const Rep& u, const Rep& v, const Rep& w) const override {
    Morphism h;
    for (std::size_t i = 0; i < u.dim.size(); ++i) {
      std::vector<std::int32_t> p;
      append_code(p, part(g, i, v, w) * part(f, i, u, v));
      h.parts.push_back(std::move(p));
    }
    return h;
  }

  Chart chart(const SizeKey& ambient, const Sub& a, const Sub& b) const {
    Chart ch;
    for (std::size_t i = 0; i < ambient.size(); ++i) {
      int n = ambient[i];
      Matrix ra = sub_basis(a, i, ambient), rb = sub_basis(b, i, ambient);
      auto ea = rref(ra);
      std::vector<bool> is_piv(static_cast<std::size_t>(n), false);
      for (int p : ea.pivots) is_piv[static_cast<std::size_t>(p)] = true;
      std::vector<int> np;
      for (int c = 0; c < n; ++c)
        if (!is_piv[static_cast<std::size_t>(c)]) np.push_back(c);
      auto reduce = [&](Matrix row) {
        for (std::size_t r = 0; r < ea.pivots.size(); ++r) {
          Elem t = row(0, ea.pivots[r]);
          if (t == 0) continue;
          for (int c = 0; c < n; ++c) row(0, c) = f_->sub(row(0, c), f_->mul(t, ea.reduced(static_cast<int>(r), c)));
        }
        return row;
      };
      Matrix m(f_, rb.rows(), static_cast<int>(np.size()));
      for (int r = 0; r < rb.rows(); ++r) {
        Matrix row = reduce(rb.submatrix({r}, [&] {
          std::vector<int> all(static_cast<std::size_t>(n));
          std::iota(all.begin(), all.end(), 0);
          return all;
        }()));
        for (std::size_t j = 0; j < np.size(); ++j) m(r, static_cast<int>(j)) = row(0, np[j]);
      }
      auto ew = rref(m);
      int k = static_cast<int>(ew.pivots.size());
      Matrix c(f_, k, n), s(f_, n, k);
      for (int j = 0; j < k; ++j) {
        int col = np[static_cast<std::size_t>(ew.pivots[static_cast<std::size_t>(j)])];
        c(j, col) = f_->add(c(j, col), 1);
        for (std::size_t r = 0; r < ea.pivots.size(); ++r)
          c(j, ea.pivots[r]) = f_->sub(c(j, ea.pivots[r]), ea.reduced(static_cast<int>(r), col));
        for (std::size_t t = 0; t < np.size(); ++t) s(np[t], j) = ew.reduced(j, static_cast<int>(t));
      }
      ch.c.push_back(std::move(c));
      ch.s.push_back(std::move(s));
    }
    return ch;
  }

  Rep subquotient(const Rep& v, const Sub& a, const Sub& b) const override {
    Chart ch = chart(v.dim, a, b);
    Rep r{size_sub(b.dim, a.dim), {}};
    for (std::size_t k = 0; k < quiver_.arrows.size(); ++k) append_code(r.data, ch.c[tgt(k)] * arrow(v, k) * ch.s[src(k)]);
    return r;
  }

  Sub relative_sub(const Rep& v, const Sub& a, const Sub& b, const Sub& c) const override {
    Chart ch = chart(v.dim, a, b);
    Sub s{size_sub(c.dim, a.dim), {}};
    for (std::size_t i = 0; i < v.dim.size(); ++i) {
      Matrix rows = (ch.c[i] * sub_basis(c, i, v.dim).transpose()).transpose();
      auto e = rref(rows);
      if (static_cast<int>(e.pivots.size()) != s.dim[i]) throw std::logic_error("relative_sub: c does not contain a");
      append_code(s.data, e.reduced);
    }
    return s;
  }

  std::vector<Matrix> elements(Idx g, const SizeKey& d) const {
    FiniteGroup grp = aut_group(d);
    auto parts = grp.split(g);
    std::vector<Matrix> out;
    for (std::size_t i = 0; i < d.size(); ++i) {
      auto cg = std::static_pointer_cast<const CodeGroup>(grp.factors()[i]);
      out.push_back(matrix_from_code(f_, d[i], d[i], cg->element(parts[i])));
    }
    return out;
  }

  FiniteGroup aut_group(const SizeKey& d) const override {
    std::vector<std::shared_ptr<const GroupFactor>> fs;
    for (int n : d) fs.push_back(general_linear_group(n, f_));
    return FiniteGroup(fs);
  }

  Rep act(Idx g, const Rep& r) const override {
    auto gs = elements(g, r.dim);
    Rep out{r.dim, {}};
    for (std::size_t k = 0; k < quiver_.arrows.size(); ++k)
      append_code(out.data, gs[tgt(k)] * arrow(r, k) * *inverse(gs[src(k)]));
    return out;
  }

  std::vector<Sub> subobjects(const Rep& v, const SizeKey& d) const override {
    std::vector<std::vector<Matrix>> choices(v.dim.size());
    std::vector<std::size_t> sizes;
    std::uint64_t total = 1;
    for (std::size_t i = 0; i < v.dim.size(); ++i) {
      if (d[i] > v.dim[i] || d[i] < 0) return {};
      enumerate_subspaces(v.dim[i], d[i], f_, [&](const Matrix& m) { choices[i].push_back(m); });
      sizes.push_back(choices[i].size());
      total *= choices[i].size();
    }
    Budget::charge(total, "subobject enumeration");
    std::vector<Matrix> arrows;
    for (std::size_t k = 0; k < quiver_.arrows.size(); ++k) arrows.push_back(arrow(v, k));
    std::vector<Sub> out;
    for_each_tuple(sizes, [&](const std::vector<std::size_t>& idx) {
      for (std::size_t k = 0; k < arrows.size(); ++k) {
        const Matrix& us = choices[src(k)][idx[src(k)]];
        const Matrix& ut = choices[tgt(k)][idx[tgt(k)]];
        if (us.rows() == 0) continue;
        Matrix img = (arrows[k] * us.transpose()).transpose();
        if (rank(ut.vstack(img)) != ut.rows()) return;
      }
      Sub s{d, {}};
      for (std::size_t i = 0; i < idx.size(); ++i) append_code(s.data, choices[i][idx[i]]);
      out.push_back(std::move(s));
    });
    return out;
  }

  Sub act_sub(Idx g, const Rep& v, const Sub& s) const override {
    auto gs = elements(g, v.dim);
    Sub out{s.dim, {}};
    for (std::size_t i = 0; i < v.dim.size(); ++i) append_code(out.data, rref(sub_basis(s, i, v.dim) * gs[i].transpose()).reduced);
    return out;
  }

  Sub zero_sub(const Rep& v) const override { return Sub{zero_size(), {}}; }

  Sub full_sub(const Rep& v) const override {
    Sub s{v.dim, {}};
    for (int n : v.dim) append_code(s.data, Matrix::identity(f_, n));
    return s;
  }

  bool contains(const Rep& v, const Sub& big, const Sub& small) const override {
    for (std::size_t i = 0; i < v.dim.size(); ++i) {
      if (small.dim[i] > big.dim[i]) return false;
      Matrix b = sub_basis(big, i, v.dim);
      if (rank(b.vstack(sub_basis(small, i, v.dim))) != b.rows()) return false;
    }
    return true;
  }

  Idx induced_element(Idx g, const Rep& v, const Sub& a, const Sub& b) const override {
    auto gs = elements(g, v.dim);
    Chart from = chart(v.dim, a, b);
    Chart to = chart(v.dim, act_sub(g, v, a), act_sub(g, v, b));
    SizeKey k = size_sub(b.dim, a.dim);
    FiniteGroup grp = aut_group(k);
    std::vector<Idx> parts;
    for (std::size_t i = 0; i < v.dim.size(); ++i) {
      Matrix m = to.c[i] * gs[i] * from.s[i];
      CodeGroup::Code code;
      append_code(code, m);
      parts.push_back(std::static_pointer_cast<const CodeGroup>(grp.factors()[i])->index_of(code));
    }
    return grp.join(parts);
  }

  Morphism inclusion(const Rep& v, const Sub& s) const override {
    Chart ch = chart(v.dim, zero_sub(v), s);
    Morphism m;
    for (const auto& x : ch.s) {
      m.parts.emplace_back();
      append_code(m.parts.back(), x);
    }
    return m;
  }

  Morphism projection(const Rep& v, const Sub& s) const override {
    Chart ch = chart(v.dim, s, full_sub(v));
    Morphism m;
    for (const auto& x : ch.c) {
      m.parts.emplace_back();
      append_code(m.parts.back(), x);
    }
    return m;
  }

  SiteCounts compute_site_counts(const Rep& v) const override {
    if (kind_ != Kind::VectFq) return ProtoExactInstance::compute_site_counts(v);
    SiteCounts c;
    int n = v.dim[0];
    for (int d = 0; d <= n; ++d) {
      std::uint64_t cnt = count_subspaces(n, d, f_);
      Budget::charge(cnt, "subspace count");
      c[{iso_key(Rep{{d}, {}}), iso_key(Rep{{n - d}, {}})}] = cnt;
    }
    return c;
  }

  std::vector<ExtClass> ext1_classes(const Rep& w, const Rep& u) const override {
    // Coboundary phi -> (U_a phi_s - phi_t W_a) from prod Hom(W_i, U_i) into prod Hom(W_s, U_t);
    // classes are the cokernel, spanned by the non-pivot coordinates of the image.
    std::vector<int> aoff;
    int neta = 0;
    for (std::size_t k = 0; k < quiver_.arrows.size(); ++k) {
      aoff.push_back(neta);
      neta += u.dim[tgt(k)] * w.dim[src(k)];
    }
    std::vector<int> voff;
    int nphi = 0;
    for (std::size_t i = 0; i < u.dim.size(); ++i) {
      voff.push_back(nphi);
      nphi += u.dim[i] * w.dim[i];
    }
    Matrix img(f_, nphi, neta);  // rows: images of basis vectors
    for (std::size_t i = 0; i < u.dim.size(); ++i)
      for (int r = 0; r < u.dim[i]; ++r)
        for (int c = 0; c < w.dim[i]; ++c) {
          int row = voff[i] + r * w.dim[i] + c;
          // phi = E_rc at vertex i
          for (std::size_t k = 0; k < quiver_.arrows.size(); ++k) {
            std::size_t s = src(k), t = tgt(k);
            Matrix ua = arrow(u, k), wa = arrow(w, k);
            int cols = w.dim[s];
            if (s == i)  // U_a E_rc : column c of result = U_a column r
              for (int x = 0; x < u.dim[t]; ++x) {
                int col = aoff[k] + x * cols + c;
                img(row, col) = f_->add(img(row, col), ua(x, r));
              }
            if (t == i)  // - E_rc W_a : row r of result = - row c of W_a
              for (int y = 0; y < cols; ++y) {
                int col = aoff[k] + r * cols + y;
                img(row, col) = f_->sub(img(row, col), wa(c, y));
              }
          }
        }
    auto e = rref(img);
    std::vector<bool> is_piv(static_cast<std::size_t>(neta), false);
    for (int p : e.pivots) is_piv[static_cast<std::size_t>(p)] = true;
    std::vector<int> free;
    for (int c = 0; c < neta; ++c)
      if (!is_piv[static_cast<std::size_t>(c)]) free.push_back(c);
    std::uint64_t total = ipow(static_cast<std::uint64_t>(q()), static_cast<int>(free.size()));
    Budget::charge(total, "extension enumeration");
    std::vector<ExtClass> out;
    SizeKey vd = size_add(u.dim, w.dim);
    for (std::uint64_t t = 0; t < total; ++t) {
      std::vector<Elem> eta(static_cast<std::size_t>(neta), 0);
      std::uint64_t x = t;
      for (int c : free) {
        eta[static_cast<std::size_t>(c)] = static_cast<Elem>(x % static_cast<std::uint64_t>(q()));
        x /= static_cast<std::uint64_t>(q());
      }
      Rep v{vd, {}};
      std::string desc = "eta=[";
      for (std::size_t k = 0; k < quiver_.arrows.size(); ++k) {
        std::size_t s = src(k), tt = tgt(k);
        Matrix m(f_, vd[tt], vd[s]);
        Matrix ua = arrow(u, k), wa = arrow(w, k);
        for (int r = 0; r < u.dim[tt]; ++r)
          for (int c = 0; c < u.dim[s]; ++c) m(r, c) = ua(r, c);
        for (int r = 0; r < w.dim[tt]; ++r)
          for (int c = 0; c < w.dim[s]; ++c) m(u.dim[tt] + r, u.dim[s] + c) = wa(r, c);
        for (int r = 0; r < u.dim[tt]; ++r)
          for (int c = 0; c < w.dim[s]; ++c) {
            Elem val = eta[static_cast<std::size_t>(aoff[k] + r * w.dim[s] + c)];
            m(r, u.dim[s] + c) = val;
            desc += std::to_string(val);
          }
        append_code(v.data, m);
      }
      out.push_back({iso_key(v), v, desc + "]"});
    }
    return out;
  }

  Field field() const override { return f_; }

  std::vector<Matrix> arrow_maps(const Rep& r) const override {
    std::vector<Matrix> out;
    for (std::size_t k = 0; k < quiver_.arrows.size(); ++k) out.push_back(arrow(r, k));
    return out;
  }

  std::vector<Matrix> sub_bases(const Rep& v, const Sub& s) const override {
    std::vector<Matrix> out;
    for (std::size_t i = 0; i < v.dim.size(); ++i) out.push_back(sub_basis(s, i, v.dim));
    return out;
  }

  std::pair<std::vector<Matrix>, std::vector<Matrix>> chart_maps(const Rep& v, const Sub& a, const Sub& b) const override {
    Chart ch = chart(v.dim, a, b);
    return {std::move(ch.c), std::move(ch.s)};
  }

  std::vector<Matrix> element_matrices(Idx g, const SizeKey& d) const override { return elements(g, d); }

  Idx element_index(const std::vector<Matrix>& parts, const SizeKey& d) const override {
    FiniteGroup grp = aut_group(d);
    std::vector<Idx> idx;
    for (std::size_t i = 0; i < d.size(); ++i) {
      CodeGroup::Code code;
      append_code(code, parts[i]);
      idx.push_back(std::static_pointer_cast<const CodeGroup>(grp.factors()[i])->index_of(code));
    }
    return grp.join(idx);
  }

  Sub sub_from_rows(const Rep& v, const std::vector<Matrix>& rows) const override {
    Sub s{zero_size(), {}};
    for (std::size_t i = 0; i < v.dim.size(); ++i) {
      auto e = rref(rows[i]);
      s.dim[i] = static_cast<int>(e.pivots.size());
      append_code(s.data, e.reduced);
    }
    return s;
  }

 private:
  Field f_;
  bool nilpotent_loop_ = false;
  mutable std::mutex orbit_mu_;
  mutable std::unordered_map<std::vector<std::int32_t>, std::pair<std::string, std::uint64_t>, VecHash> orbit_memo_;
};

// ---------- F1 instances ----------

class F1Instance final : public ProtoExactInstance {
 public:
  F1Instance(Kind kind, Quiver quiver) : ProtoExactInstance(kind, std::move(quiver)) {}

  int q() const override { return 1; }
  bool exact() const override { return false; }

  std::size_t src(std::size_t k) const { return static_cast<std::size_t>(quiver_.arrows[k].source); }
  std::size_t tgt(std::size_t k) const { return static_cast<std::size_t>(quiver_.arrows[k].target); }
  std::size_t offset(const SizeKey& d, std::size_t arrow) const {
    std::size_t o = 0;
    for (std::size_t k = 0; k < arrow; ++k) o += static_cast<std::size_t>(d[src(k)]);
    return o;
  }
  // Image of x (1-based, 0 = base point) under arrow k.
  std::int32_t apply(const Rep& r, std::size_t k, std::int32_t x) const {
    return x == 0 ? 0 : r.data[offset(r.dim, k) + static_cast<std::size_t>(x - 1)];
  }
  std::vector<std::int32_t> subset(const Sub& s, std::size_t v) const {
    std::size_t o = 0;
    for (std::size_t i = 0; i < v; ++i) o += static_cast<std::size_t>(s.dim[i]);
    return {s.data.begin() + static_cast<long>(o), s.data.begin() + static_cast<long>(o) + s.dim[v]};
  }

  std::string validate_rep(const Rep& r) const override {
    if (static_cast<int>(r.dim.size()) != num_vertices()) return "dimension vector has the wrong length";
    for (int x : r.dim)
      if (x < 0) return "negative size";
    if (r.data.size() != offset(r.dim, quiver_.arrows.size())) return "structure maps have the wrong shape";
    for (std::size_t k = 0; k < quiver_.arrows.size(); ++k) {
      std::set<std::int32_t> used;
      for (std::int32_t x = 1; x <= r.dim[src(k)]; ++x) {
        auto y = apply(r, k, x);
        if (y < 0 || y > r.dim[tgt(k)]) return "structure map leaves its target";
        if (y != 0 && !used.insert(y).second) return "structure map is not injective away from the base point";
      }
    }
    return "";
  }

  std::vector<Rep> all_reps(const SizeKey& d) const override {
    std::vector<std::vector<std::vector<std::int32_t>>> choices;
    std::vector<std::size_t> sizes;
    std::uint64_t total = 1;
    for (std::size_t k = 0; k < quiver_.arrows.size(); ++k) {
      choices.push_back(partial_injections(d[src(k)], d[tgt(k)]));
      sizes.push_back(choices.back().size());
      total *= sizes.back();
    }
    Budget::charge(total, "representation enumeration");
    std::vector<Rep> out;
    for_each_tuple(sizes, [&](const std::vector<std::size_t>& idx) {
      Rep r{d, {}};
      for (std::size_t k = 0; k < idx.size(); ++k) r.data.insert(r.data.end(), choices[k][idx[k]].begin(), choices[k][idx[k]].end());
      out.push_back(std::move(r));
    });
    return out;
  }

  std::vector<Rep> canonical_candidates(const SizeKey& d) const override {
    if (kind_ == Kind::VectF1) return {Rep{d, {}}};
    return all_reps(d);
  }

  std::string format(const Rep& r) const {
    std::string s = size_string(r.dim);
    for (std::size_t k = 0; k < quiver_.arrows.size(); ++k) {
      s += "|" + quiver_.arrows[k].name + "=[";
      for (std::int32_t x = 1; x <= r.dim[src(k)]; ++x) {
        auto y = apply(r, k, x);
        s += (x > 1 ? "," : "") + (y == 0 ? std::string("*") : std::to_string(y));
      }
      s += "]";
    }
    return s;
  }
  std::string describe(const Rep& r) const override { return format(r); }

  std::pair<std::string, std::uint64_t> orbit(const Rep& r) const {
    std::vector<std::int32_t> tag(r.dim.begin(), r.dim.end());
    tag.push_back(-1);
    tag.insert(tag.end(), r.data.begin(), r.data.end());
    {
      std::lock_guard lock(orbit_mu_);
      if (auto it = orbit_memo_.find(tag); it != orbit_memo_.end()) return it->second;
    }
    std::string err = validate_rep(r);
    if (!err.empty()) throw InputError("malformed object: " + err);
    std::unordered_set<std::vector<std::int32_t>, VecHash> seen{r.data};
    std::deque<std::vector<std::int32_t>> queue{r.data};
    std::vector<std::int32_t> best = r.data;
    while (!queue.empty()) {
      Rep cur{r.dim, std::move(queue.front())};
      queue.pop_front();
      for (std::size_t v = 0; v < r.dim.size(); ++v)
        for (std::int32_t i = 1; i < r.dim[v]; ++i) {
          auto swap = [&](std::int32_t x) { return x == i ? i + 1 : x == i + 1 ? i : x; };
          Rep nx{r.dim, std::vector<std::int32_t>(cur.data.size())};
          for (std::size_t k = 0; k < quiver_.arrows.size(); ++k)
            for (std::int32_t x = 1; x <= r.dim[src(k)]; ++x) {
              std::int32_t sx = src(k) == v ? swap(x) : x;
              std::int32_t y = apply(cur, k, x);
              nx.data[offset(r.dim, k) + static_cast<std::size_t>(sx - 1)] = tgt(k) == v ? swap(y) : y;
            }
          if (seen.insert(nx.data).second) {
            Budget::charge(1, "orbit exploration");
            best = std::min(best, nx.data);
            queue.push_back(std::move(nx.data));
          }
        }
    }
    Rep canon{r.dim, best};
    std::pair<std::string, std::uint64_t> res{format(canon), seen.size()};
    remember(res.first, canon);
    std::lock_guard lock(orbit_mu_);
    for (const auto& x : seen) {
      std::vector<std::int32_t> t(r.dim.begin(), r.dim.end());
      t.push_back(-1);
      t.insert(t.end(), x.begin(), x.end());
      orbit_memo_.emplace(std::move(t), res);
    }
    return res;
  }

  std::string iso_key(const Rep& r) const override {
    if (kind_ == Kind::VectF1) {
      std::string k = std::to_string(r.dim[0]);
      remember(k, Rep{r.dim, {}});
      return k;
    }
    return orbit(r).first;
  }

  BigInt aut_order(const Rep& r) const override {
    BigInt g = 1;
    for (int n : r.dim) {
      BigInt f;
      mpz_fac_ui(f.get_mpz_t(), static_cast<unsigned long>(n));
      g *= f;
    }
    if (kind_ == Kind::VectF1) return g;
    return g / BigInt(static_cast<unsigned long>(orbit(r).second));
  }

  bool is_morphism(const Morphism& f, const Rep& u, const Rep& v) const override {
    if (f.parts.size() != u.dim.size()) return false;
    for (std::size_t i = 0; i < u.dim.size(); ++i) {
      if (f.parts[i].size() != static_cast<std::size_t>(u.dim[i])) return false;
      std::set<std::int32_t> used;
      for (auto y : f.parts[i]) {
        if (y < 0 || y > v.dim[i]) return false;
        if (y != 0 && !used.insert(y).second) return false;
      }
    }
    auto at = [&](std::size_t i, std::int32_t x) { return x == 0 ? 0 : f.parts[i][static_cast<std::size_t>(x - 1)]; };
    for (std::size_t k = 0; k < quiver_.arrows.size(); ++k)
      for (std::int32_t x = 1; x <= u.dim[src(k)]; ++x)
        if (at(tgt(k), apply(u, k, x)) != apply(v, k, at(src(k), x))) return false;
    return true;
  }

  std::vector<Morphism> hom_set(const Rep& u, const Rep& v) const override {
    std::vector<std::vector<std::vector<std::int32_t>>> choices;
    std::vector<std::size_t> sizes;
    std::uint64_t total = 1;
    for (std::size_t i = 0; i < u.dim.size(); ++i) {
      choices.push_back(partial_injections(u.dim[i], v.dim[i]));
      sizes.push_back(choices.back().size());
      total *= sizes.back();
    }
    Budget::charge(total, "hom set enumeration");
    std::vector<Morphism> out;
    for_each_tuple(sizes, [&](const std::vector<std::size_t>& idx) {
      Morphism m;
      for (std::size_t i = 0; i < idx.size(); ++i) m.parts.push_back(choices[i][idx[i]]);
      if (is_morphism(m, u, v)) out.push_back(std::move(m));
    });
    return out;
  }

  bool is_inflation(const Morphism& f, const Rep& u, const Rep& v) const override {
    if (!is_morphism(f, u, v)) return false;
    for (const auto& p : f.parts)
      for (auto y : p)
        if (y == 0) return false;
    return true;
  }

  bool is_deflation(const Morphism& f, const Rep& u, const Rep& v) const override {
    if (!is_morphism(f, u, v)) return false;
    for (std::size_t i = 0; i < u.dim.size(); ++i) {
      std::set<std::int32_t> hit;
      for (auto y : f.parts[i])
        if (y != 0) hit.insert(y);
      if (static_cast<int>(hit.size()) != v.dim[i]) return false;
    }
    return true;
  }

  bool is_zero(const Morphism& f) const override {
    for (const auto& p : f.parts)
      for (auto x : p)
        if (x != 0) return false;
    return true;
  }

  Morphism compose(const Morphism& g, const Morphism& f, const Rep& u, const Rep&, const Rep&) const override {
    Morphism h;
    for (std::size_t i = 0; i < u.dim.size(); ++i) {
      std::vector<std::int32_t> p;
      for (auto y : f.parts[i]) p.push_back(y == 0 ? 0 : g.parts[i][static_cast<std::size_t>(y - 1)]);
      h.parts.push_back(std::move(p));
    }
    return h;
  }

  FiniteGroup aut_group(const SizeKey& d) const override {
    std::vector<std::shared_ptr<const GroupFactor>> fs;
    for (int n : d) fs.push_back(symmetric_group(n));
    return FiniteGroup(fs);
  }

  std::vector<std::vector<std::int32_t>> perms(Idx g, const SizeKey& d) const {
    FiniteGroup grp = aut_group(d);
    auto parts = grp.split(g);
    std::vector<std::vector<std::int32_t>> out;
    for (std::size_t i = 0; i < d.size(); ++i)
      out.push_back(std::static_pointer_cast<const CodeGroup>(grp.factors()[i])->element(parts[i]));
    return out;
  }

  Rep act(Idx g, const Rep& r) const override {
    auto ps = perms(g, r.dim);
    auto mv = [&](std::size_t v, std::int32_t x) { return x == 0 ? 0 : ps[v][static_cast<std::size_t>(x - 1)] + 1; };
    Rep out{r.dim, std::vector<std::int32_t>(r.data.size())};
    for (std::size_t k = 0; k < quiver_.arrows.size(); ++k)
      for (std::int32_t x = 1; x <= r.dim[src(k)]; ++x)
        out.data[offset(r.dim, k) + static_cast<std::size_t>(mv(src(k), x) - 1)] = mv(tgt(k), apply(r, k, x));
    return out;
  }

  std::vector<Sub> subobjects(const Rep& v, const SizeKey& d) const override {
    std::vector<std::vector<std::vector<int>>> choices;
    std::vector<std::size_t> sizes;
    std::uint64_t total = 1;
    for (std::size_t i = 0; i < v.dim.size(); ++i) {
      if (d[i] > v.dim[i] || d[i] < 0) return {};
      choices.push_back(combinations(v.dim[i], d[i]));
      sizes.push_back(choices.back().size());
      total *= sizes.back();
    }
    Budget::charge(total, "subobject enumeration");
    std::vector<Sub> out;
    for_each_tuple(sizes, [&](const std::vector<std::size_t>& idx) {
      for (std::size_t k = 0; k < quiver_.arrows.size(); ++k) {
        const auto& us = choices[src(k)][idx[src(k)]];
        const auto& ut = choices[tgt(k)][idx[tgt(k)]];
        for (int x : us) {
          auto y = apply(v, k, x);
          if (y != 0 && std::find(ut.begin(), ut.end(), y) == ut.end()) return;
        }
      }
      Sub s{d, {}};
      for (std::size_t i = 0; i < idx.size(); ++i) s.data.insert(s.data.end(), choices[i][idx[i]].begin(), choices[i][idx[i]].end());
      out.push_back(std::move(s));
    });
    return out;
  }

  Sub act_sub(Idx g, const Rep& v, const Sub& s) const override {
    auto ps = perms(g, v.dim);
    Sub out{s.dim, {}};
    for (std::size_t i = 0; i < v.dim.size(); ++i) {
      auto xs = subset(s, i);
      for (auto& x : xs) x = ps[i][static_cast<std::size_t>(x - 1)] + 1;
      std::sort(xs.begin(), xs.end());
      out.data.insert(out.data.end(), xs.begin(), xs.end());
    }
    return out;
  }

  Sub zero_sub(const Rep&) const override { return Sub{zero_size(), {}}; }

  Sub full_sub(const Rep& v) const override {
    Sub s{v.dim, {}};
    for (int n : v.dim)
      for (int x = 1; x <= n; ++x) s.data.push_back(x);
    return s;
  }

  bool contains(const Rep& v, const Sub& big, const Sub& small) const override {
    for (std::size_t i = 0; i < v.dim.size(); ++i) {
      auto b = subset(big, i), s = subset(small, i);
      if (!std::includes(b.begin(), b.end(), s.begin(), s.end())) return false;
    }
    return true;
  }

  // Elements of b \ a in increasing order, per vertex.
  std::vector<std::vector<std::int32_t>> difference(const Rep& v, const Sub& a, const Sub& b) const {
    std::vector<std::vector<std::int32_t>> out;
    for (std::size_t i = 0; i < v.dim.size(); ++i) {
      auto sa = subset(a, i), sb = subset(b, i);
      std::vector<std::int32_t> d;
      std::set_difference(sb.begin(), sb.end(), sa.begin(), sa.end(), std::back_inserter(d));
      out.push_back(std::move(d));
    }
    return out;
  }

  static std::int32_t position(const std::vector<std::int32_t>& xs, std::int32_t x) {
    auto it = std::lower_bound(xs.begin(), xs.end(), x);
    return it != xs.end() && *it == x ? static_cast<std::int32_t>(it - xs.begin()) + 1 : 0;
  }

  Rep subquotient(const Rep& v, const Sub& a, const Sub& b) const override {
    auto diff = difference(v, a, b);
    Rep r{size_sub(b.dim, a.dim), {}};
    for (std::size_t k = 0; k < quiver_.arrows.size(); ++k)
      for (auto x : diff[src(k)]) r.data.push_back(position(diff[tgt(k)], apply(v, k, x)));
    return r;
  }

  Sub relative_sub(const Rep& v, const Sub& a, const Sub& b, const Sub& c) const override {
    auto diff_b = difference(v, a, b), diff_c = difference(v, a, c);
    Sub s{size_sub(c.dim, a.dim), {}};
    for (std::size_t i = 0; i < v.dim.size(); ++i)
      for (auto x : diff_c[i]) s.data.push_back(position(diff_b[i], x));
    return s;
  }

  Idx induced_element(Idx g, const Rep& v, const Sub& a, const Sub& b) const override {
    auto ps = perms(g, v.dim);
    auto from = difference(v, a, b);
    auto to = difference(v, act_sub(g, v, a), act_sub(g, v, b));
    SizeKey k = size_sub(b.dim, a.dim);
    FiniteGroup grp = aut_group(k);
    std::vector<Idx> parts;
    for (std::size_t i = 0; i < v.dim.size(); ++i) {
      CodeGroup::Code p;
      for (auto x : from[i]) p.push_back(position(to[i], ps[i][static_cast<std::size_t>(x - 1)] + 1) - 1);
      parts.push_back(std::static_pointer_cast<const CodeGroup>(grp.factors()[i])->index_of(p));
    }
    return grp.join(parts);
  }

  Morphism inclusion(const Rep& v, const Sub& s) const override {
    Morphism m;
    for (std::size_t i = 0; i < v.dim.size(); ++i) m.parts.push_back(subset(s, i));
    return m;
  }

  Morphism projection(const Rep& v, const Sub& s) const override {
    auto diff = difference(v, s, full_sub(v));
    Morphism m;
    for (std::size_t i = 0; i < v.dim.size(); ++i) {
      std::vector<std::int32_t> p;
      for (std::int32_t x = 1; x <= v.dim[i]; ++x) p.push_back(position(diff[i], x));
      m.parts.push_back(std::move(p));
    }
    return m;
  }

 private:
  mutable std::mutex orbit_mu_;
  mutable std::unordered_map<std::vector<std::int32_t>, std::pair<std::string, std::uint64_t>, VecHash> orbit_memo_;
};

Field field_for(int q) {
  if (q < 2) throw InputError("q must be a prime power > 1");
  return FiniteField::of_order(q);
}

}  // namespace

InstancePtr instance_vect_fq(int q) {
  return std::make_shared<LinearInstance>(ProtoExactInstance::Kind::VectFq, Quiver::point(), field_for(q));
}

InstancePtr instance_vect_f1() { return std::make_shared<F1Instance>(ProtoExactInstance::Kind::VectF1, Quiver::point()); }

InstancePtr instance_rep_fq(const Quiver& quiver, int q) {
  quiver.validate();
  if (!quiver.acyclic()) {
    if (!quiver.nilpotent) throw InputError("quiver has an oriented cycle; representations must be flagged nilpotent");
    if (!quiver.is_jordan()) throw InputError("nilpotent representations are supported for the Jordan quiver only");
  }
  return std::make_shared<LinearInstance>(ProtoExactInstance::Kind::RepFq, quiver, field_for(q));
}

InstancePtr instance_rep_f1(const Quiver& quiver) {
  quiver.validate();
  if (!quiver.acyclic()) throw InputError("representations over F_1 require an acyclic quiver");
  return std::make_shared<F1Instance>(ProtoExactInstance::Kind::RepF1, quiver);
}

InstancePtr instance_nil_jordan_fq(int q) {
  return std::make_shared<LinearInstance>(ProtoExactInstance::Kind::NilJordanFq, Quiver::jordan(), field_for(q));
}

InstancePtr make_instance(const std::string& name, int q, const std::optional<Quiver>& quiver) {
  if (name == "vect_fq") return instance_vect_fq(q);
  if (name == "vect_f1") return instance_vect_f1();
  if (name == "nil_jordan_fq") return instance_nil_jordan_fq(q);
  if (name == "rep_fq" || name == "rep_f1") {
    Quiver qv = quiver ? *quiver : Quiver::a2();
    return name == "rep_fq" ? instance_rep_fq(qv, q) : instance_rep_f1(qv);
  }
  throw InputError("unknown instance '" + name + "'");
}

namespace {
[[noreturn]] void not_linear(const std::string& what) { throw InputError(what + " needs a linear instance"); }
}  // namespace

Field ProtoExactInstance::field() const { not_linear("field"); }
std::vector<Matrix> ProtoExactInstance::arrow_maps(const Rep&) const { not_linear("arrow_maps"); }
std::vector<Matrix> ProtoExactInstance::sub_bases(const Rep&, const Sub&) const { not_linear("sub_bases"); }
std::pair<std::vector<Matrix>, std::vector<Matrix>> ProtoExactInstance::chart_maps(const Rep&, const Sub&, const Sub&) const {
  not_linear("chart_maps");
}
std::vector<Matrix> ProtoExactInstance::element_matrices(Idx, const SizeKey&) const { not_linear("element_matrices"); }
Idx ProtoExactInstance::element_index(const std::vector<Matrix>&, const SizeKey&) const { not_linear("element_index"); }
Sub ProtoExactInstance::sub_from_rows(const Rep&, const std::vector<Matrix>&) const { not_linear("sub_from_rows"); }

}  // namespace hall
