#include "hall/hall.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>

#include "hall/budget.hpp"

namespace hall {

HallElement HallElement::basis(const std::string& key, Rational c) {
  HallElement e;
  if (c != 0) e.coeffs[key] = c;
  return e;
}

void HallElement::prune() {
  for (auto it = coeffs.begin(); it != coeffs.end();) {
    it->second.canonicalize();
    if (it->second == 0)
      it = coeffs.erase(it);
    else
      ++it;
  }
}

Rational HallElement::at(const std::string& key) const {
  auto it = coeffs.find(key);
  return it == coeffs.end() ? Rational(0) : it->second;
}

HallElement& HallElement::operator+=(const HallElement& o) {
  for (const auto& [k, v] : o.coeffs) coeffs[k] += v;
  prune();
  return *this;
}

HallElement HallElement::operator+(const HallElement& o) const {
  HallElement r = *this;
  r += o;
  return r;
}

HallElement HallElement::scaled(const Rational& c) const {
  HallElement r;
  if (c == 0) return r;
  for (const auto& [k, v] : coeffs) r.coeffs[k] = v * c;
  r.prune();
  return r;
}

bool HallElement::operator==(const HallElement& o) const {
  HallElement a = *this, b = o;
  a.prune();
  b.prune();
  return a.coeffs == b.coeffs;
}

nlohmann::ordered_json HallElement::to_json(const ProtoExactInstance& inst) const {
  std::vector<std::string> keys;
  for (const auto& [k, v] : coeffs)
    if (v != 0) keys.push_back(k);
  std::sort(keys.begin(), keys.end(), [&](const auto& a, const auto& b) { return inst.key_less(a, b); });
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& k : keys) j[k] = to_string(coeffs.at(k));
  return j;
}

HallAlgebra::HallAlgebra(InstancePtr inst, SizeFilter sub, std::optional<SizeKey> cap)
    : inst_(std::move(inst)), sub_(std::move(sub)), cap_(std::move(cap)) {
  if (cap_ && static_cast<int>(cap_->size()) != inst_->num_vertices()) throw InputError("cap has the wrong number of entries");
}

std::vector<std::string> HallAlgebra::basis(const SizeKey& d) const {
  if (!in_subcategory(d)) return {};
  auto keys = inst_->keys_of_size(d);
  std::sort(keys.begin(), keys.end(), [&](const auto& a, const auto& b) { return inst_->key_less(a, b); });
  return keys;
}

std::vector<std::string> HallAlgebra::basis_below(const SizeKey& cap) const {
  std::vector<std::string> out;
  for (const auto& d : sizes_below(cap))
    for (auto& k : basis(d)) out.push_back(std::move(k));
  return out;
}

void HallAlgebra::check_cap(const SizeKey& d) const {
  if (cap_ && !size_leq(d, *cap_))
    throw ResourceError("size " + size_string(d) + " exceeds the enumeration cap " + size_string(*cap_));
}

std::uint64_t HallAlgebra::structure_constant_count(const std::string& u, const std::string& w, const std::string& v) const {
  SizeKey du = inst_->size_of(u), dw = inst_->size_of(w), dv = inst_->size_of(v);
  if (size_add(du, dw) != dv) return 0;
  check_cap(dv);
  auto counts = inst_->site_counts(v);
  auto it = counts.find({u, w});
  return it == counts.end() ? 0 : it->second;
}

BigInt HallAlgebra::structure_constant_autext(const std::string& u, const std::string& w, const std::string& v) const {
  if (!inst_->exact()) throw InputError("the Aut/Ext/Hom formula needs an exact instance; " + inst_->name() + " is not");
  SizeKey du = inst_->size_of(u), dw = inst_->size_of(w), dv = inst_->size_of(v);
  if (size_add(du, dw) != dv) return 0;
  check_cap(dv);
  Rep ru = inst_->object(u), rw = inst_->object(w), rv = inst_->object(v);
  long ext = 0;
  for (const auto& c : inst_->ext1_classes(rw, ru))
    if (c.middle == v) ++ext;
  Rational val(inst_->aut_order(rv) * ext, inst_->aut_order(ru) * inst_->aut_order(rw) * inst_->hom_count(rw, ru));
  val.canonicalize();
  if (val.get_den() != 1)
    throw std::logic_error("Aut/Ext/Hom formula is not integral for (" + u + ", " + w + ", " + v + "): " + to_string(val));
  return val.get_num();
}

HallElement HallAlgebra::unit() const { return HallElement::basis(inst_->keys_of_size(inst_->zero_size()).at(0)); }

HallElement HallAlgebra::multiply(const HallElement& a, const HallElement& b) const {
  // Prefetch site counts of every target class; site_counts memoizes per class.
  std::set<SizeKey> sizes;
  for (const auto& [u, x] : a.coeffs)
    for (const auto& [w, y] : b.coeffs) {
      SizeKey d = size_add(inst_->size_of(u), inst_->size_of(w));
      check_cap(d);
      sizes.insert(d);
    }
  std::map<SizeKey, std::vector<std::string>> targets;
  std::vector<std::string> all;
  for (const auto& d : sizes) {
    targets[d] = basis(d);
    all.insert(all.end(), targets[d].begin(), targets[d].end());
  }
  std::vector<SiteCounts> counts(all.size());
  parallel_for(all.size(), [&](std::size_t i) { counts[i] = inst_->site_counts(all[i]); });
  std::map<std::string, const SiteCounts*> by_key;
  for (std::size_t i = 0; i < all.size(); ++i) by_key[all[i]] = &counts[i];

  HallElement out;
  for (const auto& [u, x] : a.coeffs)
    for (const auto& [w, y] : b.coeffs) {
      SizeKey d = size_add(inst_->size_of(u), inst_->size_of(w));
      for (const auto& v : targets[d]) {
        const auto& c = *by_key[v];
        auto it = c.find({u, w});
        if (it == c.end()) continue;
        out.coeffs[v] += x * y * Rational(static_cast<unsigned long>(it->second));
      }
    }
  out.prune();
  return out;
}

HallElement HallAlgebra::product(const std::vector<HallElement>& factors) const {
  HallElement acc = unit();
  for (const auto& f : factors) acc = multiply(acc, f);
  return acc;
}

SConstructionPtr HallAlgebra::construction_for(const SizeKey& d) const {
  {
    std::lock_guard lock(mu_);
    if (auto it = constructions_.find(d); it != constructions_.end()) return it->second;
  }
  auto s = s_construction(inst_, d, 2, sub_);
  std::lock_guard lock(mu_);
  return constructions_.emplace(d, s).first->second;
}

Tensor2 HallAlgebra::comultiply(const std::string& v) const {
  {
    std::lock_guard lock(mu_);
    if (auto it = coproducts_.find(v); it != coproducts_.end()) return it->second;
  }
  SizeKey d = inst_->size_of(v);
  check_cap(d);
  if (!in_subcategory(d)) throw InputError("object " + v + " is not in the subcategory");
  auto s = construction_for(d);
  const auto& x = *s->simplicial();
  auto x1 = x.level(1);
  const auto& b1 = s->blocks(1);
  auto prod = hall::product(x1, x1, [&](int i, int j) {
    return size_leq(size_add(b1[static_cast<std::size_t>(i)].profile[0], b1[static_cast<std::size_t>(j)].profile[0]), d);
  });
  GroupoidFunctor split = pairing(*x.face(2, 2), *x.face(2, 0), prod);
  LinFunction phi = LinFunction::delta(x1, s->component_of_key(v));
  LinFunction out = lin_pushforward(split, lin_pullback(*x.face(2, 1), phi));
  Tensor2 t;
  for (const auto& [c, val] : out.values) {
    Obj r = prod.groupoid->representative(c);
    std::string u = s->key_of_component(x1->component_of(prod.proj_left.obj(r)));
    std::string w = s->key_of_component(x1->component_of(prod.proj_right.obj(r)));
    t[{u, w}] += val;
  }
  std::lock_guard lock(mu_);
  coproducts_.emplace(v, t);
  return t;
}

Tensor3 HallAlgebra::comultiply_left(const std::string& v) const {
  Tensor3 out;
  for (const auto& [uw, c] : comultiply(v))
    for (const auto& [ab, c2] : comultiply(uw.first)) out[{ab.first, ab.second, uw.second}] += c * c2;
  return out;
}

Tensor3 HallAlgebra::comultiply_right(const std::string& v) const {
  Tensor3 out;
  for (const auto& [uw, c] : comultiply(v))
    for (const auto& [ab, c2] : comultiply(uw.second)) out[{uw.first, ab.first, ab.second}] += c * c2;
  return out;
}

nlohmann::ordered_json HallPolynomial::to_json() const {
  nlohmann::ordered_json j;
  j["coefficients"] = nlohmann::ordered_json::array();
  for (const auto& c : coeffs) j["coefficients"].push_back(c.get_str());
  j["primes"] = primes;
  auto s = nlohmann::ordered_json::array();
  for (const auto& v : samples) s.push_back(v.get_str());
  j["samples"] = s;
  j["holdout"] = holdout;
  j["holdout_value"] = holdout_value.get_str();
  j["polynomial"] = polynomial;
  j["message"] = message;
  return j;
}

HallPolynomial hall_polynomial(const std::function<InstancePtr(int)>& family, const std::string& u,
                               const std::string& w, const std::string& v, const std::vector<int>& primes, int holdout) {
  if (primes.empty()) throw InputError("need at least one interpolation prime");
  if (std::find(primes.begin(), primes.end(), holdout) != primes.end())
    throw InputError("holdout prime must differ from the interpolation primes");
  HallPolynomial hp;
  hp.primes = primes;
  hp.holdout = holdout;
  auto value = [&](int q) {
    HallAlgebra alg(family(q));
    return BigInt(static_cast<unsigned long>(alg.structure_constant_count(u, w, v)));
  };
  std::vector<int> qs = primes;
  qs.push_back(holdout);
  std::vector<BigInt> vals(qs.size());
  parallel_for(qs.size(), [&](std::size_t i) { vals[i] = value(qs[i]); });
  hp.samples.assign(vals.begin(), vals.end() - 1);
  hp.holdout_value = vals.back();

  // Lagrange interpolation with rational coefficients.
  std::size_t n = primes.size();
  std::vector<Rational> poly(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<Rational> basis{1};
    Rational denom = 1;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      std::vector<Rational> next(basis.size() + 1, 0);
      for (std::size_t k = 0; k < basis.size(); ++k) {
        next[k + 1] += basis[k];
        next[k] -= basis[k] * primes[j];
      }
      basis = std::move(next);
      denom *= primes[i] - primes[j];
    }
    for (std::size_t k = 0; k < basis.size(); ++k) poly[k] += Rational(hp.samples[i]) * basis[k] / denom;
  }
  bool integral = true;
  for (auto& c : poly) {
    c.canonicalize();
    if (c.get_den() != 1) integral = false;
  }
  while (poly.size() > 1 && poly.back() == 0) poly.pop_back();
  Rational at = 0;
  for (std::size_t k = poly.size(); k-- > 0;) at = at * holdout + poly[k];
  if (!integral) {
    hp.message = "not polynomial at this degree bound: interpolant has non-integer coefficients";
  } else if (at != Rational(hp.holdout_value)) {
    hp.message = "not polynomial at this degree bound: interpolant gives " + to_string(at) + " at q=" +
                 std::to_string(holdout) + ", brute force gives " + hp.holdout_value.get_str();
  } else {
    hp.polynomial = true;
    hp.message = "verified at q=" + std::to_string(holdout);
  }
  if (integral)
    for (const auto& c : poly) hp.coeffs.push_back(c.get_num());
  return hp;
}

namespace {

SizeKey homogeneous_size(const ProtoExactInstance& inst, const HallElement& g) {
  if (g.coeffs.empty()) throw InputError("generator is zero");
  std::optional<SizeKey> d;
  for (const auto& [k, c] : g.coeffs) {
    SizeKey e = inst.size_of(k);
    if (d && *d != e) throw InputError("generator is not homogeneous");
    d = e;
  }
  if (*d == inst.zero_size()) throw InputError("generator of size zero");
  return *d;
}

// Rows over the union of supports, in a fixed key order.
QMatrix to_rows(const std::vector<HallElement>& elems, std::vector<std::string>& keys) {
  std::set<std::string> ks;
  for (const auto& e : elems)
    for (const auto& [k, c] : e.coeffs) ks.insert(k);
  keys.assign(ks.begin(), ks.end());
  QMatrix rows;
  for (const auto& e : elems) {
    QVector r(keys.size());
    for (std::size_t i = 0; i < keys.size(); ++i) r[i] = e.at(keys[i]);
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace

int subalgebra_component_dim(const HallAlgebra& alg, const std::vector<HallElement>& generators, const SizeKey& d) {
  const auto& inst = *alg.instance();
  std::vector<SizeKey> gsize;
  for (const auto& g : generators) gsize.push_back(homogeneous_size(inst, g));
  // span(words of size s) = sum over g of g * span(words of size s - |g|); keep a reduced basis per size.
  std::map<SizeKey, std::vector<HallElement>> span;
  span[inst.zero_size()] = {alg.unit()};
  for (const auto& s : sizes_below(d)) {
    if (s == inst.zero_size()) continue;
    std::vector<HallElement> elems;
    for (std::size_t i = 0; i < generators.size(); ++i) {
      if (!size_leq(gsize[i], s)) continue;
      auto it = span.find(size_sub(s, gsize[i]));
      if (it == span.end()) continue;
      for (const auto& b : it->second) {
        auto p = alg.multiply(generators[i], b);
        if (!p.coeffs.empty()) elems.push_back(std::move(p));
      }
    }
    if (elems.empty()) continue;
    std::vector<std::string> keys;
    QMatrix rows = to_rows(elems, keys);
    q_row_reduce(rows);
    std::vector<HallElement> reduced;
    for (const auto& r : rows) {
      HallElement e;
      for (std::size_t i = 0; i < keys.size(); ++i)
        if (r[i] != 0) e.coeffs[keys[i]] = r[i];
      reduced.push_back(std::move(e));
    }
    span[s] = std::move(reduced);
  }
  auto it = span.find(d);
  return it == span.end() ? 0 : static_cast<int>(it->second.size());
}

nlohmann::ordered_json WordRelations::to_json(const ProtoExactInstance& inst) const {
  nlohmann::ordered_json j;
  j["words"] = words;
  auto vals = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < words.size(); ++i) vals.push_back({{"word", words[i]}, {"value", values[i].to_json(inst)}});
  j["values"] = vals;
  auto rels = nlohmann::ordered_json::array();
  for (const auto& r : relations) {
    auto row = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < words.size(); ++i)
      if (r[i] != 0) row[words[i]] = to_string(r[i]);
    rels.push_back(row);
  }
  j["relations"] = rels;
  return j;
}

WordRelations word_relations(const HallAlgebra& alg, const std::vector<std::pair<std::string, HallElement>>& generators,
                             const SizeKey& d) {
  const auto& inst = *alg.instance();
  std::vector<SizeKey> gsize;
  for (const auto& g : generators) gsize.push_back(homogeneous_size(inst, g.second));
  WordRelations out;
  std::vector<std::size_t> word;
  std::function<void(const SizeKey&, const HallElement&)> rec = [&](const SizeKey& left, const HallElement& acc) {
    if (left == inst.zero_size()) {
      std::string name;
      for (auto i : word) name += (name.empty() ? "" : " ") + generators[i].first;
      out.words.push_back(name);
      out.values.push_back(acc);
      return;
    }
    for (std::size_t i = 0; i < generators.size(); ++i) {
      if (!size_leq(gsize[i], left)) continue;
      word.push_back(i);
      rec(size_sub(left, gsize[i]), alg.multiply(acc, generators[i].second));
      word.pop_back();
    }
  };
  rec(d, alg.unit());
  std::vector<std::string> keys;
  QMatrix rows = to_rows(out.values, keys);
  if (keys.empty())
    for (auto& r : rows) r.assign(1, 0);
  out.relations = q_row_relations(rows);
  return out;
}

nlohmann::ordered_json InducedMap::to_json() const {
  nlohmann::ordered_json j;
  j["culf"] = culf.to_json();
  j["ikeo"] = ikeo.to_json();
  j["algebra_hom"] = {{"holds", algebra_hom}, {"certified", ikeo.pass}, {"witness", algebra_witness}};
  j["coalgebra_hom"] = {{"holds", coalgebra_hom}, {"certified", culf.pass}, {"witness", coalgebra_witness}};
  j["warning"] = warning();
  return j;
}

namespace {

std::string tensor_string(const Tensor2& t) {
  std::string s;
  for (const auto& [k, v] : t) s += (s.empty() ? "" : " + ") + to_string(v) + " [" + k.first + " | " + k.second + "]";
  return s.empty() ? "0" : s;
}

std::string element_string(const HallElement& e) {
  std::string s;
  for (const auto& [k, v] : e.coeffs) s += (s.empty() ? "" : " + ") + to_string(v) + " [" + k + "]";
  return s.empty() ? "0" : s;
}

}  // namespace

InducedMap induced_algebra_map(const InstancePtr& inst, const SizeFilter& sub, const SizeKey& cap, int n_max) {
  auto full = s_construction(inst, cap, n_max);
  auto small = s_construction(inst, cap, n_max, sub);
  auto f = inclusion_map(small, full);
  InducedMap m;
  m.culf = check_culf(f, n_max);
  m.ikeo = check_ikeo(f, n_max);

  HallAlgebra amb(inst, {}, cap), part(inst, sub, cap);
  auto keys = part.basis_below(cap);
  m.algebra_hom = true;
  for (const auto& u : keys) {
    for (const auto& w : keys) {
      SizeKey d = size_add(inst->size_of(u), inst->size_of(w));
      if (!size_leq(d, cap)) continue;
      auto lhs = amb.multiply(HallElement::basis(u), HallElement::basis(w));
      auto rhs = part.multiply(HallElement::basis(u), HallElement::basis(w));
      if (!(lhs == rhs)) {
        m.algebra_hom = false;
        m.algebra_witness = "[" + u + "] * [" + w + "]: ambient " + element_string(lhs) + ", subcategory " + element_string(rhs);
        break;
      }
    }
    if (!m.algebra_hom) break;
  }
  m.coalgebra_hom = true;
  for (const auto& v : keys) {
    auto lhs = amb.comultiply(v), rhs = part.comultiply(v);
    if (lhs != rhs) {
      m.coalgebra_hom = false;
      m.coalgebra_witness = "Delta[" + v + "]: ambient " + tensor_string(lhs) + ", subcategory " + tensor_string(rhs);
      break;
    }
  }
  return m;
}

nlohmann::ordered_json MultTable::to_json(const ProtoExactInstance& inst) const {
  nlohmann::ordered_json j;
  j["instance"] = inst.name();
  j["keys"] = keys;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& u : keys)
    for (const auto& w : keys) {
      auto it = cells.find({u, w});
      if (it == cells.end()) continue;
      rows.push_back({{"left", u}, {"right", w}, {"product", it->second.to_json(inst)}});
    }
  j["table"] = rows;
  return j;
}

std::string MultTable::to_csv() const {
  auto quote = [](const std::string& s) {
    std::string o = "\"";
    for (char c : s) {
      if (c == '"') o += '"';
      o += c;
    }
    return o + "\"";
  };
  std::ostringstream os;
  os << "U\\W";
  for (const auto& w : keys) os << "," << quote(w);
  os << "\n";
  for (const auto& u : keys) {
    os << quote(u);
    for (const auto& w : keys) {
      os << ",";
      auto it = cells.find({u, w});
      if (it == cells.end()) continue;
      std::string cell;
      for (const auto& [v, c] : it->second.coeffs) cell += (cell.empty() ? "" : ";") + v + ":" + to_string(c);
      os << quote(cell);
    }
    os << "\n";
  }
  return os.str();
}

MultTable multiplication_table(const HallAlgebra& alg, const SizeKey& cap) {
  MultTable t;
  const auto& inst = *alg.instance();
  t.keys = alg.basis_below(cap);
  std::vector<std::pair<std::string, std::string>> pairs;
  for (const auto& u : t.keys)
    for (const auto& w : t.keys)
      if (size_leq(size_add(inst.size_of(u), inst.size_of(w)), cap)) pairs.emplace_back(u, w);
  std::vector<HallElement> vals(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t i) {
    vals[i] = alg.multiply(HallElement::basis(pairs[i].first), HallElement::basis(pairs[i].second));
  });
  for (std::size_t i = 0; i < pairs.size(); ++i) t.cells[pairs[i]] = std::move(vals[i]);
  return t;
}

}  // namespace hall
