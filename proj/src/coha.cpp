#include "hall/coha.hpp"

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "hall/budget.hpp"
#include "hall/qlinalg.hpp"

namespace hall::coha {

// ---- polynomials ----

Poly Poly::constant(int nvars, const Rational& c) {
  Poly p{nvars, {}};
  if (c != 0) p.terms[Exponents(static_cast<std::size_t>(nvars), 0)] = c;
  return p;
}

Poly Poly::variable(int nvars, int i, const Rational& c) {
  Poly p{nvars, {}};
  Exponents e(static_cast<std::size_t>(nvars), 0);
  e[static_cast<std::size_t>(i)] = 1;
  if (c != 0) p.terms[e] = c;
  return p;
}

void Poly::prune() {
  for (auto it = terms.begin(); it != terms.end();) it = it->second == 0 ? terms.erase(it) : std::next(it);
}

bool Poly::is_zero() const {
  return std::all_of(terms.begin(), terms.end(), [](const auto& t) { return t.second == 0; });
}

Poly Poly::operator+(const Poly& o) const {
  Poly r = *this;
  for (const auto& [e, c] : o.terms) r.terms[e] += c;
  r.prune();
  return r;
}

Poly Poly::operator*(const Poly& o) const {
  Poly r{nvars, {}};
  for (const auto& [a, x] : terms)
    for (const auto& [b, y] : o.terms) {
      Exponents e(a.size());
      for (std::size_t i = 0; i < a.size(); ++i) e[i] = a[i] + b[i];
      r.terms[e] += x * y;
    }
  r.prune();
  return r;
}

Poly Poly::scaled(const Rational& c) const {
  Poly r{nvars, {}};
  if (c == 0) return r;
  for (const auto& [e, x] : terms) r.terms[e] = x * c;
  return r;
}

int Poly::degree() const {
  int d = -1;
  for (const auto& [e, c] : terms)
    if (c != 0) {
      int s = 0;
      for (int x : e) s += x;
      d = std::max(d, s);
    }
  return d;
}

bool Poly::homogeneous() const {
  int d = -1;
  for (const auto& [e, c] : terms) {
    if (c == 0) continue;
    int s = 0;
    for (int x : e) s += x;
    if (d >= 0 && s != d) return false;
    d = s;
  }
  return true;
}

bool Poly::operator==(const Poly& o) const {
  Poly a = *this, b = o;
  a.prune();
  b.prune();
  return a.nvars == b.nvars && a.terms == b.terms;
}

Poly to_poly(const LinearForm& l) {
  Poly p{static_cast<int>(l.size()), {}};
  for (std::size_t i = 0; i < l.size(); ++i)
    if (l[i] != 0) p = p + Poly::variable(p.nvars, static_cast<int>(i), l[i]);
  return p;
}

Poly divide_exact(const Poly& p, const LinearForm& l) {
  auto v = static_cast<std::size_t>(std::find_if(l.begin(), l.end(), [](const Rational& c) { return c != 0; }) - l.begin());
  if (v == l.size()) throw std::logic_error("division by the zero linear form");
  Poly lin = to_poly(l);
  Poly rest = p, quot{p.nvars, {}};
  // Long division in x_v: cancel the term of highest x_v degree until none is left.
  while (true) {
    const Exponents* lead = nullptr;
    for (const auto& [e, c] : rest.terms)
      if (c != 0 && e[v] > 0 && (!lead || e[v] > (*lead)[v])) lead = &e;
    if (!lead) break;
    Exponents e = *lead;
    Rational c = rest.terms.at(e) / l[v];
    e[v] -= 1;
    Poly t{p.nvars, {{e, c}}};
    quot = quot + t;
    rest = rest + (t * lin).scaled(-1);
  }
  if (!rest.is_zero()) throw std::logic_error("linear form does not divide the polynomial");
  return quot;
}

Poly sum_to_polynomial(const std::vector<RationalTerm>& terms, int nvars) {
  // Normalize each factor to a leading coefficient of 1 and take the least common multiple.
  auto normalize = [](LinearForm l, Rational& scale) {
    auto it = std::find_if(l.begin(), l.end(), [](const Rational& c) { return c != 0; });
    if (it == l.end()) throw std::logic_error("zero denominator factor");
    Rational lead = *it;
    for (auto& c : l) c /= lead;
    scale *= lead;
    return l;
  };
  struct Norm {
    Poly num;
    std::map<LinearForm, int> den;
  };
  std::vector<Norm> ts;
  std::map<LinearForm, int> lcm;
  for (const auto& t : terms) {
    Rational scale = 1;
    Norm n{t.num, {}};
    for (const auto& l : t.den) ++n.den[normalize(l, scale)];
    n.num = n.num.scaled(1 / scale);
    for (const auto& [l, k] : n.den) lcm[l] = std::max(lcm[l], k);
    ts.push_back(std::move(n));
  }
  Poly total{nvars, {}};
  for (const auto& t : ts) {
    Poly x = t.num;
    for (const auto& [l, k] : lcm) {
      auto it = t.den.find(l);
      int missing = k - (it == t.den.end() ? 0 : it->second);
      for (int i = 0; i < missing; ++i) x = x * to_poly(l);
    }
    total = total + x;
  }
  for (const auto& [l, k] : lcm)
    for (int i = 0; i < k; ++i) {
      try {
        total = divide_exact(total, l);
      } catch (const std::logic_error&) {
        throw std::logic_error("shuffle sum of rational functions is not a polynomial");
      }
    }
  return total;
}

std::vector<Exponents> partitions(int n, int k) {
  std::vector<Exponents> out;
  if (k == 0) {
    if (n == 0) out.emplace_back();
    return out;
  }
  Exponents cur;
  std::function<void(int, int)> rec = [&](int left, int max_part) {
    if (static_cast<int>(cur.size()) == k) {
      if (left == 0) out.push_back(cur);
      return;
    }
    for (int p = std::min(left, max_part); p >= 0; --p) {
      cur.push_back(p);
      rec(left - p, p);
      cur.pop_back();
    }
  };
  rec(n, n);
  return out;
}

namespace {

// Distinct rearrangements of a non-increasing vector.
std::vector<Exponents> rearrangements(Exponents e) {
  std::sort(e.begin(), e.end());
  std::vector<Exponents> out;
  do out.push_back(e);
  while (std::next_permutation(e.begin(), e.end()));
  return out;
}

Exponents sorted_desc(Exponents e) {
  std::sort(e.rbegin(), e.rend());
  return e;
}

void prune_map(std::map<Exponents, Rational>& m) {
  for (auto it = m.begin(); it != m.end();) it = it->second == 0 ? m.erase(it) : std::next(it);
}

std::string key_string(const Exponents& e) {
  std::string s = "m(";
  bool first = true;
  for (int x : e)
    if (x) {
      s += (first ? "" : ",") + std::to_string(x);
      first = false;
    }
  return s + ")";
}

Exponents parse_key(const std::string& key, int weight) {
  if (key.size() < 3 || key.compare(0, 2, "m(") != 0 || key.back() != ')') throw InputError("bad monomial key " + key);
  Exponents e;
  std::stringstream ss(key.substr(2, key.size() - 3));
  std::string part;
  while (std::getline(ss, part, ',')) {
    if (part.empty()) continue;
    try {
      e.push_back(std::stoi(part));
    } catch (const std::exception&) {
      throw InputError("bad monomial key " + key);
    }
  }
  if (static_cast<int>(e.size()) > weight) throw InputError("monomial " + key + " has more parts than the weight");
  for (int x : e)
    if (x < 0) throw InputError("negative exponent in " + key);
  e.resize(static_cast<std::size_t>(weight), 0);
  return sorted_desc(e);
}

Rational parse_coeff(const nlohmann::json& j) {
  if (j.is_number_integer()) return Rational(j.get<long>());
  if (!j.is_string()) throw InputError("coefficients are integers or \"p/q\" strings");
  Rational r;
  if (r.set_str(j.get<std::string>(), 10) != 0) throw InputError("bad coefficient " + j.dump());
  r.canonicalize();
  return r;
}

// Shared by both parse functions: returns weight and coefficients keyed by the partition.
std::pair<int, std::map<Exponents, Rational>> parse_any(const std::string& text) {
  std::map<Exponents, Rational> coeffs;
  auto trimmed = text;
  trimmed.erase(0, trimmed.find_first_not_of(" \t\n"));
  if (!trimmed.empty() && trimmed[0] == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(trimmed);
    } catch (const nlohmann::json::exception& e) {
      throw InputError(std::string("bad polynomial JSON: ") + e.what());
    }
    if (!j.contains("weight") || !j["weight"].is_number_integer()) throw InputError("polynomial JSON needs an integer \"weight\"");
    int w = j["weight"].get<int>();
    if (w < 0) throw InputError("weight must be nonnegative");
    if (j.contains("terms"))
      for (const auto& [k, v] : j["terms"].items()) coeffs[parse_key(k, w)] += parse_coeff(v);
    prune_map(coeffs);
    return {w, coeffs};
  }
  auto colon = trimmed.find(':');
  int w;
  try {
    std::size_t used = 0;
    w = std::stoi(trimmed.substr(0, colon), &used);
    if (used != trimmed.substr(0, colon).size()) throw InputError("");
  } catch (const std::exception&) {
    throw InputError("expected a weight, \"weight:parts\" or polynomial JSON, got " + text);
  }
  if (w < 0) throw InputError("weight must be nonnegative");
  Exponents e = colon == std::string::npos ? Exponents{} : parse_key("m(" + trimmed.substr(colon + 1) + ")", w);
  e.resize(static_cast<std::size_t>(w), 0);
  coeffs[e] = 1;
  return {w, coeffs};
}

}  // namespace

// ---- symmetric polynomials ----

SymPoly SymPoly::monomial(int weight, Exponents lambda, const Rational& c) {
  if (static_cast<int>(lambda.size()) != weight) throw InputError("partition length must equal the weight");
  SymPoly s{weight, {}};
  if (c != 0) s.coeffs[sorted_desc(std::move(lambda))] = c;
  return s;
}

SymPoly SymPoly::from_poly(const Poly& p) {
  SymPoly s{p.nvars, {}};
  for (const auto& [e, c] : p.terms) {
    if (c == 0) continue;
    Exponents key = sorted_desc(e);
    auto it = p.terms.find(key);
    if (it == p.terms.end() || it->second != c) throw std::logic_error("polynomial is not symmetric");
    if (e == key) s.coeffs[key] = c;
  }
  Poly q = p;
  q.prune();
  if (!(s.expand() == q)) throw std::logic_error("polynomial is not symmetric");
  return s;
}

Poly SymPoly::expand() const {
  Poly p{weight, {}};
  for (const auto& [lam, c] : coeffs)
    for (auto& e : rearrangements(lam)) p.terms[e] += c;
  p.prune();
  return p;
}

void SymPoly::prune() { prune_map(coeffs); }

bool SymPoly::is_zero() const {
  return std::all_of(coeffs.begin(), coeffs.end(), [](const auto& t) { return t.second == 0; });
}

SymPoly SymPoly::operator+(const SymPoly& o) const {
  if (weight != o.weight) throw InputError("adding symmetric polynomials of different weights");
  SymPoly r = *this;
  for (const auto& [e, c] : o.coeffs) r.coeffs[e] += c;
  r.prune();
  return r;
}

SymPoly SymPoly::scaled(const Rational& c) const {
  SymPoly r{weight, {}};
  for (const auto& [e, x] : coeffs) r.coeffs[e] = x * c;
  r.prune();
  return r;
}

bool SymPoly::operator==(const SymPoly& o) const {
  SymPoly a = *this, b = o;
  a.prune();
  b.prune();
  return a.weight == b.weight && a.coeffs == b.coeffs;
}

int SymPoly::degree() const {
  int d = expand().degree();
  return d < 0 ? -1 : 2 * d;
}

nlohmann::ordered_json SymPoly::to_json() const {
  nlohmann::ordered_json j;
  j["weight"] = weight;
  j["terms"] = nlohmann::ordered_json::object();
  for (const auto& [e, c] : coeffs)
    if (c != 0) j["terms"][key_string(e)] = to_string(c);
  return j;
}

SymPoly SymPoly::parse(const std::string& text) {
  auto [w, coeffs] = parse_any(text);
  return SymPoly{w, coeffs};
}

SignedSymPoly SignedSymPoly::monomial(int weight, Exponents mu, const Rational& c) {
  if (static_cast<int>(mu.size()) != weight) throw InputError("partition length must equal the weight");
  SignedSymPoly s{weight, {}};
  if (c != 0) s.coeffs[sorted_desc(std::move(mu))] = c;
  return s;
}

SignedSymPoly SignedSymPoly::from_poly(const Poly& p) {
  SignedSymPoly s{p.nvars, {}};
  for (const auto& [e, c] : p.terms) {
    if (c == 0) continue;
    for (int x : e)
      if (x % 2) throw std::logic_error("polynomial is not invariant under sign changes");
    Exponents key = sorted_desc(e);
    auto it = p.terms.find(key);
    if (it == p.terms.end() || it->second != c) throw std::logic_error("polynomial is not symmetric");
    if (e == key) {
      Exponents half = key;
      for (auto& x : half) x /= 2;
      s.coeffs[half] = c;
    }
  }
  Poly q = p;
  q.prune();
  if (!(s.expand() == q)) throw std::logic_error("polynomial is not symmetric");
  return s;
}

Poly SignedSymPoly::expand() const {
  Poly p{weight, {}};
  for (const auto& [mu, c] : coeffs)
    for (auto e : rearrangements(mu)) {
      for (auto& x : e) x *= 2;
      p.terms[e] += c;
    }
  p.prune();
  return p;
}

void SignedSymPoly::prune() { prune_map(coeffs); }

bool SignedSymPoly::is_zero() const {
  return std::all_of(coeffs.begin(), coeffs.end(), [](const auto& t) { return t.second == 0; });
}

SignedSymPoly SignedSymPoly::operator+(const SignedSymPoly& o) const {
  if (weight != o.weight) throw InputError("adding module elements of different weights");
  SignedSymPoly r = *this;
  for (const auto& [e, c] : o.coeffs) r.coeffs[e] += c;
  r.prune();
  return r;
}

SignedSymPoly SignedSymPoly::scaled(const Rational& c) const {
  SignedSymPoly r{weight, {}};
  for (const auto& [e, x] : coeffs) r.coeffs[e] = x * c;
  r.prune();
  return r;
}

bool SignedSymPoly::operator==(const SignedSymPoly& o) const {
  SignedSymPoly a = *this, b = o;
  a.prune();
  b.prune();
  return a.weight == b.weight && a.coeffs == b.coeffs;
}

int SignedSymPoly::degree() const {
  int d = expand().degree();
  return d < 0 ? -1 : 2 * d;
}

nlohmann::ordered_json SignedSymPoly::to_json() const {
  nlohmann::ordered_json j;
  j["weight"] = weight;
  j["terms"] = nlohmann::ordered_json::object();
  for (const auto& [e, c] : coeffs) {
    if (c == 0) continue;
    Exponents z = e;
    for (auto& x : z) x *= 2;
    j["terms"][key_string(z)] = to_string(c);
  }
  return j;
}

SignedSymPoly SignedSymPoly::parse(const std::string& text) {
  auto [w, coeffs] = parse_any(text);
  SignedSymPoly s{w, {}};
  for (const auto& [key, c] : coeffs) {
    Exponents e = key;
    for (auto& x : e) {
      if (x % 2) throw InputError("module elements use even exponents of z");
      x /= 2;
    }
    s.coeffs[e] += c;
  }
  s.prune();
  return s;
}

// ---- products ----

namespace {

// Subsets of {0..n-1} of size k, increasing.
std::vector<std::vector<int>> subsets(int n, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  std::function<void(int)> rec = [&](int start) {
    if (static_cast<int>(cur.size()) == k) {
      out.push_back(cur);
      return;
    }
    for (int i = start; i < n; ++i) {
      cur.push_back(i);
      rec(i + 1);
      cur.pop_back();
    }
  };
  rec(0);
  return out;
}

std::vector<int> complement(const std::vector<int>& s, int n) {
  std::vector<int> out;
  for (int i = 0; i < n; ++i)
    if (!std::binary_search(s.begin(), s.end(), i)) out.push_back(i);
  return out;
}

// p(y_0..y_{k-1}) with y_i = signs[i] * w_{slots[i]}, as a polynomial in n variables.
Poly substitute(const Poly& p, const std::vector<int>& slots, const std::vector<int>& signs, int n) {
  Poly r{n, {}};
  for (const auto& [e, c] : p.terms) {
    Exponents f(static_cast<std::size_t>(n), 0);
    Rational s = c;
    for (std::size_t i = 0; i < e.size(); ++i) {
      f[static_cast<std::size_t>(slots[i])] += e[i];
      if (signs[i] < 0 && e[i] % 2) s = -s;
    }
    r.terms[f] += s;
  }
  r.prune();
  return r;
}

LinearForm form(int n, std::initializer_list<std::pair<int, int>> parts) {
  LinearForm l(static_cast<std::size_t>(n), 0);
  for (auto [i, c] : parts) l[static_cast<std::size_t>(i)] += c;
  return l;
}

// num * prod(factors)^power, with negative powers moved to the denominator.
RationalTerm with_kernel(Poly num, const std::vector<LinearForm>& factors, int power) {
  RationalTerm t{std::move(num), {}};
  for (const auto& l : factors) {
    if (power >= 0) {
      Poly lp = to_poly(l);
      for (int i = 0; i < power; ++i) t.num = t.num * lp;
    } else {
      for (int i = 0; i < -power; ++i) t.den.push_back(l);
    }
  }
  return t;
}

}  // namespace

SymPoly shuffle_product(const SymPoly& f, const SymPoly& g, int m) {
  if (m < 0) throw InputError("loop count must be nonnegative");
  int a = f.weight, b = g.weight, n = a + b;
  Poly fe = f.expand(), ge = g.expand();
  std::vector<RationalTerm> terms;
  auto subs = subsets(n, a);
  Budget::charge(subs.size(), "shuffles");
  for (const auto& s : subs) {
    auto t = complement(s, n);
    Poly num = substitute(fe, s, std::vector<int>(s.size(), 1), n) * substitute(ge, t, std::vector<int>(t.size(), 1), n);
    std::vector<LinearForm> kernel;
    for (int k : s)
      for (int l : t) kernel.push_back(form(n, {{l, 1}, {k, -1}}));
    terms.push_back(with_kernel(std::move(num), kernel, m - 1));
  }
  return SymPoly::from_poly(sum_to_polynomial(terms, n));
}

SignedSymPoly module_action(const SymPoly& f, const SignedSymPoly& g, int m) {
  if (m < 0) throw InputError("loop count must be nonnegative");
  int d = f.weight, e = g.weight, n = d + e;
  Poly fe = f.expand(), ge = g.expand();
  std::vector<RationalTerm> terms;
  auto subs = subsets(n, d);
  Budget::charge(subs.size() << d, "signed shuffles");
  for (const auto& s : subs) {
    auto t = complement(s, n);
    for (int mask = 0; mask < (1 << d); ++mask) {
      std::vector<int> eps(static_cast<std::size_t>(d));
      for (int i = 0; i < d; ++i) eps[static_cast<std::size_t>(i)] = (mask >> i) & 1 ? -1 : 1;
      Poly num = substitute(fe, s, eps, n) * substitute(ge, t, std::vector<int>(t.size(), 1), n);
      // x_i = eps_i w_{s_i}, z_j = w_{t_j}
      std::vector<LinearForm> kernel;
      for (int i = 0; i < d; ++i) kernel.push_back(form(n, {{s[i], -eps[i]}}));
      for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) kernel.push_back(form(n, {{s[i], -eps[i]}, {s[j], -eps[j]}}));
      for (int i = 0; i < d; ++i)
        for (int z : t) {
          kernel.push_back(form(n, {{s[i], eps[i]}, {z, -1}}));
          kernel.push_back(form(n, {{s[i], eps[i]}, {z, 1}}));
        }
      terms.push_back(with_kernel(std::move(num), kernel, m - 1));
    }
  }
  Rational prefactor = 1;
  for (int i = 0; i < std::abs((m - 1) * d); ++i) prefactor *= 2;
  if (m < 1) prefactor = 1 / prefactor;
  return SignedSymPoly::from_poly(sum_to_polynomial(terms, n).scaled(prefactor));
}

int euler_shift(int m, int d) { return (1 - m) * d * d; }

int action_kernel_degree(int d, int e) { return d + d * (d - 1) / 2 + 2 * d * e; }

// ---- series ----

Series::Series(int w, int lo, int hi) : weight_cap(w), min_degree(lo), degree_cap(hi) {
  table.assign(static_cast<std::size_t>(w + 1), std::vector<BigInt>(static_cast<std::size_t>(std::max(0, hi - lo + 1)), 0));
}

BigInt Series::at(int weight, int degree) const {
  if (weight < 0 || weight > weight_cap || degree < min_degree || degree > degree_cap) return 0;
  return table[static_cast<std::size_t>(weight)][static_cast<std::size_t>(degree - min_degree)];
}

BigInt& Series::at(int weight, int degree) {
  if (weight < 0 || weight > weight_cap || degree < min_degree || degree > degree_cap)
    throw std::out_of_range("series index out of range");
  return table[static_cast<std::size_t>(weight)][static_cast<std::size_t>(degree - min_degree)];
}

nlohmann::ordered_json Series::to_json() const {
  nlohmann::ordered_json j;
  j["weight_cap"] = weight_cap;
  j["min_degree"] = min_degree;
  j["degree_cap"] = degree_cap;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : table) {
    nlohmann::ordered_json r = nlohmann::ordered_json::array();
    for (const auto& x : row) r.push_back(x.fits_slong_p() ? nlohmann::ordered_json(x.get_si()) : nlohmann::ordered_json(x.get_str()));
    rows.push_back(std::move(r));
  }
  j["table"] = std::move(rows);
  return j;
}

std::string Series::to_csv() const {
  std::string s = "weight";
  for (int k = min_degree; k <= degree_cap; ++k) s += "," + std::to_string(k);
  s += "\n";
  for (int w = 0; w <= weight_cap; ++w) {
    s += std::to_string(w);
    for (int k = min_degree; k <= degree_cap; ++k) s += "," + at(w, k).get_str();
    s += "\n";
  }
  return s;
}

namespace {

void check_caps(int weight_cap, int degree_cap) {
  if (weight_cap < 0 || degree_cap < 0) throw InputError("caps must be nonnegative");
}

long count_partitions(int n, int k) { return static_cast<long>(partitions(n, k).size()); }

}  // namespace

Series hilbert_series(int m, int weight_cap, int degree_cap, bool shift) {
  check_caps(weight_cap, degree_cap);
  if (m < 0) throw InputError("loop count must be nonnegative");
  int lo = 0;
  if (shift)
    for (int d = 0; d <= weight_cap; ++d) lo = std::min(lo, euler_shift(m, d));
  Series s(weight_cap, lo, degree_cap);
  for (int d = 0; d <= weight_cap; ++d) {
    int base = shift ? euler_shift(m, d) : 0;
    for (int k = 0; base + 2 * k <= degree_cap; ++k) s.at(d, base + 2 * k) = count_partitions(k, d);
  }
  return s;
}

Series module_series(int weight_cap, int degree_cap) {
  check_caps(weight_cap, degree_cap);
  Series s(weight_cap, 0, degree_cap);
  for (int e = 0; e <= weight_cap; ++e)
    for (int k = 0; 4 * k <= degree_cap; ++k) s.at(e, 4 * k) = count_partitions(k, e);
  return s;
}

Series dt_invariants(int m, int weight_cap, int degree_cap, int u_degree) {
  check_caps(weight_cap, degree_cap);
  if (m < 1) throw InputError("DT invariants need m >= 1");
  if (u_degree <= 0) throw InputError("the degree of u must be positive");
  // Weight w lives in degrees >= euler_shift(m, w), and so does every product landing in weight w.
  // A degree-k coefficient then involves factors of degree up to k - euler_shift(m, weight_cap).
  int lo = euler_shift(m, weight_cap), hi = degree_cap - lo;
  auto W = static_cast<std::size_t>(weight_cap), span = static_cast<std::size_t>(hi - lo + 1);
  using Table = std::vector<std::vector<Rational>>;  // [weight][degree - lo]
  auto zero = [&] { return Table(W + 1, std::vector<Rational>(span, 0)); };
  auto mul = [&](const Table& a, const Table& b) {
    Table c = zero();
    for (std::size_t w1 = 0; w1 <= W; ++w1)
      for (std::size_t i = 0; i < span; ++i) {
        if (a[w1][i] == 0) continue;
        for (std::size_t w2 = 0; w1 + w2 <= W; ++w2)
          for (std::size_t j = 0; j < span; ++j) {
            if (b[w2][j] == 0) continue;
            long k = static_cast<long>(i + j) + lo;  // (i + lo) + (j + lo) - lo
            if (k < 0 || k >= static_cast<long>(span)) continue;
            c[w1 + w2][static_cast<std::size_t>(k)] += a[w1][i] * b[w2][j];
          }
      }
    return c;
  };
  Series h = hilbert_series(m, weight_cap, hi, true);
  Table f = zero();  // H - 1
  for (std::size_t w = 1; w <= W; ++w)
    for (int k = lo; k <= hi; ++k) f[w][static_cast<std::size_t>(k - lo)] = Rational(h.at(static_cast<int>(w), k));
  // log(1 + f)
  Table log = zero(), power = f;
  for (std::size_t n = 1; n <= W; ++n) {
    Rational c = Rational(n % 2 ? 1 : -1, static_cast<unsigned long>(n));
    for (std::size_t w = 0; w <= W; ++w)
      for (std::size_t i = 0; i < span; ++i) log[w][i] += c * power[w][i];
    power = mul(power, f);
  }
  // Adams operation psi_r: y -> y^r, t -> (-1)^(r+1) t^r (odd degrees are exterior).
  // log H = sum_r psi_r(V) / r, inverted with the Moebius function.
  auto moebius = [](std::size_t r) {
    int mu = 1;
    for (std::size_t p = 2; p * p <= r; ++p)
      if (r % p == 0) {
        r /= p;
        if (r % p == 0) return 0;
        mu = -mu;
      }
    if (r > 1) mu = -mu;
    return mu;
  };
  Table v = zero();
  for (std::size_t r = 1; r <= W; ++r) {
    int mu = moebius(r);
    if (mu == 0) continue;
    for (std::size_t w = 1; w * r <= W; ++w)
      for (int k = lo; k <= hi; ++k) {
        const Rational& x = log[w][static_cast<std::size_t>(k - lo)];
        long kr = static_cast<long>(k) * static_cast<long>(r);
        if (x == 0 || kr < lo || kr > hi) continue;
        Rational c = x * mu / Rational(static_cast<unsigned long>(r));
        if (r % 2 == 0 && (k % 2 + 2) % 2 == 1) c = -c;
        v[w * r][static_cast<std::size_t>(kr - lo)] += c;
      }
  }
  Series out(weight_cap, lo, degree_cap);
  for (std::size_t w = 1; w <= W; ++w)
    for (int k = lo; k <= degree_cap; ++k) {
      Rational x = v[w][static_cast<std::size_t>(k - lo)];
      if (k - u_degree >= lo) x -= v[w][static_cast<std::size_t>(k - u_degree - lo)];
      x.canonicalize();
      if (x.get_den() != 1 || x < 0)
        throw std::logic_error("V^prim multiplicity " + to_string(x) + " at weight " + std::to_string(w) + ", degree " +
                               std::to_string(k) + " is not a nonnegative integer");
      out.at(static_cast<int>(w), k) = x.get_num();
    }
  return out;
}

Series wprim(int m, int weight_cap, int degree_cap) {
  check_caps(weight_cap, degree_cap);
  if (m < 0) throw InputError("loop count must be nonnegative");
  Series out = module_series(weight_cap, degree_cap);
  for (int e = 1; e <= weight_cap; ++e)
    for (int k = 0; k <= degree_cap; k += 4) {
      auto target = partitions(k / 4, e);
      if (target.empty()) continue;
      QMatrix rows;
      for (int d = 1; d <= e; ++d) {
        // deg f + deg g = k - 2 (m-1) K, with deg f even and deg g divisible by 4.
        int total = k - 2 * (m - 1) * action_kernel_degree(d, e - d);
        for (int kg = 0; kg <= total; kg += 4) {
          int kf = total - kg;
          if (kf % 2) continue;
          for (const auto& lam : partitions(kf / 2, d))
            for (const auto& mu : partitions(kg / 4, e - d)) {
              SignedSymPoly img = module_action(SymPoly::monomial(d, lam), SignedSymPoly::monomial(e - d, mu), m);
              QVector row;
              for (const auto& t : target) {
                auto it = img.coeffs.find(t);
                row.push_back(it == img.coeffs.end() ? Rational(0) : it->second);
              }
              for (const auto& [key, c] : img.coeffs)
                if (c != 0 && !std::binary_search(target.begin(), target.end(), key, std::greater<>()))
                  throw std::logic_error("action output left its degree");
              rows.push_back(std::move(row));
            }
        }
      }
      out.at(e, k) -= q_rank(rows);
    }
  return out;
}

}  // namespace hall::coha
