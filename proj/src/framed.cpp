#include <algorithm>

#include "hall/budget.hpp"
#include "hall/module.hpp"

namespace hall {

namespace {

using Plane = std::pair<Rational, Rational>;  // (re, im)

Rational cross(const Plane& a, const Plane& b) { return a.first * b.second - a.second * b.first; }

Rational parse_rational(const nlohmann::json& j) {
  if (j.is_number_integer()) return Rational(j.get<long>());
  if (j.is_string()) {
    Rational r;
    if (r.set_str(j.get<std::string>(), 10) != 0) throw InputError("bad rational " + j.dump());
    r.canonicalize();
    return r;
  }
  throw InputError("expected an integer or a \"p/q\" string, got " + j.dump());
}

// Only directions with rational slope are attained by sums of rational zeta's.
std::optional<Plane> direction(const Rational& phase) {
  if (phase == Rational(1, 4)) return Plane{1, 1};
  if (phase == Rational(1, 2)) return Plane{0, 1};
  if (phase == Rational(3, 4)) return Plane{-1, 1};
  if (phase == 1) return Plane{-1, 0};
  return std::nullopt;
}

Elem power(const Field& f, Elem x, Idx e) {
  Elem r = 1;
  for (Idx i = 0; i < e; ++i) r = f->mul(r, x);
  return r;
}

Plane charge(const Stability& st, const SizeKey& d) {
  Plane z{0, 0};
  for (std::size_t i = 0; i < d.size(); ++i) {
    z.first += st.zeta[i].first * d[i];
    z.second += st.zeta[i].second * d[i];
  }
  return z;
}

// Semistable of the chosen phase, or zero.
bool semistable_for(const ProtoExactInstance& inst, const Stability& st, const Rep& rep) {
  if (size_total(rep.dim) == 0) return true;
  auto dir = direction(st.phase);
  if (!dir) return false;
  Plane z = charge(st, rep.dim);
  if (cross(z, *dir) != 0 || z.first * dir->first + z.second * dir->second <= 0) return false;
  for (const auto& e : sizes_below(rep.dim)) {
    if (size_total(e) == 0 || e == rep.dim) continue;
    // phase(e) > phase(rep) iff cross(Z(rep), Z(e)) > 0
    if (cross(z, charge(st, e)) <= 0) continue;
    if (!inst.subobjects(rep, e).empty()) return false;
  }
  return true;
}

// Every proper subobject the section factors through (0 included) must have strictly smaller phase.
bool stable_framed_for(const ProtoExactInstance& inst, const Stability& st, const Rep& rep, const std::vector<Matrix>& section) {
  if (!semistable_for(inst, st, rep)) return false;
  if (size_total(rep.dim) == 0) return true;
  Plane z = charge(st, rep.dim);
  for (const auto& e : sizes_below(rep.dim)) {
    if (e == rep.dim) continue;
    if (size_total(e) > 0 && cross(charge(st, e), z) > 0) continue;
    for (const auto& u : inst.subobjects(rep, e)) {
      auto basis = inst.sub_bases(rep, u);
      bool through = true;
      for (std::size_t i = 0; i < basis.size() && through; ++i) {
        if (section[i].cols() == 0) continue;
        Matrix cols = section[i].transpose();
        through = rank(basis[i].rows() ? basis[i].vstack(cols) : cols) == basis[i].rows();
      }
      if (through) return false;
    }
  }
  return true;
}

}  // namespace

Stability Stability::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("zeta") || !j.contains("phase")) throw InputError("stability needs \"zeta\" and \"phase\"");
  Stability s;
  for (const auto& z : j.at("zeta")) {
    if (!z.is_array() || z.size() != 2) throw InputError("each zeta entry is [re, im]");
    s.zeta.emplace_back(parse_rational(z[0]), parse_rational(z[1]));
  }
  if (j.contains("framing"))
    for (const auto& f : j.at("framing")) s.framing.push_back(f.get<int>());
  const auto& p = j.at("phase");
  if (p.is_array()) {
    if (p.size() != 2) throw InputError("phase is [num, den]");
    Rational den = parse_rational(p[1]);
    if (den == 0) throw InputError("phase denominator is zero");
    s.phase = parse_rational(p[0]) / den;
  } else {
    s.phase = parse_rational(p);
  }
  return s;
}

nlohmann::ordered_json Stability::to_json() const {
  nlohmann::ordered_json j;
  j["zeta"] = nlohmann::ordered_json::array();
  for (const auto& [re, im] : zeta) j["zeta"].push_back({to_string(re), to_string(im)});
  j["framing"] = framing;
  j["phase"] = to_string(phase);
  return j;
}

FramedModule::FramedModule(InstancePtr instance, Stability stability, SizeKey cap, int n_max)
    : inst_(std::move(instance)), st_(std::move(stability)), cap_(std::move(cap)) {
  if (!inst_) throw InputError("framed module needs an instance");
  Field f = inst_->field();
  auto nv = static_cast<std::size_t>(inst_->num_vertices());
  if (st_.framing.empty()) st_.framing.assign(nv, 0);
  if (st_.zeta.size() != nv || st_.framing.size() != nv || cap_.size() != nv)
    throw InputError("zeta, framing and cap need one entry per vertex");
  for (const auto& z : st_.zeta)
    if (!(z.second > 0 || (z.second == 0 && z.first < 0))) throw InputError("zeta values must lie in the upper half plane");
  for (int x : st_.framing)
    if (x < 0) throw InputError("framing entries must be nonnegative");
  if (!(st_.phase > 0 && st_.phase <= 1)) throw InputError("phase must lie in (0, 1]");

  const Stability st = st_;
  auto inst = inst_;
  long lambdas = inst_->q() - 1;
  FlagRecipe r;
  r.inst = inst_;
  r.objects = [st, inst, f](const SizeKey& d) {
    std::vector<Decorated> out;
    const auto& fr = st.framing;
    std::uint64_t entries = 0;
    for (std::size_t i = 0; i < d.size(); ++i) entries += static_cast<std::uint64_t>(d[i] * fr[i]);
    std::uint64_t total = 1;
    for (std::uint64_t k = 0; k < entries; ++k) total *= static_cast<std::uint64_t>(f->q());
    for (const auto& rep : inst->all_reps(d)) {
      if (!semistable_for(*inst, st, rep)) continue;
      Budget::charge(total, "framing sections");
      for (std::uint64_t code = 0; code < total; ++code) {
        std::vector<Matrix> sec;
        std::uint64_t x = code;
        for (std::size_t i = 0; i < d.size(); ++i) {
          Matrix m(f, d[i], fr[i]);
          for (auto& e : m.data()) {
            e = static_cast<Elem>(x % static_cast<std::uint64_t>(f->q()));
            x /= static_cast<std::uint64_t>(f->q());
          }
          sec.push_back(std::move(m));
        }
        if (!stable_framed_for(*inst, st, rep, sec)) continue;
        Decorated t{rep, {}};
        for (const auto& m : sec) append_code(t.extra, m);
        out.push_back(std::move(t));
      }
    }
    return out;
  };
  auto sections = [st, f](const Decorated& t) {
    std::vector<Matrix> sec;
    std::size_t off = 0;
    for (std::size_t i = 0; i < t.rep.dim.size(); ++i) {
      int rows = t.rep.dim[i], cols = st.framing[i];
      sec.push_back(matrix_from_code(f, rows, cols, t.extra, off));
      off += static_cast<std::size_t>(rows * cols);
    }
    return sec;
  };
  auto torus = FiniteGroup({TableGroup::cyclic(lambdas)});
  r.group = [inst, torus](const SizeKey& d) { return FiniteGroup::product(inst->aut_group(d), torus); };
  r.act = [inst, f, sections](Idx g, const Decorated& t) {
    Idx order = inst->aut_group(t.rep.dim).order();
    Idx h = g % order, y = g / order;
    auto mats = inst->element_matrices(h, t.rep.dim);
    Elem scale = f->inv(power(f, f->primitive(), y));
    Decorated out{inst->act(h, t.rep), {}};
    auto sec = sections(t);
    for (std::size_t i = 0; i < sec.size(); ++i) append_code(out.extra, (mats[i] * sec[i]).scaled(scale));
    return out;
  };
  r.base_element = [inst](Idx g, const SizeKey& d) { return g % inst->aut_group(d).order(); };
  r.admissible = [](const Decorated&, const Sub&) { return true; };
  r.ambient = [inst](const Decorated& t, const Sub&) { return inst->full_sub(t.rep); };
  r.reduce = [inst, sections](const Decorated& t, const Sub& u, const Sub& b) {
    auto charts = inst->chart_maps(t.rep, u, b).first;
    Decorated out{inst->subquotient(t.rep, u, b), {}};
    auto sec = sections(t);
    for (std::size_t i = 0; i < sec.size(); ++i) append_code(out.extra, charts[i] * sec[i]);
    return out;
  };
  r.reduce_element = [inst](Idx g, const Decorated& t, const Sub& u, const Sub& b) {
    Idx order = inst->aut_group(t.rep.dim).order();
    Idx h = inst->induced_element(g % order, t.rep, u, b);
    Idx sub_order = inst->aut_group(size_sub(b.dim, u.dim)).order();
    return FiniteGroup::pair(h, g / order, sub_order);
  };
  r.label = [inst](const Decorated& t) {
    std::string s = inst->iso_key(t.rep) + " s=[";
    for (std::size_t i = 0; i < t.extra.size(); ++i) s += std::to_string(t.extra[i]);
    return s + "]";
  };
  r.flag_objects = [st, inst](const Rep& rep) { return semistable_for(*inst, st, rep); };
  y_ = std::make_shared<const FlagConstruction>(std::move(r), cap_, n_max);

  auto y0 = y_->simplicial()->level(0);
  for (Idx c = 0; c < y0->num_components(); ++c) {
    std::string label = y_->recipe().label(y_->entry(0, y0->representative(c)).top);
    if (!comp_of_.emplace(label, c).second) throw std::logic_error("framed pairs share the label " + label);
    labels_.push_back(std::move(label));
  }
}

bool FramedModule::semistable(const Rep& rep) const { return semistable_for(*inst_, st_, rep); }

bool FramedModule::stable_framed(const Rep& rep, const std::vector<Matrix>& section) const {
  return stable_framed_for(*inst_, st_, rep, section);
}

std::vector<std::string> FramedModule::semistable_keys() const {
  std::vector<std::string> out;
  for (const auto& d : sizes_below(cap_)) {
    if (size_total(d) == 0) continue;
    for (const auto& k : inst_->keys_of_size(d))
      if (semistable(inst_->object(k))) out.push_back(k);
  }
  return out;
}

std::vector<std::string> FramedModule::module_basis() const { return labels_; }

HallModuleElement FramedModule::act_basis(const std::string& u, const std::string& m) const {
  auto it = comp_of_.find(m);
  if (it == comp_of_.end()) throw InputError("unknown framed pair " + m);
  Obj rep = y_->simplicial()->level(0)->representative(it->second);
  SizeKey top = size_add(inst_->size_of(u), y_->entry(0, rep).top.rep.dim);
  if (!size_leq(top, cap_)) throw ResourceError("size " + size_string(top) + " exceeds the framed cap " + size_string(cap_));
  if (!semistable(inst_->object(u))) throw InputError(u + " is not semistable of the chosen phase");
  HallModuleElement out;
  for (const auto& [c, v] : span_action(*y_, u, rep).values)
    if (v != 0) out.coeffs[labels_[static_cast<std::size_t>(c)]] += v;
  out.prune();
  return out;
}

HallModuleElement FramedModule::act(const HallElement& a, const HallModuleElement& v) const {
  HallModuleElement out;
  for (const auto& [u, cu] : a.coeffs)
    for (const auto& [m, cm] : v.coeffs) {
      if (cu == 0 || cm == 0) continue;
      out += act_basis(u, m).scaled(cu * cm);
    }
  return out;
}

Report FramedModule::certificate(int n_max) const { return check_relative_2segal(y_->forget(), n_max); }

ModuleAxiomReport FramedModule::check_axiom() const {
  HallAlgebra alg(inst_);
  ModuleAxiomReport rep;
  auto keys = semistable_keys();
  auto y0 = y_->simplicial()->level(0);
  for (std::size_t c = 0; c < labels_.size(); ++c) {
    SizeKey dv = y_->entry(0, y0->representative(static_cast<Idx>(c))).top.rep.dim;
    for (const auto& a : keys)
      for (const auto& b : keys) {
        if (!size_leq(size_add(dv, size_add(inst_->size_of(a), inst_->size_of(b))), cap_)) continue;
        ++rep.triples;
        HallElement ea = HallElement::basis(a), eb = HallElement::basis(b);
        auto v = HallModuleElement::basis(labels_[c]);
        auto lhs = act(alg.multiply(ea, eb), v);
        auto rhs = act(ea, act(eb, v));
        if (!(lhs == rhs) && rep.pass) {
          rep.pass = false;
          rep.witness = "(" + a + " . " + b + ") * " + labels_[c] + " = " + lhs.to_json().dump() + " but " +
                        rhs.to_json().dump();
        }
      }
  }
  return rep;
}

nlohmann::ordered_json FramedModule::to_json() const {
  nlohmann::ordered_json j;
  j["instance"] = inst_->name();
  j["stability"] = st_.to_json();
  j["cap"] = cap_;
  j["semistable"] = semistable_keys();
  j["stable_framed"] = labels_;
  nlohmann::ordered_json act_table = nlohmann::ordered_json::object();
  auto y0 = y_->simplicial()->level(0);
  for (const auto& u : semistable_keys())
    for (std::size_t c = 0; c < labels_.size(); ++c) {
      SizeKey dv = y_->entry(0, y0->representative(static_cast<Idx>(c))).top.rep.dim;
      if (!size_leq(size_add(dv, inst_->size_of(u)), cap_)) continue;
      auto e = act_basis(u, labels_[c]);
      if (!e.coeffs.empty()) act_table[u + " * " + labels_[c]] = e.to_json();
    }
  j["action"] = std::move(act_table);
  return j;
}

}  // namespace hall
