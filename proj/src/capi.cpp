#include "hall/hall_c.h"

#include <cstdlib>
#include <cstring>
#include <functional>
#include <new>
#include <string>

#include "hall/budget.hpp"
#include "hall/coha.hpp"
#include "hall/hall.hpp"
#include "hall/module.hpp"

using json = nlohmann::ordered_json;

struct hall_instance {
  hall::InstancePtr inst;
  std::string name;
  int q = 0;
  std::optional<hall::Quiver> quiver;
};

struct hall_module {
  hall::DualityPtr dual;
  std::unique_ptr<hall::HallModule> module;
};

namespace {

thread_local std::string last_error;

char* dup(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

std::string str(const char* s, const char* what) {
  if (!s) throw hall::InputError(std::string("missing ") + what);
  return s;
}

// Runs body, mapping exceptions to status codes. body returns the status to report on success.
hall_status guarded(const std::function<hall_status()>& body) {
  last_error.clear();
  try {
    return body();
  } catch (const hall::InputError& e) {
    last_error = e.what();
    return HALL_INPUT_ERROR;
  } catch (const nlohmann::json::exception& e) {
    last_error = std::string("malformed JSON: ") + e.what();
    return HALL_INPUT_ERROR;
  } catch (const hall::ResourceError& e) {
    last_error = e.what();
    return HALL_RESOURCE_ERROR;
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return HALL_RESOURCE_ERROR;
  } catch (const std::exception& e) {
    last_error = e.what();
    return HALL_INTERNAL_ERROR;
  }
}

hall_status emit(char** out, const std::string& text, hall_status status = HALL_OK) {
  if (!out) throw hall::InputError("missing output pointer");
  *out = dup(text);
  return status;
}

hall_status emit(char** out, const json& j, hall_status status = HALL_OK) { return emit(out, j.dump() + "\n", status); }

const hall::ProtoExactInstance& need(const hall_instance* inst) {
  if (!inst || !inst->inst) throw hall::InputError("null instance handle");
  return *inst->inst;
}

hall::SizeKey size_arg(const hall_instance* inst, const char* s, const char* what) {
  return need(inst).parse_size(str(s, what));
}

std::optional<hall::Quiver> quiver_arg(const char* quiver_json) {
  if (!quiver_json || !*quiver_json) return std::nullopt;
  return hall::Quiver::from_json(nlohmann::json::parse(quiver_json));
}

hall::DualityPtr duality_arg(const hall_instance* inst, const char* duality_json) {
  auto j = nlohmann::json::parse(str(duality_json, "duality"));
  if (!j.is_object() || !j.contains("theta_sign")) throw hall::InputError("duality needs \"theta_sign\"");
  const auto& t = j.at("theta_sign");
  int theta = t.is_string() ? std::stoi(t.get<std::string>()) : t.get<int>();
  std::vector<int> vs, as;
  if (j.contains("vertex_signs")) vs = j.at("vertex_signs").get<std::vector<int>>();
  if (j.contains("arrow_signs")) as = j.at("arrow_signs").get<std::vector<int>>();
  return std::make_shared<const hall::Duality>(inst->inst, theta, vs, as);
}

json tensor_json(const std::map<std::vector<std::string>, hall::Rational>& t) {
  json j = json::object();
  for (const auto& [keys, c] : t) {
    std::string k;
    for (std::size_t i = 0; i < keys.size(); ++i) k += (i ? " | " : "") + keys[i];
    j[k] = hall::to_string(c);
  }
  return j;
}

hall::SizeFilter sub_filter(const std::string& spec, int vertices) {
  auto colon = spec.find(':');
  if (colon == std::string::npos) throw hall::InputError("subcategory is zero:V or even:V");
  std::string kind = spec.substr(0, colon);
  int v = 0;
  try {
    v = std::stoi(spec.substr(colon + 1));
  } catch (const std::exception&) {
    throw hall::InputError("bad vertex in subcategory " + spec);
  }
  if (v < 0 || v >= vertices) throw hall::InputError("vertex out of range in subcategory " + spec);
  auto i = static_cast<std::size_t>(v);
  if (kind == "zero") return [i](const hall::SizeKey& d) { return d[i] == 0; };
  if (kind == "even") return [i](const hall::SizeKey& d) { return d[i] % 2 == 0; };
  throw hall::InputError("unknown subcategory kind " + kind);
}

// One generator per simple: the iso classes of each unit size.
std::vector<std::pair<std::string, hall::HallElement>> simples(const hall::ProtoExactInstance& inst) {
  std::vector<std::pair<std::string, hall::HallElement>> gens;
  for (int v = 0; v < inst.num_vertices(); ++v) {
    hall::SizeKey d = inst.zero_size();
    d[static_cast<std::size_t>(v)] = 1;
    auto keys = inst.keys_of_size(d);
    for (std::size_t k = 0; k < keys.size(); ++k) {
      std::string name = "E" + std::to_string(v + 1) + (keys.size() > 1 ? "_" + std::to_string(k + 1) : "");
      gens.emplace_back(name, hall::HallElement::basis(keys[k]));
    }
  }
  return gens;
}

hall_status check_caps(int weight_cap, int degree_cap) {
  if (weight_cap < 0 || degree_cap < 0) throw hall::InputError("caps must be nonnegative");
  return HALL_OK;
}

}  // namespace

extern "C" {

const char* hall_last_error(void) { return last_error.c_str(); }

void hall_free_string(char* s) { std::free(s); }

void hall_set_budget(uint64_t limit) { hall::Budget::set_limit(limit ? limit : ~uint64_t{0}); }
uint64_t hall_budget_used(void) { return hall::Budget::used(); }
void hall_reset_budget(void) { hall::Budget::reset(); }
void hall_set_jobs(int jobs) { hall::set_jobs(jobs); }

hall_status hall_instance_create(const char* name, int q, const char* quiver_json, hall_instance** out) {
  return guarded([&] {
    if (!out) throw hall::InputError("missing output pointer");
    auto h = std::make_unique<hall_instance>();
    h->name = str(name, "instance name");
    h->q = q;
    h->quiver = quiver_arg(quiver_json);
    h->inst = hall::make_instance(h->name, q, h->quiver);
    *out = h.release();
    return HALL_OK;
  });
}

void hall_instance_free(hall_instance* inst) { delete inst; }

hall_status hall_instance_describe(const hall_instance* inst, char** out) {
  return guarded([&] {
    const auto& i = need(inst);
    json j;
    j["name"] = i.name();
    j["q"] = i.q();
    j["quiver"] = i.quiver().to_json();
    return emit(out, j);
  });
}

hall_status hall_instance_keys(const hall_instance* inst, const char* size, char** out) {
  return guarded([&] { return emit(out, json(need(inst).keys_of_size(size_arg(inst, size, "size")))); });
}

hall_status hall_multiply(const hall_instance* inst, const char* left, const char* right, char** out) {
  return guarded([&] {
    const auto& i = need(inst);
    std::string l = str(left, "left key"), r = str(right, "right key");
    i.object(l);
    i.object(r);
    hall::HallAlgebra alg(inst->inst);
    auto p = alg.multiply(hall::HallElement::basis(l), hall::HallElement::basis(r));
    json j;
    j["result"] = p.to_json(i);
    return emit(out, j);
  });
}

hall_status hall_mult_table(const hall_instance* inst, const char* cap, hall_format format, char** out) {
  return guarded([&] {
    auto c = size_arg(inst, cap, "cap");
    hall::HallAlgebra alg(inst->inst, {}, c);
    auto t = hall::multiplication_table(alg, c);
    if (format == HALL_FORMAT_CSV) return emit(out, t.to_csv());
    return emit(out, t.to_json(need(inst)));
  });
}

hall_status hall_comultiply(const hall_instance* inst, const char* key, char** out) {
  return guarded([&] {
    const auto& i = need(inst);
    std::string k = str(key, "key");
    i.object(k);
    hall::HallAlgebra alg(inst->inst);
    json j;
    j["key"] = k;
    std::map<std::vector<std::string>, hall::Rational> two;
    for (const auto& [pair, c] : alg.comultiply(k)) two[{pair.first, pair.second}] = c;
    j["coproduct"] = tensor_json(two);
    auto left = alg.comultiply_left(k), right = alg.comultiply_right(k);
    bool coassoc = left == right;
    j["coassociative"] = coassoc;
    if (!coassoc) {
      j["left"] = tensor_json(left);
      j["right"] = tensor_json(right);
    }
    return emit(out, j, coassoc ? HALL_OK : HALL_CHECK_FAILED);
  });
}

hall_status hall_polynomial(const char* name, const char* quiver_json, const char* left, const char* right,
                            const char* target, const int* primes, int nprimes, int holdout, char** out) {
  return guarded([&] {
    std::string n = str(name, "instance name");
    auto quiver = quiver_arg(quiver_json);
    if (nprimes <= 0 || !primes) throw hall::InputError("need at least one prime");
    std::vector<int> ps(primes, primes + nprimes);
    auto family = [&](int q) { return hall::make_instance(n, q, quiver); };
    auto hp = hall::hall_polynomial(family, str(left, "left key"), str(right, "right key"), str(target, "target key"),
                                    ps, holdout);
    return emit(out, hp.to_json(), hp.polynomial ? HALL_OK : HALL_CHECK_FAILED);
  });
}

hall_status hall_check_2segal(const hall_instance* inst, const char* cap, int corrupt, char** out) {
  return guarded([&] {
    auto c = size_arg(inst, cap, "cap");
    auto s = hall::s_construction(inst->inst, c, 3);
    json j;
    j["instance"] = need(inst).name();
    j["cap"] = c;
    j["corrupted"] = corrupt != 0;
    bool pass = true;
    if (corrupt) {
      auto bad = hall::with_duplicated_block(s->simplicial(), 3, 0);
      auto r = hall::check_2segal(bad, 3);
      pass = r.pass;
      j["two_segal"] = r.to_json();
    } else {
      auto seg = hall::check_2segal(*s->simplicial(), 3);
      auto uni = hall::check_unital(*s->simplicial(), 3);
      pass = seg.pass && uni.pass;
      j["two_segal"] = seg.to_json();
      j["unital"] = uni.to_json();
    }
    j["pass"] = pass;
    return emit(out, j, pass ? HALL_OK : HALL_CHECK_FAILED);
  });
}

hall_status hall_check_culf(const hall_instance* inst, const char* sub, const char* cap, char** out) {
  return guarded([&] {
    auto c = size_arg(inst, cap, "cap");
    std::string spec = str(sub, "subcategory");
    auto m = hall::induced_algebra_map(inst->inst, sub_filter(spec, need(inst).num_vertices()), c);
    json j;
    j["instance"] = need(inst).name();
    j["subcategory"] = spec;
    j["cap"] = c;
    j["map"] = m.to_json();
    return emit(out, j, m.culf.pass ? HALL_OK : HALL_CHECK_FAILED);
  });
}

hall_status hall_relations(const hall_instance* inst, const char* size, char** out) {
  return guarded([&] {
    auto d = size_arg(inst, size, "size");
    hall::HallAlgebra alg(inst->inst);
    auto rel = hall::word_relations(alg, simples(need(inst)), d);
    json j;
    j["instance"] = need(inst).name();
    j["size"] = d;
    j["relations"] = rel.to_json(need(inst));
    return emit(out, j);
  });
}

hall_status hall_simples_span(const hall_instance* inst, const char* cap, char** out) {
  return guarded([&] {
    const auto& i = need(inst);
    auto c = size_arg(inst, cap, "cap");
    hall::HallAlgebra alg(inst->inst);
    std::vector<hall::HallElement> gens;
    for (const auto& g : simples(i)) gens.push_back(g.second);
    json rows = json::array();
    bool surjective = true;
    for (const auto& d : hall::sizes_below(c)) {
      int dim = hall::subalgebra_component_dim(alg, gens, d);
      auto classes = static_cast<int>(i.keys_of_size(d).size());
      surjective = surjective && dim == classes;
      rows.push_back({{"size", d}, {"span", dim}, {"classes", classes}});
    }
    json j;
    j["instance"] = i.name();
    j["cap"] = c;
    j["components"] = std::move(rows);
    j["surjective"] = surjective;
    return emit(out, j);
  });
}

hall_status hall_module_create(const hall_instance* inst, const char* duality_json, const char* cap, hall_module** out) {
  return guarded([&] {
    if (!out) throw hall::InputError("missing output pointer");
    auto c = size_arg(inst, cap, "cap");
    auto h = std::make_unique<hall_module>();
    h->dual = duality_arg(inst, duality_json);
    h->module = std::make_unique<hall::HallModule>(h->dual, c);
    *out = h.release();
    return HALL_OK;
  });
}

void hall_module_free(hall_module* mod) { delete mod; }

namespace {
const hall::HallModule& need(const hall_module* mod) {
  if (!mod || !mod->module) throw hall::InputError("null module handle");
  return *mod->module;
}
}  // namespace

hall_status hall_module_basis(const hall_module* mod, char** out) {
  return guarded([&] {
    const auto& m = need(mod);
    json rows = json::array();
    for (const auto& d : hall::sizes_below(m.cap()))
      for (const auto& c : m.classes(d))
        rows.push_back({{"key", c.key}, {"size", d}, {"isometry_order", c.isometry_order.get_str()}});
    json j;
    j["duality"] = m.duality()->to_json();
    j["cap"] = m.cap();
    j["basis"] = std::move(rows);
    return emit(out, j);
  });
}

hall_status hall_module_act(const hall_module* mod, const char* u, const char* m, char** out) {
  return guarded([&] {
    const auto& md = need(mod);
    std::string uk = str(u, "algebra key"), mk = str(m, "module key");
    auto r = md.act_basis(uk, mk);
    json j;
    j["left"] = uk;
    j["right"] = mk;
    j["result"] = r.to_json([&md](const std::string& a, const std::string& b) { return md.key_less(a, b); });
    return emit(out, j);
  });
}

hall_status hall_module_check(const hall_module* mod, char** out) {
  return guarded([&] {
    const auto& md = need(mod);
    auto ax = hall::check_module_axiom(md, md.cap());
    json j;
    j["duality"] = md.duality()->to_json();
    j["cap"] = md.cap();
    j["module_axiom"] = ax.to_json();
    // delta_0 is the identity on every basis element.
    bool unit = true;
    for (const auto& k : md.basis_below(md.cap()))
      unit = unit && md.act(hall::HallElement::basis(md.instance()->keys_of_size(md.instance()->zero_size()).at(0)),
                            hall::HallModuleElement::basis(k)) == hall::HallModuleElement::basis(k);
    j["unit_acts_trivially"] = unit;
    return emit(out, j, ax.pass && unit ? HALL_OK : HALL_CHECK_FAILED);
  });
}

hall_status hall_module_reconciliation(char** out) {
  return guarded([&] { return emit(out, hall::reconciliation_report({{1, 0}, {1, 1}, {2, 1}}, {2, 3}).to_json()); });
}

hall_status hall_module_certify(const hall_instance* inst, const char* duality_json, const char* cap, char** out) {
  return guarded([&] {
    auto c = size_arg(inst, cap, "cap");
    auto dual = duality_arg(inst, duality_json);
    auto r = hall::r_construction(dual, c, 2);
    auto rep = hall::check_relative_2segal(r->forget(), 2);
    json j;
    j["duality"] = dual->to_json();
    j["cap"] = c;
    j["relative_2segal"] = rep.to_json();
    return emit(out, j, rep.pass ? HALL_OK : HALL_CHECK_FAILED);
  });
}

hall_status hall_framed(const hall_instance* inst, const char* stability_json, const char* cap, char** out) {
  return guarded([&] {
    auto c = size_arg(inst, cap, "cap");
    auto st = hall::Stability::from_json(nlohmann::json::parse(str(stability_json, "stability")));
    hall::FramedModule fm(inst->inst, st, c);
    auto cert = fm.certificate(2);
    auto ax = fm.check_axiom();
    json j = fm.to_json();
    j["relative_2segal"] = cert.to_json();
    j["module_axiom"] = ax.to_json();
    return emit(out, j, cert.pass && ax.pass ? HALL_OK : HALL_CHECK_FAILED);
  });
}

hall_status hall_coha_multiply(int m, const char* left, const char* right, char** out) {
  return guarded([&] {
    auto f = hall::coha::SymPoly::parse(str(left, "left"));
    auto g = hall::coha::SymPoly::parse(str(right, "right"));
    json j;
    j["m"] = m;
    j["left"] = f.to_json();
    j["right"] = g.to_json();
    j["result"] = hall::coha::shuffle_product(f, g, m).to_json();
    return emit(out, j);
  });
}

hall_status hall_coha_act(int m, const char* left, const char* right, char** out) {
  return guarded([&] {
    auto f = hall::coha::SymPoly::parse(str(left, "left"));
    auto g = hall::coha::SignedSymPoly::parse(str(right, "right"));
    json j;
    j["m"] = m;
    j["left"] = f.to_json();
    j["right"] = g.to_json();
    j["result"] = hall::coha::module_action(f, g, m).to_json();
    return emit(out, j);
  });
}

hall_status hall_coha_dt(int m, int weight_cap, int degree_cap, hall_format format, char** out) {
  return guarded([&] {
    check_caps(weight_cap, degree_cap);
    auto s = hall::coha::dt_invariants(m, weight_cap, degree_cap);
    if (format == HALL_FORMAT_CSV) return emit(out, s.to_csv());
    json j;
    j["m"] = m;
    j["dt"] = s.to_json();
    return emit(out, j);
  });
}

hall_status hall_coha_wprim(int m, int weight_cap, int degree_cap, hall_format format, char** out) {
  return guarded([&] {
    check_caps(weight_cap, degree_cap);
    auto s = hall::coha::wprim(m, weight_cap, degree_cap);
    if (format == HALL_FORMAT_CSV) return emit(out, s.to_csv());
    json j;
    j["m"] = m;
    j["wprim"] = s.to_json();
    return emit(out, j);
  });
}

}  // extern "C"
