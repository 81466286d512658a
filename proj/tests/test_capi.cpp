#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>
#include <string>

#include "hall/hall_c.h"

namespace {

// Takes ownership of a returned string.
std::string take(char* s) {
  std::string r = s ? s : "";
  hall_free_string(s);
  return r;
}

nlohmann::json call_json(hall_status expect, const std::function<hall_status(char**)>& f) {
  char* out = nullptr;
  hall_status st = f(&out);
  CHECK_MESSAGE(st == expect, std::string(hall_last_error()));
  std::string text = take(out);
  return text.empty() ? nlohmann::json() : nlohmann::json::parse(text);
}

struct Instance {
  hall_instance* h = nullptr;
  Instance(const char* name, int q, const char* quiver = nullptr) {
    REQUIRE_MESSAGE(hall_instance_create(name, q, quiver, &h) == HALL_OK, std::string(hall_last_error()));
  }
  ~Instance() { hall_instance_free(h); }
};

const char* kA2 = R"({"vertices":["1","2"],"arrows":[{"from":"1","to":"2","name":"a"}]})";

}  // namespace

TEST_CASE("instances and errors") {
  hall_instance* h = nullptr;
  CHECK(hall_instance_create("vect_fq", 1, nullptr, &h) == HALL_INPUT_ERROR);
  CHECK(h == nullptr);
  CHECK(std::string(hall_last_error()).size() > 0);
  CHECK(hall_instance_create("no_such", 2, nullptr, &h) == HALL_INPUT_ERROR);
  CHECK(hall_instance_create("rep_fq", 2, "{not json", &h) == HALL_INPUT_ERROR);
  CHECK(hall_instance_create(nullptr, 2, nullptr, &h) == HALL_INPUT_ERROR);
  CHECK(hall_instance_create("vect_fq", 2, nullptr, nullptr) == HALL_INPUT_ERROR);
  char* out = nullptr;
  CHECK(hall_multiply(nullptr, "1", "1", &out) == HALL_INPUT_ERROR);
  CHECK(out == nullptr);

  Instance v("vect_fq", 3);
  auto d = call_json(HALL_OK, [&](char** o) { return hall_instance_describe(v.h, o); });
  CHECK(d["q"] == 3);
  auto keys = call_json(HALL_OK, [&](char** o) { return hall_instance_keys(v.h, "2", o); });
  CHECK(keys == nlohmann::json::array({"2"}));
  CHECK(std::string(hall_last_error()).empty());
}

TEST_CASE("products and tables") {
  Instance v("vect_fq", 2);
  auto p = call_json(HALL_OK, [&](char** o) { return hall_multiply(v.h, "1", "1", o); });
  CHECK(p["result"] == nlohmann::json::parse(R"({"2":"3"})"));
  p = call_json(HALL_OK, [&](char** o) { return hall_multiply(v.h, "1", "2", o); });
  CHECK(p["result"]["3"] == "7");
  call_json(HALL_INPUT_ERROR, [&](char** o) { return hall_multiply(v.h, "x", "1", o); });

  char* out = nullptr;
  REQUIRE(hall_mult_table(v.h, "2", HALL_FORMAT_CSV, &out) == HALL_OK);
  std::string csv = take(out);
  CHECK(csv.find("\"1\",\"1:1\",\"2:3\",") != std::string::npos);
  auto t = call_json(HALL_OK, [&](char** o) { return hall_mult_table(v.h, "2", HALL_FORMAT_JSON, o); });
  CHECK(t.is_object());

  auto c = call_json(HALL_OK, [&](char** o) { return hall_comultiply(v.h, "2", o); });
  CHECK(c["coassociative"] == true);
  CHECK(c["coproduct"]["1 | 1"] == "1/2");
}

TEST_CASE("budget maps to resource status") {
  Instance v("vect_fq", 2);
  hall_set_budget(5);
  hall_reset_budget();
  char* out = nullptr;
  CHECK(hall_mult_table(v.h, "4", HALL_FORMAT_JSON, &out) == HALL_RESOURCE_ERROR);
  CHECK(out == nullptr);
  hall_set_budget(0);
  hall_reset_budget();
  CHECK(hall_budget_used() == 0);
}

TEST_CASE("checks") {
  Instance v("vect_fq", 2);
  auto ok = call_json(HALL_OK, [&](char** o) { return hall_check_2segal(v.h, "2", 0, o); });
  CHECK(ok["pass"] == true);
  auto bad = call_json(HALL_CHECK_FAILED, [&](char** o) { return hall_check_2segal(v.h, "2", 1, o); });
  CHECK(bad["pass"] == false);

  Instance a2("rep_fq", 2, kA2);
  auto serre = call_json(HALL_OK, [&](char** o) { return hall_check_culf(a2.h, "zero:1", "(2,1)", o); });
  CHECK(serre["map"]["culf"]["pass"] == true);
  auto even = call_json(HALL_CHECK_FAILED, [&](char** o) { return hall_check_culf(v.h, "even:0", "2", o); });
  CHECK(even["map"]["ikeo"]["pass"] == true);
  call_json(HALL_INPUT_ERROR, [&](char** o) { return hall_check_culf(v.h, "odd:0", "2", o); });
  call_json(HALL_INPUT_ERROR, [&](char** o) { return hall_check_culf(v.h, "zero:3", "2", o); });

  auto rel = call_json(HALL_OK, [&](char** o) { return hall_relations(a2.h, "(2,1)", o); });
  CHECK(rel["relations"].is_object());

  int primes[] = {2, 3, 5};
  auto hp = call_json(HALL_OK, [&](char** o) {
    return hall_polynomial("nil_jordan_fq", nullptr, "(1)", "(1)", "(1,1)", primes, 3, 7, o);
  });
  CHECK(hp["polynomial"] == true);

  Instance a2f1("rep_f1", 1, kA2);
  auto span = call_json(HALL_OK, [&](char** o) { return hall_simples_span(a2f1.h, "(2,2)", o); });
  CHECK(span["surjective"] == true);
}

TEST_CASE("modules") {
  Instance v("vect_fq", 2);
  hall_module* m = nullptr;
  CHECK(hall_module_create(v.h, R"({"theta_sign":2})", "2", &m) == HALL_INPUT_ERROR);
  CHECK(hall_module_create(v.h, "[]", "2", &m) == HALL_INPUT_ERROR);
  REQUIRE_MESSAGE(hall_module_create(v.h, R"({"theta_sign":-1})", "4", &m) == HALL_OK, std::string(hall_last_error()));
  auto basis = call_json(HALL_OK, [&](char** o) { return hall_module_basis(m, o); });
  CHECK(basis["basis"].size() == 3);
  auto act = call_json(HALL_OK, [&](char** o) { return hall_module_act(m, "1", "0", o); });
  CHECK(act["result"]["2"] == "3");
  auto check = call_json(HALL_OK, [&](char** o) { return hall_module_check(m, o); });
  CHECK(check["module_axiom"]["pass"] == true);
  CHECK(check["unit_acts_trivially"] == true);
  hall_module_free(m);

  auto rec = call_json(HALL_OK, [&](char** o) { return hall_module_reconciliation(o); });
  CHECK(rec["rows"].size() == 6);
  auto cert = call_json(HALL_OK, [&](char** o) { return hall_module_certify(v.h, R"({"theta_sign":-1})", "2", o); });
  CHECK(cert["relative_2segal"]["pass"] == true);

  Instance a2("rep_fq", 2, kA2);
  const char* st = R"({"zeta":[[-1,1],[1,1]],"framing":[1,1],"phase":"1/2"})";
  auto fr = call_json(HALL_OK, [&](char** o) { return hall_framed(a2.h, st, "(1,1)", o); });
  CHECK(fr["relative_2segal"]["pass"] == true);
  CHECK(fr["module_axiom"]["pass"] == true);
  call_json(HALL_INPUT_ERROR, [&](char** o) { return hall_framed(a2.h, R"({"zeta":[]})", "(1,1)", o); });
}

TEST_CASE("coha") {
  auto p = call_json(HALL_OK, [](char** o) { return hall_coha_multiply(1, "1", "1", o); });
  CHECK(p["result"]["terms"]["m()"] == "2");
  auto z = call_json(HALL_OK, [](char** o) { return hall_coha_multiply(0, "1", "1", o); });
  CHECK(z["result"]["terms"].empty());
  auto a = call_json(HALL_OK, [](char** o) { return hall_coha_act(1, "1", "0", o); });
  CHECK(a["result"]["terms"]["m()"] == "2");
  auto dt = call_json(HALL_OK, [](char** o) { return hall_coha_dt(2, 2, 4, HALL_FORMAT_JSON, o); });
  CHECK(dt["dt"]["min_degree"] == -4);
  call_json(HALL_INPUT_ERROR, [](char** o) { return hall_coha_dt(0, 2, 4, HALL_FORMAT_JSON, o); });
  call_json(HALL_INPUT_ERROR, [](char** o) { return hall_coha_dt(1, -2, 4, HALL_FORMAT_JSON, o); });
  char* out = nullptr;
  REQUIRE(hall_coha_wprim(2, 2, 8, HALL_FORMAT_CSV, &out) == HALL_OK);
  CHECK(take(out) == "weight,0,1,2,3,4,5,6,7,8\n0,1,0,0,0,0,0,0,0,0\n1,1,0,0,0,0,0,0,0,0\n2,1,0,0,0,1,0,0,0,0\n");
  call_json(HALL_INPUT_ERROR, [](char** o) { return hall_coha_multiply(1, "{bad", "1", o); });
}
