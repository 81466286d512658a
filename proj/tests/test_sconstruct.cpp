#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>

#include "hall/budget.hpp"
#include "hall/sconstruct.hpp"

using namespace hall;

TEST_CASE("X_1 of vect over F_2 up to dimension 2") {
  auto s = s_construction(instance_vect_fq(2), {2}, 2);
  const auto& x1 = *s->simplicial()->level(1);
  CHECK(x1.num_components() == 3);
  CHECK(groupoid_cardinality(x1) == Rational(1) + Rational(1) + Rational(1, 6));
  CHECK(s->simplicial()->level(0)->num_components() == 1);
  CHECK(groupoid_cardinality(*s->simplicial()->level(0)) == 1);
}

TEST_CASE("faces of X_2 are quotient, middle and sub") {
  for (auto inst : {instance_vect_fq(2), instance_rep_fq(Quiver::a2(), 2), instance_vect_f1()}) {
    SizeKey cap = inst->num_vertices() == 2 ? SizeKey{1, 1} : SizeKey{2};
    auto s = s_construction(inst, cap, 2);
    auto x = s->simplicial();
    const auto& x1 = *x->level(1);
    auto d0 = x->face(2, 0), d1 = x->face(2, 1), d2 = x->face(2, 2);
    const auto& blocks = s->blocks(2);
    for (std::size_t b = 0; b < blocks.size(); ++b)
      for (std::size_t o = 0; o < blocks[b].flags.size(); ++o) {
        const auto& f = blocks[b].flags[o];
        Obj obj{static_cast<int>(b), static_cast<Idx>(o)};
        auto key = [&](const FunctorPtr& face) { return s->key_of_component(x1.component_of(face->obj(obj))); };
        CHECK(key(d1) == inst->iso_key(f.top));
        CHECK(key(d2) == inst->iso_key(inst->subquotient(f.top, f.chain[0], f.chain[1])));
        CHECK(key(d0) == inst->iso_key(inst->subquotient(f.top, f.chain[1], f.chain[2])));
      }
  }
}

TEST_CASE("S-construction is 2-Segal and unital") {
  using clock = std::chrono::steady_clock;
  auto start = clock::now();
  std::vector<std::pair<InstancePtr, SizeKey>> cases = {
      {instance_vect_fq(2), {2}}, {instance_rep_fq(Quiver::a2(), 2), {1, 1}}, {instance_vect_f1(), {2}}};
  for (auto& [inst, cap] : cases) {
    INFO(inst->name());
    auto s = s_construction(inst, cap, 3);
    CHECK(s->simplicial()->check_identities().empty());
    auto seg = check_2segal(*s->simplicial(), 3);
    CHECK(seg.pass);
    CHECK(seg.squares.size() == 6);
    auto uni = check_unital(*s->simplicial(), 3);
    CHECK(uni.pass);
    CHECK_FALSE(uni.squares.empty());
  }
  CHECK(std::chrono::duration<double>(clock::now() - start).count() < 120);
}

TEST_CASE("vect over F_2 is not 1-Segal") {
  auto s = s_construction(instance_vect_fq(2), {2}, 2);
  auto r = check_1segal(*s->simplicial(), 2);
  CHECK_FALSE(r.pass);
  bool witnessed = false;
  for (const auto& sq : r.squares)
    if (!sq.pass && !sq.witness.empty()) witnessed = true;
  CHECK(witnessed);
}

TEST_CASE("corrupted X_3 fails the 2-Segal check") {
  auto s = s_construction(instance_vect_fq(2), {2}, 3);
  auto bad = with_duplicated_block(s->simplicial(), 3, 0);
  auto r = check_2segal(bad, 3);
  CHECK_FALSE(r.pass);
  std::string witness;
  for (const auto& sq : r.squares)
    if (!sq.pass) witness = sq.witness;
  CHECK_FALSE(witness.empty());
  MESSAGE("witness: " << witness);
}

TEST_CASE("inclusions of subcategories") {
  // Representations supported at vertex 1: closed under subobjects, quotients and extensions.
  auto a2 = instance_rep_fq(Quiver::a2(), 2);
  auto full = s_construction(a2, {2, 1}, 2);
  auto serre = s_construction(a2, {2, 1}, 2, [](const SizeKey& d) { return d[1] == 0; });
  auto f = inclusion_map(serre, full);
  CHECK(check_culf(f, 2).pass);
  CHECK(check_ikeo(f, 2).pass);

  // Even-dimensional spaces: closed under extensions only.
  auto v2 = instance_vect_fq(2);
  auto vfull = s_construction(v2, {2}, 2);
  auto even = s_construction(v2, {2}, 2, [](const SizeKey& d) { return d[0] % 2 == 0; });
  auto g = inclusion_map(even, vfull);
  CHECK(check_ikeo(g, 2).pass);
  auto culf = check_culf(g, 2);
  CHECK_FALSE(culf.pass);
  std::string witness;
  for (const auto& sq : culf.squares)
    if (!sq.pass) witness = sq.witness;
  CHECK_FALSE(witness.empty());
}

TEST_CASE("cap and level validation") {
  CHECK_THROWS_AS(s_construction(instance_vect_fq(2), {2}, 5), InputError);
  CHECK_THROWS_AS(s_construction(instance_vect_fq(2), {2, 1}, 2), InputError);
  auto s = s_construction(instance_vect_fq(2), {1}, 1);
  CHECK_THROWS_AS(s->component_of_key("2"), InputError);
  Budget::set_limit(1000);
  CHECK_THROWS_AS(s_construction(instance_vect_fq(3), {3}, 3), ResourceError);
  Budget::set_limit(2000000000ULL);
  Budget::reset();
}
