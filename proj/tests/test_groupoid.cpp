#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "hall/budget.hpp"
#include "hall/simplicial.hpp"

using namespace hall;

namespace {

FiniteGroup cyclic(Idx n) { return FiniteGroup({TableGroup::cyclic(n)}); }

FiniteGroup symmetric3() {
  // Permutations of {0,1,2} as codes; identity first.
  std::vector<CodeGroup::Code> perms = {{0, 1, 2}, {1, 0, 2}, {0, 2, 1}, {2, 1, 0}, {1, 2, 0}, {2, 0, 1}};
  auto g = std::make_shared<CodeGroup>(perms, [](const CodeGroup::Code& a, const CodeGroup::Code& b) {
    CodeGroup::Code c(3);
    for (int i = 0; i < 3; ++i) c[i] = a[b[i]];
    return c;
  });
  return FiniteGroup({g});
}

GroupoidPtr bg(const FiniteGroup& g) {
  return std::make_shared<const FiniteGroupoid>(FiniteGroupoid::from_groups({{"*", g}}));
}

GroupoidPtr pt() { return std::make_shared<const FiniteGroupoid>(FiniteGroupoid::point()); }

}  // namespace

TEST_CASE("cardinality") {
  CHECK(groupoid_cardinality(*bg(symmetric3())) == Rational(1, 6));
  CHECK(groupoid_cardinality(FiniteGroupoid::discrete(5)) == 5);
  CHECK(groupoid_cardinality(FiniteGroupoid()) == 0);
  // S_3 acting on 3 points: one component with stabilizer of order 2.
  auto s3 = symmetric3();
  auto blk = FiniteGroupoid::make_block(s3, 3, [&](Idx g, Idx s) {
    static const int perms[6][3] = {{0, 1, 2}, {1, 0, 2}, {0, 2, 1}, {2, 1, 0}, {1, 2, 0}, {2, 0, 1}};
    return Idx{perms[g][s]};
  });
  FiniteGroupoid orbit({blk});
  CHECK(orbit.num_components() == 1);
  CHECK(groupoid_cardinality(orbit) == Rational(1, 2));
}

TEST_CASE("homotopy fiber") {
  auto g = bg(symmetric3());
  auto id = GroupoidFunctor::identity(g);
  auto fib = homotopy_fiber(id, Obj{0, 0});
  CHECK(groupoid_cardinality(*fib.groupoid) == 1);
  CHECK(fib.groupoid->num_components() == 1);

  auto p = pt();
  GroupoidFunctor incl(p, g, [](int, Idx) { return Obj{0, 0}; }, [](int, Idx, Idx) { return Idx{0}; });
  auto fib2 = homotopy_fiber(incl, Obj{0, 0});
  CHECK(fib2.groupoid->num_objects() == 6);
  CHECK(fib2.groupoid->num_components() == 6);
  CHECK_THROWS_AS(homotopy_fiber(incl, Obj{0, 3}), InputError);
}

TEST_CASE("homotopy pullback") {
  auto g = bg(symmetric3());
  auto p = pt();
  GroupoidFunctor incl(p, g, [](int, Idx) { return Obj{0, 0}; }, [](int, Idx, Idx) { return Idx{0}; });
  auto pb = homotopy_pullback(incl, incl);
  CHECK(pb.groupoid->num_components() == 6);
  CHECK(groupoid_cardinality(*pb.groupoid) == 6);

  auto id = GroupoidFunctor::identity(g);
  auto pb2 = homotopy_pullback(id, id);
  CHECK(groupoid_cardinality(*pb2.groupoid) == Rational(1, 6));
  CHECK(is_equivalence(pb2.proj_a).ok);

  auto other = bg(cyclic(2));
  auto id2 = GroupoidFunctor::identity(other);
  CHECK_THROWS_AS(homotopy_pullback(id, id2), InputError);
}

TEST_CASE("equivalence") {
  auto g = bg(symmetric3());
  CHECK(is_equivalence(GroupoidFunctor::identity(g)).ok);
  // Action groupoid of S_3 on 3 points is equivalent to BZ_2.
  auto s3 = symmetric3();
  static const int perms[6][3] = {{0, 1, 2}, {1, 0, 2}, {0, 2, 1}, {2, 1, 0}, {1, 2, 0}, {2, 0, 1}};
  auto orbit = std::make_shared<const FiniteGroupoid>(
      std::vector<ActionBlock>{FiniteGroupoid::make_block(s3, 3, [&](Idx x, Idx s) { return Idx{perms[x][s]}; })});
  auto skel = std::make_shared<const FiniteGroupoid>(FiniteGroupoid(std::vector<ActionBlock>{FiniteGroupoid::make_block(
      s3, 3, [&](Idx x, Idx s) { return Idx{perms[x][s]}; })}));
  // Inclusion of the stabilizer of point 2 ({e, (01)}) as a skeleton.
  auto z2 = bg(cyclic(2));
  GroupoidFunctor skeleton_incl(z2, orbit, [](int, Idx) { return Obj{0, 2}; },
                                [](int, Idx x, Idx) { return x == 0 ? Idx{0} : Idx{1}; });
  CHECK(skeleton_incl.validate().empty());
  CHECK(is_equivalence(skeleton_incl).ok);
  // Composition with the skeleton inclusion keeps the verdict.
  CHECK(is_equivalence(compose(GroupoidFunctor::identity(orbit), skeleton_incl)).ok);

  auto d2 = std::make_shared<const FiniteGroupoid>(FiniteGroupoid::discrete(2));
  auto d3 = std::make_shared<const FiniteGroupoid>(FiniteGroupoid::discrete(3));
  GroupoidFunctor miss(d2, d3, [](int b, Idx) { return Obj{b, 0}; }, [](int, Idx, Idx) { return Idx{0}; });
  auto v = is_equivalence(miss);
  CHECK_FALSE(v.ok);
  CHECK(v.witness.find("missed") != std::string::npos);
}

TEST_CASE("linearization") {
  auto g = bg(symmetric3());
  auto p = pt();
  auto to_pt = GroupoidFunctor::to_point(g, p);
  auto phi = LinFunction::delta(g, 0);
  CHECK(lin_pushforward(to_pt, phi).at(0) == Rational(1, 6));
  auto c = LinFunction::delta(p, 0, Rational(3, 2));
  CHECK(lin_pullback(to_pt, c).at(0) == Rational(3, 2));
  CHECK(lin_pullback(GroupoidFunctor::identity(g), phi) == phi);

  // Pushforward of ones to a point is the cardinality.
  auto orbit = std::make_shared<const FiniteGroupoid>(FiniteGroupoid::discrete(4));
  CHECK(lin_pushforward(GroupoidFunctor::to_point(orbit, p), LinFunction::ones(orbit)).at(0) == 4);

  // Discrete pushforward sums fibres.
  auto d4 = std::make_shared<const FiniteGroupoid>(FiniteGroupoid::discrete(4));
  auto d2 = std::make_shared<const FiniteGroupoid>(FiniteGroupoid::discrete(2));
  GroupoidFunctor half(d4, d2, [](int b, Idx) { return Obj{b / 2, 0}; }, [](int, Idx, Idx) { return Idx{0}; });
  LinFunction f{d4, {{0, 1}, {1, 2}, {2, 5}}};
  auto pushed = lin_pushforward(half, f);
  CHECK(pushed.at(0) == 3);
  CHECK(pushed.at(1) == 5);
}

TEST_CASE("Beck-Chevalley on random action groupoids") {
  std::mt19937 rng(11);
  auto z2 = cyclic(2);
  auto z3 = cyclic(3);
  auto prod = FiniteGroup::product(z2, z3);
  for (int trial = 0; trial < 20; ++trial) {
    // Use simple building blocks: BZ_6 -> BZ_2 and BZ_3 -> BZ_2 (trivial) over BZ_2.
    auto bz6 = bg(prod);
    auto bz2 = bg(z2);
    auto bz3 = bg(z3);
    GroupoidFunctor f(bz6, bz2, [](int, Idx) { return Obj{0, 0}; }, [](int, Idx x, Idx) { return x % 2; });
    GroupoidFunctor gg(bz3, bz2, [](int, Idx) { return Obj{0, 0}; }, [](int, Idx, Idx) { return Idx{0}; });
    auto pb = homotopy_pullback(f, gg);
    LinFunction phi{bz6, {{0, Rational(static_cast<long>(rng() % 5 + 1), 1)}}};
    // g^* f_* phi = (proj_b)_* (proj_a)^* phi
    auto lhs = lin_pullback(gg, lin_pushforward(f, phi));
    auto rhs = lin_pushforward(pb.proj_b, lin_pullback(pb.proj_a, phi));
    CHECK(lhs == rhs);
  }
}

TEST_CASE("nerve of a group is 2-Segal, unital and 1-Segal") {
  auto mul = [](int a, int b) { return (a + b) % 3; };
  auto x = nerve_of_group(3, mul, 3);
  CHECK(x.check_identities().empty());
  CHECK(check_2segal(x, 3).pass);
  CHECK(check_unital(x, 3).pass);
  CHECK(check_1segal(x, 3).pass);
  CHECK(check_unital(x, 1).squares.empty());
  CHECK_THROWS_AS(check_2segal(x, 4), InputError);
}

TEST_CASE("json round trip") {
  auto g = bg(symmetric3());
  auto j = to_json(*g);
  auto back = groupoid_from_json(nlohmann::json::parse(j.dump()));
  CHECK(groupoid_cardinality(back) == Rational(1, 6));
  CHECK(back.num_components() == 1);
}
