#pragma once
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "hall/groupoid.hpp"

namespace hall {

using FunctorPtr = std::shared_ptr<const GroupoidFunctor>;

// Levels X_0..X_N (N <= 4) with face and degeneracy functors. Maps X_n -> X_I for a
// subset I of [n] come from restrict(); by default they compose face maps.
class TruncatedSimplicialGroupoid {
 public:
  static constexpr int kMaxLevel = 4;
  using RestrictFn = std::function<GroupoidFunctor(int n, const std::vector<int>& subset)>;
  using DegenFn = std::function<GroupoidFunctor(int n, int i)>;

  TruncatedSimplicialGroupoid(std::vector<GroupoidPtr> levels, RestrictFn restrict_fn, DegenFn degen_fn);
  // Faces given explicitly: faces[n][i] : X_n -> X_{n-1}, degens[n][i] : X_n -> X_{n+1}.
  static TruncatedSimplicialGroupoid from_faces(std::vector<GroupoidPtr> levels,
                                                std::vector<std::vector<FunctorPtr>> faces,
                                                std::vector<std::vector<FunctorPtr>> degens);

  int top() const { return static_cast<int>(levels_.size()) - 1; }
  const GroupoidPtr& level(int n) const;
  FunctorPtr face(int n, int i) const;
  FunctorPtr degeneracy(int n, int i) const;
  // X_n -> X_{|subset|-1}, subset strictly increasing in [0, n].
  FunctorPtr restrict(int n, const std::vector<int>& subset) const;

  // Verifies the simplicial identities on stored levels, comparing objects up to isomorphism.
  std::string check_identities() const;

 private:
  std::vector<GroupoidPtr> levels_;
  RestrictFn restrict_fn_;
  DegenFn degen_fn_;
  mutable std::mutex mu_;
  mutable std::map<std::pair<int, std::vector<int>>, FunctorPtr> restrict_cache_;
  mutable std::map<std::pair<int, int>, FunctorPtr> degen_cache_;
};

using SimplicialPtr = std::shared_ptr<const TruncatedSimplicialGroupoid>;

// Levelwise functors F_n : Y_n -> X_n.
struct SimplicialMap {
  SimplicialPtr source, target;
  std::vector<FunctorPtr> levels;
};

struct SquareResult {
  std::string kind;
  int n = 0, i = 0, j = 0;
  bool pass = false;
  std::string witness;
};

struct Report {
  std::string name;
  bool pass = true;
  std::vector<SquareResult> squares;

  void add(SquareResult r);
  nlohmann::ordered_json to_json() const;
};

// Is X ~ A x^h_C B for the strictly commuting square f p = g q?
Verdict check_cartesian(const GroupoidFunctor& p, const GroupoidFunctor& q, const GroupoidFunctor& f,
                        const GroupoidFunctor& g);

Report check_2segal(const TruncatedSimplicialGroupoid& x, int n_max);
Report check_unital(const TruncatedSimplicialGroupoid& x, int n_max);
Report check_1segal(const TruncatedSimplicialGroupoid& x, int n_max);
Report check_culf(const SimplicialMap& f, int n_max);
Report check_ikeo(const SimplicialMap& f, int n_max);
Report check_relative_2segal(const SimplicialMap& f, int n_max);

// Nerve of a finite group as a simplicial set (discrete levels); it is 1-Segal.
TruncatedSimplicialGroupoid nerve_of_group(int order, const std::function<int(int, int)>& mul, int top);

nlohmann::ordered_json to_json(const FiniteGroupoid& g);
FiniteGroupoid groupoid_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const GroupoidFunctor& f);

}  // namespace hall
