#pragma once
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "hall/instance.hpp"
#include "hall/simplicial.hpp"

namespace hall {

// Full subcategory given by a condition on sizes; it must be closed under isomorphism.
using SizeFilter = std::function<bool(const SizeKey&)>;
// Extra condition on objects, applied to every subquotient of a flag; it must be closed under isomorphism.
using ObjectFilter = std::function<bool(const Rep&)>;

// Truncated Waldhausen construction. X_n has objects (V, 0 = U_0 <= U_1 <= ... <= U_n = V)
// with V of size <= cap, acted on by Aut(V); one block per size profile of the flag.
// X_n -> X_I charts the subquotient U_max(I) / U_min(I).
class SConstruction {
 public:
  struct Flag {
    Rep top;
    std::vector<Sub> chain;  // U_0 .. U_n
  };
  struct Block {
    std::vector<SizeKey> profile;  // sizes of U_1 .. U_n
    std::vector<Flag> flags;
    std::unordered_map<std::string, Idx> index;
  };

  SConstruction(InstancePtr inst, SizeKey cap, int n_max, SizeFilter allowed = {}, ObjectFilter objects = {});

  const InstancePtr& instance() const;
  const SizeKey& cap() const;
  int top() const;
  const SimplicialPtr& simplicial() const { return simplicial_; }
  const std::vector<Block>& blocks(int n) const;
  // Object of X_n holding the given flag; nullopt if it is not in this construction.
  std::optional<Obj> locate(int n, const Flag& flag) const;
  // Component of X_1 holding the object with this iso key.
  Idx component_of_key(const std::string& key) const;
  std::string key_of_component(Idx comp) const;

 private:
  struct Data;
  std::shared_ptr<Data> data_;
  SimplicialPtr simplicial_;
};

using SConstructionPtr = std::shared_ptr<const SConstruction>;

SConstructionPtr s_construction(InstancePtr inst, const SizeKey& cap, int n_max, SizeFilter allowed = {},
                                ObjectFilter objects = {});

// Levelwise inclusion of the construction over a full subcategory into the ambient one.
SimplicialMap inclusion_map(const SConstructionPtr& sub, const SConstructionPtr& full);

// Copy of x whose level n carries a second copy of block b; faces of the copy agree with the original.
TruncatedSimplicialGroupoid with_duplicated_block(const SimplicialPtr& x, int n, int b);

}  // namespace hall
