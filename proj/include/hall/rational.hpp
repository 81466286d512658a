#pragma once
#include <gmpxx.h>
#include <string>

namespace hall {

using Rational = mpq_class;
using BigInt = mpz_class;

// "p/q" for non-integers, "p" otherwise.
inline std::string to_string(const Rational& r) {
  Rational c = r;
  c.canonicalize();
  if (c.get_den() == 1) return c.get_num().get_str();
  return c.get_num().get_str() + "/" + c.get_den().get_str();
}

inline std::string to_string(const BigInt& z) { return z.get_str(); }

}  // namespace hall
