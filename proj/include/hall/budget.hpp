#pragma once
#include <atomic>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace hall {

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Global enumeration counter; every expensive enumeration charges it.
class Budget {
 public:
  static void set_limit(std::uint64_t limit);
  static std::uint64_t limit();
  static std::uint64_t used();
  static void reset();
  // Throws ResourceError once the running total passes the limit.
  static void charge(std::uint64_t units, const char* what);
};

// Runs work with a fixed number of threads; 1 means inline.
void set_jobs(int jobs);
int jobs();

}  // namespace hall

#include <functional>
namespace hall {
// Calls body(i) for i in [0, n) on up to jobs() threads; rethrows the first exception.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);
}  // namespace hall
