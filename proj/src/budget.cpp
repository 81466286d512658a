#include "hall/budget.hpp"
#include <algorithm>

namespace hall {
namespace {
std::atomic<std::uint64_t> g_limit{~0ULL};
std::atomic<std::uint64_t> g_used{0};
std::atomic<int> g_jobs{1};
}  // namespace

void Budget::set_limit(std::uint64_t limit) { g_limit = limit; }
std::uint64_t Budget::limit() { return g_limit; }
std::uint64_t Budget::used() { return g_used; }
void Budget::reset() { g_used = 0; }

void Budget::charge(std::uint64_t units, const char* what) {
  std::uint64_t now = g_used.fetch_add(units) + units;
  if (now > g_limit)
    throw ResourceError(std::string("enumeration budget exceeded while computing ") + what);
}

void set_jobs(int jobs) { g_jobs = jobs < 1 ? 1 : jobs; }
int jobs() { return g_jobs; }

}  // namespace hall

#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace hall {

namespace {
thread_local bool t_in_worker = false;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  int workers = std::min<int>(jobs(), static_cast<int>(n));
  // Nested calls run inline on the worker that issued them.
  if (workers <= 1 || t_in_worker) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      t_in_worker = true;
      while (true) {
        std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!error) error = std::current_exception();
          next = n;
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace hall
