#include "sncnet/threading.hpp"

#include <atomic>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace sncnet {

namespace {
std::atomic<int> g_max_threads{0}; // 0 = follow the machine
}

void set_max_threads(int n) { g_max_threads.store(n > 0 ? n : 0); }

int max_threads() {
  const int n = g_max_threads.load();
  if (n > 0) return n;
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

} // namespace sncnet
