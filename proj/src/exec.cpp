#include "bt/exec.hpp"

#include <cstdlib>
#include <string>

namespace bt {

int worker_count() {
#ifdef _OPENMP
  int n = omp_get_max_threads();
  if (const char* env = std::getenv("BT_THREADS")) {
    try {
      const int cap = std::stoi(env);
      if (cap >= 1 && cap < n) n = cap;
    } catch (...) {
      // unparseable BT_THREADS: keep the OpenMP default
    }
  }
  return n;
#else
  return 1;
#endif
}

}  // namespace bt
