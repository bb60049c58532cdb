#include "semo/parallel.hpp"

#include <cmath>

#include "semo/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace semo {
namespace {
int g_threads = 0;
}

void set_threads(int n) {
  g_threads = n;
#ifdef _OPENMP
  omp_set_num_threads(n > 0 ? n : omp_get_num_procs());
#endif
}

int thread_count() {
#ifdef _OPENMP
  return g_threads > 0 ? g_threads : omp_get_max_threads();
#else
  return 1;
#endif
}

double SplitMix::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(2.0 * M_PI * u2);
  has_spare_ = true;
  return r * std::cos(2.0 * M_PI * u2);
}

}  // namespace semo
