#include "fft.hpp"

namespace lfpp::detail {

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

int next_smooth_size(int n) {
  for (int candidate = std::max(n, 1);; ++candidate) {
    int r = candidate;
    for (int p : {2, 3, 5, 7})
      while (r % p == 0) r /= p;
    if (r == 1) return candidate;
  }
}

}  // namespace lfpp::detail
