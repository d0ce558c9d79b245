#include "landau/parallel.hpp"

#include <cstdlib>
#include <string>

namespace landau {

int worker_count() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  if (const char* env = std::getenv("LANDAU_TORUS_THREADS")) {
    try {
      const int cap = std::stoi(env);
      if (cap >= 1 && cap < hw) return cap;
    } catch (...) {
      // unparsable cap: ignore
    }
  }
  return hw;
}

}  // namespace landau
