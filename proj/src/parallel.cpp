#include "knudsen/parallel.hpp"

#include <cstdlib>
#include <string>

namespace knudsen {

int worker_count() {
  if (const char* env = std::getenv("KNUDSEN_THREADS")) {
    try {
      const int v = std::stoi(env);
      if (v >= 1) return v;
    } catch (...) {
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace knudsen
