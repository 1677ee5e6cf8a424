#include "lndm/parallel.hpp"

#include <cstdlib>
#include <string>

namespace lndm {

int default_threads() {
  const char* env = std::getenv("LNDM_THREADS");
  if (!env) return 1;
  try {
    const int n = std::stoi(env);
    return n > 0 ? n : 1;
  } catch (...) {
    return 1;
  }
}

}  // namespace lndm
