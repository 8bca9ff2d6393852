#include "gbcm/parallel.hpp"

#include <cstdlib>
#include <string>

namespace gbcm {

int default_thread_count() {
  const char* env = std::getenv("GBCM_THREADS");
  if (!env) return 1;
  try {
    int n = std::stoi(env);
    return n > 0 ? n : 1;
  } catch (...) {
    return 1;
  }
}

}  // namespace gbcm
