#include "ieval/parallel.hpp"

#include <omp.h>

#include <cstdlib>
#include <string>

#include "ieval/errors.hpp"

namespace ieval {

int resolve_thread_count(std::optional<int> requested) {
  if (requested) {
    if (*requested < 0) throw Error(ErrorCode::InvalidConfig, "thread count must be >= 0");
    return *requested;
  }
  if (const char* env = std::getenv(kThreadsEnv); env != nullptr && *env != '\0') {
    try {
      std::size_t used = 0;
      const int n = std::stoi(env, &used);
      if (used == std::string(env).size() && n >= 0) return n;
    } catch (const std::exception&) {
    }
    throw Error(ErrorCode::InvalidConfig, std::string(kThreadsEnv) + " must be a non-negative integer");
  }
  return 0;
}

void set_thread_count(int threads) {
  if (threads > 0) omp_set_num_threads(threads);
}

int max_threads() { return omp_get_max_threads(); }

}  // namespace ieval
