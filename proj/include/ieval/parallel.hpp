#pragma once

#include <optional>

namespace ieval {

inline constexpr const char* kThreadsEnv = "INSTRUMENT_EVAL_THREADS";

// Explicit request, else $INSTRUMENT_EVAL_THREADS, else 0 (runtime default).
int resolve_thread_count(std::optional<int> requested);

// Caps the OpenMP worker pool; 0 leaves the runtime default in place.
void set_thread_count(int threads);

int max_threads();

}  // namespace ieval
