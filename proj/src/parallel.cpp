#include "lqwidth/parallel.hpp"

#include <cstdlib>
#include <string>

namespace lqwidth {

namespace {
std::atomic<std::size_t> g_override{0};
}

std::size_t default_workers() {
  if (std::size_t w = g_override.load()) return w;
  if (const char* env = std::getenv("LQWIDTH_WORKERS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<std::size_t>(v);
    } catch (...) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void set_default_workers(std::size_t workers) { g_override = workers; }

}  // namespace lqwidth
