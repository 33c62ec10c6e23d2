#include "seisbed/warnings.hpp"

#include <cstdio>
#include <mutex>
#include <utility>

namespace seisbed {

namespace {
std::mutex g_mutex;
WarnHandler g_handler;
}  // namespace

void warn(const std::string& msg) {
  std::lock_guard<std::mutex> lock(g_mutex);
  if (g_handler) {
    g_handler(msg);
  } else {
    std::fprintf(stderr, "warning: %s\n", msg.c_str());
  }
}

WarnHandler set_warn_handler(WarnHandler handler) {
  std::lock_guard<std::mutex> lock(g_mutex);
  std::swap(g_handler, handler);
  return handler;
}

}  // namespace seisbed
