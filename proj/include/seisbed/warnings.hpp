#pragma once

#include <functional>
#include <string>

namespace seisbed {

using WarnHandler = std::function<void(const std::string&)>;

/// Emit a non-fatal diagnostic (snapped receivers, non-smooth start, lambda<=0, ...).
/// Default handler writes "warning: ..." to stderr.
void warn(const std::string& msg);

/// Replace the warning sink (tests capture warnings this way). Returns the old one.
WarnHandler set_warn_handler(WarnHandler handler);

}  // namespace seisbed
