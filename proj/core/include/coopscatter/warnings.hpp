#pragma once

#include <functional>
#include <string>
#include <string_view>

namespace coop {

/// Receives non-fatal diagnostics (singular Lamb shifts, large optical
/// thickness, integrator fallbacks). The default sink writes
/// "coopscatter: warning: <message>" to stderr.
using WarningSink = std::function<void(std::string_view)>;

/// Replace the process-wide sink; returns the previous one. Passing an empty
/// function restores the default.
WarningSink set_warning_sink(WarningSink sink);

/// Thread-safe; messages from concurrent callers are delivered one at a time.
void warn(std::string_view message);

}  // namespace coop
