#pragma once

#include <functional>
#include <string>

namespace warpstab {

// Non-fatal diagnostics (e.g. a support clamped away from a singular origin).
// Default handler writes "warning: ..." to stderr.
using WarningHandler = std::function<void(const std::string&)>;
void set_warning_handler(WarningHandler handler);
void warn(const std::string& message);

}  // namespace warpstab
