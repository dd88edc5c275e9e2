#pragma once

#include <functional>
#include <string>

namespace fluxrelax {

using WarningHandler = std::function<void(const std::string&)>;

/// Installs the sink for non-fatal warnings and returns the previous one.
/// The default handler writes to stderr. Passing an empty handler silences warnings.
WarningHandler set_warning_handler(WarningHandler handler);

void warn(const std::string& message);

}  // namespace fluxrelax
