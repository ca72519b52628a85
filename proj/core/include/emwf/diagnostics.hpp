#pragma once

#include <functional>
#include <string>

namespace emwf {

using WarningHandler = std::function<void(const std::string&)>;

// Routes non-fatal numerical warnings (boundary leak, coarse stride, ...).
// The default handler writes to std::clog.
void warn(const std::string& message);

// Installs a handler and returns the previous one. Not meant to be called
// concurrently with running computations.
WarningHandler set_warning_handler(WarningHandler handler);

}  // namespace emwf
