#pragma once

#include <functional>
#include <string>

namespace ksmi {

using WarningSink = std::function<void(const std::string&)>;

// Non-fatal diagnostics go through here; the default sink writes
// "warning: <msg>" to stderr. Returns the previous sink.
WarningSink set_warning_sink(WarningSink sink);
void warn(const std::string& message);

}  // namespace ksmi
