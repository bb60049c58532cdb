#pragma once

#include <functional>
#include <string_view>

namespace semo {

using LogHandler = std::function<void(std::string_view)>;

void warn(std::string_view message);
void info(std::string_view message);

// Handlers are process-global; passing an empty function restores stderr output.
void set_warning_handler(LogHandler handler);
void set_info_handler(LogHandler handler);

}  // namespace semo
