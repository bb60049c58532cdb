#include "semo/log.hpp"

#include <iostream>
#include <mutex>
#include <string>

namespace semo {
namespace {

std::mutex& log_mutex() {
  static std::mutex m;
  return m;
}
LogHandler& warning_handler() {
  static LogHandler h;
  return h;
}
LogHandler& info_handler() {
  static LogHandler h;
  return h;
}

}  // namespace

void warn(std::string_view message) {
  std::lock_guard lock(log_mutex());
  if (auto& h = warning_handler()) {
    h(message);
  } else {
    std::cerr << "warning: " << message << '\n';
  }
}

void info(std::string_view message) {
  std::lock_guard lock(log_mutex());
  if (auto& h = info_handler()) {
    h(message);
  } else {
    std::cerr << message << '\n';
  }
}

void set_warning_handler(LogHandler handler) {
  std::lock_guard lock(log_mutex());
  warning_handler() = std::move(handler);
}

void set_info_handler(LogHandler handler) {
  std::lock_guard lock(log_mutex());
  info_handler() = std::move(handler);
}

}  // namespace semo
