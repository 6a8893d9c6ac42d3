#include "xeval/diagnostics.hpp"

#include <iostream>
#include <mutex>

#include "xeval/error.hpp"

namespace xeval {

ParseError::ParseError(const std::string& message, std::size_t line, std::size_t column)
    : DataError("line " + std::to_string(line) +
                (column ? ", column " + std::to_string(column) : std::string()) + ": " +
                message),
      line_(line),
      column_(column) {}

namespace {

std::mutex& handler_mutex() {
  static std::mutex m;
  return m;
}

WarningHandler& current_handler() {
  static WarningHandler handler = [](std::string_view msg) {
    std::cerr << "warning: " << msg << '\n';
  };
  return handler;
}

}  // namespace

WarningHandler set_warning_handler(WarningHandler handler) {
  std::lock_guard lock(handler_mutex());
  WarningHandler previous = std::move(current_handler());
  current_handler() = std::move(handler);
  return previous;
}

void warn(std::string_view message) {
  std::lock_guard lock(handler_mutex());
  if (current_handler()) current_handler()(message);
}

ScopedWarningCapture::ScopedWarningCapture() {
  previous_ = set_warning_handler(
      [this](std::string_view msg) { messages_.emplace_back(msg); });
}

ScopedWarningCapture::~ScopedWarningCapture() { set_warning_handler(std::move(previous_)); }

}  // namespace xeval
