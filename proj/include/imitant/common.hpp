#pragma once

#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>

namespace imitant {

// All recoverable failures surface as imitant::Error; callers (CLI, trainer)
// catch it at the boundary and report the message.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

namespace detail {

template <typename... Args>
std::string format_msg(Args&&... args) {
  std::ostringstream os;
  (os << ... << args);
  return os.str();
}

}  // namespace detail

template <typename... Args>
[[noreturn]] void fail(Args&&... args) {
  throw Error(detail::format_msg(std::forward<Args>(args)...));
}

}  // namespace imitant

#define IMITANT_CHECK(cond, ...)                                      \
  do {                                                                \
    if (!(cond)) {                                                    \
      ::imitant::fail("check failed: ", #cond, ": ", __VA_ARGS__);    \
    }                                                                 \
  } while (0)
