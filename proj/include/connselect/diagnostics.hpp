#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace connselect {

/// Malformed input or configuration. The CLI maps this to exit code 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Failure inside a numerical routine (non-convergence, loss of definiteness,
/// non-finite values). The CLI maps this to exit code 2.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using WarningHandler = std::function<void(std::string_view)>;

/// Emits a warning through the installed handler (stderr by default).
/// Safe to call from worker threads.
void warn(std::string_view message);

/// Installs a new handler and returns the previous one.
WarningHandler set_warning_handler(WarningHandler handler);

/// Restores the previous handler on destruction; collects warnings in tests.
class ScopedWarningCapture {
 public:
  ScopedWarningCapture();
  ~ScopedWarningCapture();
  ScopedWarningCapture(const ScopedWarningCapture&) = delete;
  ScopedWarningCapture& operator=(const ScopedWarningCapture&) = delete;

  const std::vector<std::string>& messages() const { return messages_; }
  bool contains(std::string_view needle) const;

 private:
  WarningHandler previous_;
  std::vector<std::string> messages_;
};

}  // namespace connselect
