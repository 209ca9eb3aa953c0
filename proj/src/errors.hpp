#pragma once

#include <stdexcept>
#include <string>

namespace capekit {

/// Error category, mirrored by CLI exit codes and the C API status values.
enum class ErrorKind {
  config = 2,   // bad options, schemas, file formats
  data = 3,     // series content violates a precondition
  numeric = 4,  // constraint violations, singular systems
};

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

private:
  ErrorKind kind_;
};

inline Error config_error(const std::string& m) { return Error(ErrorKind::config, m); }
inline Error data_error(const std::string& m) { return Error(ErrorKind::data, m); }
inline Error numeric_error(const std::string& m) { return Error(ErrorKind::numeric, m); }

}  // namespace capekit
