#pragma once

#include <stdexcept>
#include <string>

namespace reqconflict {

// Maps one-to-one onto the CLI exit codes (1, 2, 3).
enum class ErrorKind { Validation = 1, Config = 2, Runtime = 3 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error validation_error(const std::string& what) { return Error(ErrorKind::Validation, what); }
inline Error config_error(const std::string& what) { return Error(ErrorKind::Config, what); }
inline Error runtime_error(const std::string& what) { return Error(ErrorKind::Runtime, what); }

}  // namespace reqconflict
