#pragma once

#include <stdexcept>
#include <string>

namespace conflow {

enum class ErrorKind {
  invalid_argument,
  grid_mismatch,
  positivity_lost,     // "state outside positive cone"
  f_domain_violation,  // S left the declared domain of f
  parabolicity_lost,   // f' >= 0 somewhere on the current S range
  not_homogeneous,
  io,
  config,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace conflow
