#pragma once

#include <stdexcept>
#include <string>

namespace bavardage {

// Every failure raised by the library carries a short machine-readable code
// (e.g. "length_mismatch", "non_finite") next to the human message.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

// Raised while loading or validating a feature bundle; `field` names the
// manifest key, row/column or file that violated the format.
class BundleError : public Error {
 public:
  BundleError(std::string code, std::string field, const std::string& message)
      : Error(std::move(code), message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace bavardage
