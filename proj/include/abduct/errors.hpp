#ifndef ABDUCT_ERRORS_HPP
#define ABDUCT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace abduct {

// Each category maps to one CLI exit code (1, 2, 3 respectively).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class StatsError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

enum class StoreErrorKind { BadMagic, UnsupportedVersion, BadHeader, Truncated, CountMismatch, NonFinite, Invariant };

class StoreFormatError : public DataError {
 public:
  StoreFormatError(StoreErrorKind kind, const std::string& what) : DataError(what), kind_(kind) {}
  StoreErrorKind kind() const noexcept { return kind_; }

 private:
  StoreErrorKind kind_;
};

}  // namespace abduct

#endif  // ABDUCT_ERRORS_HPP
