#ifndef BLQ_ERRORS_HPP
#define BLQ_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace blq {

/// Base class for all blq failures.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed or inconsistent input data: bad file magic, truncated payload,
/// shape-chain failures, unknown names. CLI maps this to exit code 2.
class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(what) {}
};

/// Numeric failure at runtime: non-finite intermediate values, code
/// overflow. CLI maps this to exit code 3.
class NumericError : public Error {
public:
    explicit NumericError(const std::string& what) : Error(what) {}
};

} // namespace blq

#endif // BLQ_ERRORS_HPP
