#pragma once

#include <stdexcept>
#include <string>

namespace ospkit {

enum class ErrorKind {
    Dimension,      // shape mismatch between operands
    Domain,         // value outside the accepted range (NaN, r <= 0, k < 1, ...)
    Ordering,       // time arguments out of order
    Configuration,  // malformed or inconsistent user input
    Numeric,        // factorization or other numerical breakdown
    SizeGuard,      // problem too large for an exhaustive routine
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace ospkit
