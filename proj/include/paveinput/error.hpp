#pragma once

#include <stdexcept>
#include <string>

namespace paveinput {

// Bad input data, malformed files, violated preconditions.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Divergence or non-finite values produced by a numerical routine.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw DataError(msg);
}

} // namespace paveinput
