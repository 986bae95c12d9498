#pragma once

#include <stdexcept>
#include <string>

namespace sqz {

/// Bad input: violated invariant, malformed file, unknown key. CLI exit code 1.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A computation that could not finish: divergence, no guided mode,
/// iteration limit. CLI exit code 2.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& what) {
    if (!ok) throw ValidationError(what);
}

} // namespace sqz
