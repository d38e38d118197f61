#pragma once

#include <stdexcept>
#include <string>

namespace fcont {

/// Raised when an argument violates an operation's preconditions.
class InvalidInput : public std::invalid_argument {
public:
    explicit InvalidInput(const std::string& what) : std::invalid_argument(what) {}
};

/// Raised when a field carries no variation the operation can work with
/// (identically zero ensembles, zero natural function, zero norm of tau).
class DegenerateField : public std::runtime_error {
public:
    explicit DegenerateField(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool cond, const std::string& what) {
    if (!cond) throw InvalidInput(what);
}

}  // namespace fcont
