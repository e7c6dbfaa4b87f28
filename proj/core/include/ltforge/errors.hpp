#pragma once

#include <stdexcept>
#include <string>

namespace ltforge {

// Precondition violated by the caller (bad ring, bad degree, mismatched inputs).
class DomainError : public std::invalid_argument {
public:
    explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

// A configured size limit would be exceeded.
class GuardExceeded : public std::runtime_error {
public:
    explicit GuardExceeded(const std::string& what) : std::runtime_error(what) {}
};

// Something that must hold by construction did not.
class InvariantError : public std::logic_error {
public:
    explicit InvariantError(const std::string& what) : std::logic_error(what) {}
};

} // namespace ltforge
