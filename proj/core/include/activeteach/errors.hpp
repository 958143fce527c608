#pragma once

#include <stdexcept>
#include <string>

namespace activeteach {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Recall was requested for an item that has never been presented.
class UnseenItemError : public Error {
public:
    explicit UnseenItemError(const std::string& what) : Error("unseen item: " + what) {}
};

class TimeOrderError : public Error {
public:
    explicit TimeOrderError(const std::string& what) : Error("time went backwards: " + what) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error("configuration error: " + what) {}
};

/// Operation not valid for the belief bank's model kind.
class ModeError : public Error {
public:
    explicit ModeError(const std::string& what) : Error("mode error: " + what) {}
};

class DegeneratePosteriorError : public Error {
public:
    explicit DegeneratePosteriorError(const std::string& what)
        : Error("degenerate posterior: " + what) {}
};

}  // namespace activeteach
