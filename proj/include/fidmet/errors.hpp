#pragma once

#include <stdexcept>
#include <string>

namespace fidmet {

// Base class for every error thrown by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Input fails a domain invariant (hermiticity, trace, positivity, norm, ...).
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error(what) {}
};

// Operands have incompatible or unsupported dimensions.
class DimensionError : public Error {
public:
    explicit DimensionError(const std::string& what) : Error(what) {}
};

} // namespace fidmet
