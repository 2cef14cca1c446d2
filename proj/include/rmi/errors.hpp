#pragma once

#include <stdexcept>
#include <string>

namespace rmi {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input: empty label files, mismatched lengths,
/// margins that do not describe a valid table.
class DataError : public Error {
public:
    using Error::Error;
};

/// The exact table counter would exceed its search budget.
class FeasibilityError : public Error {
public:
    using Error::Error;
};

/// A measure whose defining ratio has a zero denominator for this input.
class UndefinedMeasureError : public Error {
public:
    using Error::Error;
};

} // namespace rmi
