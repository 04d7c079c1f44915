#pragma once

#include <stdexcept>
#include <string>

namespace ropewarp {

// Error taxonomy shared across the library:
//   IoError        filesystem open/read/write failures
//   FormatError    malformed container (bad magic, version, dtype, header)
//   TruncatedError payload shorter than the header promises
//   ShapeError     dimension or extent mismatch
//   ValueError     domain violation (non-finite input, bad parameter, ...)
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class FormatError : public Error {
public:
    using Error::Error;
};

class TruncatedError : public FormatError {
public:
    using FormatError::FormatError;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class ValueError : public Error {
public:
    using Error::Error;
};

}  // namespace ropewarp
