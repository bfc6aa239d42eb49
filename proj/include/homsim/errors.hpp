#pragma once

#include <stdexcept>
#include <string>

namespace homsim {

// Base class for everything homsim throws on purpose.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A configuration value violates its documented constraints.
struct ConfigError : Error {
    using Error::Error;
};

// An argument violates an operation precondition (dimension mismatch,
// negative time, unsorted input, ...).
struct InvalidInput : Error {
    using Error::Error;
};

// The Liouvillian kernel is more than one-dimensional; there is no unique
// steady state to return.
struct DegenerateSteadyState : Error {
    using Error::Error;
};

// The requested correlation has zero emission rate behind it.
struct NoSignal : Error {
    using Error::Error;
};

// Contrast is undefined because the orthogonal-polarization reference is
// not positive.
struct UndefinedContrast : Error {
    using Error::Error;
};

// A time-tag file failed structural validation.  `offset` is the byte
// position of the first bad record.
struct FormatError : Error {
    explicit FormatError(const std::string& what, std::size_t offset_bytes)
        : Error(what + " (byte offset " + std::to_string(offset_bytes) + ")"),
          offset(offset_bytes) {}
    std::size_t offset;
};

// A histogram was requested on empty input or zero duration.
struct NoData : Error {
    using Error::Error;
};

// A file could not be opened, read, or written.
struct IoError : Error {
    using Error::Error;
};

}  // namespace homsim
