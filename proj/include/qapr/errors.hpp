// SPDX-License-Identifier: MIT

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qapr {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define QAPR_DEFINE_ERROR(Name)                 \
    class Name : public Error {                 \
    public:                                     \
        using Error::Error;                     \
    }

// circuit
QAPR_DEFINE_ERROR(IndexError);
QAPR_DEFINE_ERROR(UnsupportedGate);
QAPR_DEFINE_ERROR(DisjointnessViolation);

// device
QAPR_DEFINE_ERROR(InvalidShape);
QAPR_DEFINE_ERROR(InvalidSize);
QAPR_DEFINE_ERROR(InvalidDevice);
QAPR_DEFINE_ERROR(DisconnectedDevice);

// qap / env
QAPR_DEFINE_ERROR(ShapeMismatch);
QAPR_DEFINE_ERROR(InvalidMapping);
QAPR_DEFINE_ERROR(QubitCountExceedsDevice);
QAPR_DEFINE_ERROR(IllegalAction);
QAPR_DEFINE_ERROR(EpisodeFinished);
QAPR_DEFINE_ERROR(ConfigError);

// nn
QAPR_DEFINE_ERROR(NonSymmetricFlow);
QAPR_DEFINE_ERROR(SingularNormalization);
QAPR_DEFINE_ERROR(NonFinite);

// bench
QAPR_DEFINE_ERROR(EmptyInput);
QAPR_DEFINE_ERROR(IOError);

#undef QAPR_DEFINE_ERROR

/// Malformed circuit source. Carries the 1-based line number of the offending statement.
class SyntaxError : public Error {
public:
    SyntaxError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

} // namespace qapr
