#pragma once

#include <stdexcept>
#include <string>

namespace compidx {

enum class ErrorKind {
    schema,             // malformed header or document structure
    validation,         // a value violates a data invariant
    argument,           // caller passed an out-of-range or inconsistent argument
    bounds,             // min-max bounds with max <= min
    insufficient_data,  // too few present values to compute a statistic
    degenerate,         // zero spread where a spread is required
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::schema: return "schema error";
        case ErrorKind::validation: return "validation error";
        case ErrorKind::argument: return "argument error";
        case ErrorKind::bounds: return "bounds error";
        case ErrorKind::insufficient_data: return "insufficient data";
        case ErrorKind::degenerate: return "degenerate data";
    }
    return "error";
}

/// Errors raised by every compidx operation. The kind separates bad input
/// (schema/validation/argument/bounds) from computations that cannot proceed
/// on otherwise valid input (insufficient_data/degenerate).
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message),
          kind_(kind),
          message_(message) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }
    /// The message without the kind prefix.
    [[nodiscard]] const std::string& message() const noexcept { return message_; }

    [[nodiscard]] bool is_input_error() const noexcept {
        return kind_ == ErrorKind::schema || kind_ == ErrorKind::validation ||
               kind_ == ErrorKind::argument || kind_ == ErrorKind::bounds;
    }

private:
    ErrorKind kind_;
    std::string message_;
};

}  // namespace compidx
