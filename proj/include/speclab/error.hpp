#pragma once

#include <stdexcept>
#include <string>

namespace speclab {

/// Error categories. The CLI maps each category to a distinct exit code,
/// so library code should pick the narrowest one that applies.
enum class ErrorCode {
    Usage = 2,      // bad argument or configuration value
    Io = 3,         // file missing, unreadable, unwritable
    Format = 4,     // malformed file content
    Dimension = 5,  // shape mismatch between inputs
    Numeric = 6,    // computation failed (singular matrix, non-finite loss)
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

}  // namespace speclab
