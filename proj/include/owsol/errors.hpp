#pragma once

#include <stdexcept>
#include <string>

namespace owsol {

// Exit-code contract for the CLI: ConfigError -> 2, IoError -> 3.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ShapeMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UnknownCategory : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UnknownClass : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct EmptyClass : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct TooFewPoints : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct RangeInvalid : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DegenerateNorm : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct LengthMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct MissingPrediction : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct EmptyComponent : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// Thrown when code asks for the label of a sample outside the labeled set.
struct LabelAccessDenied : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace owsol
