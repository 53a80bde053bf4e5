#pragma once

#include <stdexcept>
#include <string>

namespace nilbs {

// A 4x4 transform whose determinant magnitude is below the singularity
// threshold cannot be inverted.
struct SingularTransform : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A convex combination of bone transforms collapsed to a non-invertible
// matrix (e.g. equal-weight opposing rotations).
struct SingularBlend : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A network activation became NaN or infinite during a forward pass.
struct NonFiniteActivation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The training loss became non-finite.
struct DivergedTraining : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Unparseable or inconsistent configuration / input data.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Filesystem read/write failure, message carries the path.
struct IoFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Grid resolution below the 2x2 minimum.
struct InvalidResolution : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Index outside a dataset's valid range.
struct IndexOutOfRange : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace nilbs
