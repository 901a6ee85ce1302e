#pragma once

#include <stdexcept>
#include <string>

namespace tln {

// Base class for everything this library throws.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Dimension mismatch between operands; message names both shapes.
struct shape_error : error {
    using error::error;
};

// Numeric values violate a precondition (non-finite entries, zero variance).
struct value_error : error {
    using error::error;
};

// Invalid or inconsistent configuration (shape chains, window bounds, fractions).
struct config_error : error {
    using error::error;
};

// Input data problems: CSV schema, timestamp ordering, unparseable rows.
struct data_error : error {
    using error::error;
};

// Malformed serialized artifacts (model files, sweep configs).
struct parse_error : error {
    using error::error;
};

// Filesystem failures.
struct io_error : error {
    using error::error;
};

// Divergence or non-finite gradients during training.
struct training_error : error {
    using error::error;
};

// Rank-deficient system rejected in strict mode.
struct singular_error : error {
    using error::error;
};

// Index outside the valid range; message names the index and the bound.
struct range_error : error {
    using error::error;
};

} // namespace tln
