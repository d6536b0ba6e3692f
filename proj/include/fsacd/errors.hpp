#pragma once

#include <stdexcept>
#include <string>

namespace fsacd {

// Shape disagreement between operands (message names both shapes).
struct DimensionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid configuration value (even conv window, tau <= 0, unknown key, ...).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input file; message carries the line number where known.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Episode sampling cannot satisfy the requested N/K/M counts.
struct SamplingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// API contract violation: non-scalar backward, missing grad, all-masked softmax.
struct ContractError : std::logic_error {
    using std::logic_error::logic_error;
};

// Numeric failure during training (NaN loss); message names epoch/episode/seed.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace fsacd
