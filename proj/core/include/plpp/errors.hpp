#pragma once

#include <stdexcept>
#include <string>

namespace plpp {

// Shape disagreement between operands.
struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A caller-supplied value is outside its documented range.
struct ParameterError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Input is structurally valid but mathematically unusable (e.g. zero-norm row).
struct DegenerateInputError : std::domain_error {
    using std::domain_error::domain_error;
};

// An internal contract was violated (non-distribution input, non-finite loss, ...).
struct ContractError : std::logic_error {
    using std::logic_error::logic_error;
};

// File could not be read, written, or parsed.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace plpp
