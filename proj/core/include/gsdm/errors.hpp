#pragma once

#include <stdexcept>
#include <string>

namespace gsdm {

// Violated operation precondition (bad shapes, out-of-range arguments).
struct precondition_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Iterative routine failed to reach its tolerance.
struct convergence_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed file content (datasets, checkpoints, configs).
struct format_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Numerical blow-up during training or sampling; carries context such as
// the step index or the last checkpoint written.
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace gsdm
