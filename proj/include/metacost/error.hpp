#pragma once
#include <stdexcept>

namespace metacost {

// Error families map onto the CLI exit codes:
// validation -> 1, I/O -> 2, numerical -> 3.
struct validation_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct numerical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace metacost
