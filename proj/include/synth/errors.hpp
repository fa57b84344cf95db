#pragma once
#include <stdexcept>
#include <string>

namespace synth {

// Config/domain errors map to process exit codes in the CLI front end:
// config_error -> 2, solver_error -> 3, infeasible_error -> 4, io_error -> 5.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct solver_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct infeasible_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace synth
