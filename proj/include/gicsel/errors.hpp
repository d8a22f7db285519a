#ifndef GICSEL_ERRORS_HPP
#define GICSEL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace gicsel {

// Problems with user-supplied data (files, response values, constant columns).
struct data_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Numerical failures (non-convergence of an internal optimizer, vacuous bounds).
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace gicsel

#endif
