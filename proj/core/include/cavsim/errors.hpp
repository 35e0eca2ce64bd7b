#pragma once

#include <stdexcept>
#include <string>

namespace cavsim {

/// A parameter fails its documented precondition.
class invalid_parameter : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Two operators or states do not live on the same product space.
class space_mismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical solver failed to produce a result within its contract.
class solver_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Step-size underflow in an ODE integration.
class stiffness_error : public solver_error {
public:
    using solver_error::solver_error;
};

/// The Liouvillian null space is not one-dimensional.
class degenerate_steady_state : public solver_error {
public:
    using solver_error::solver_error;
};

/// An adiabatic-elimination validity ratio is >= 1.
class model_invalid : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace cavsim
