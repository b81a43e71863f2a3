#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace motionforge {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
    using Error::Error;
};

struct InvalidSystem : Error {
    using Error::Error;
};

// Malformed user input (files, names, flags).
struct InputError : Error {
    using Error::Error;
};

struct RandomizationError : Error {
    using Error::Error;
};

struct RankChange : Error {
    using Error::Error;
};

struct NoAcceleration : Error {
    using Error::Error;
};

struct StuckAtSingularity : Error {
    using Error::Error;
};

struct PreconditionError : Error {
    using Error::Error;
};

struct PathFailure : Error {
    PathFailure(const std::string& what, Eigen::VectorXd last_x, Eigen::VectorXd last_lambda, double last_t)
        : Error(what), x(std::move(last_x)), lambda(std::move(last_lambda)), t(last_t)
    {
    }
    Eigen::VectorXd x;
    Eigen::VectorXd lambda;
    double t;
};

// A tracked point left the component of the original constraint set.
struct ComponentEscape : Error {
    using Error::Error;
};

}  // namespace motionforge
