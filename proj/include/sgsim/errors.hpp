#pragma once

#include <stdexcept>
#include <string>

namespace sgsim {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid user input: bad field values, unknown names, violated preconditions.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Material constants that make a trap frequency imaginary (chi_rho >= 0).
class InvalidMaterial : public ConfigError {
public:
    using ConfigError::ConfigError;
};

/// A computed physical quantity breaks a hard constraint (e.g. H_c1 exceeded).
class PhysicsViolation : public Error {
public:
    using Error::Error;
};

/// The requested noise budget cannot be met.
class BoundInfeasible : public PhysicsViolation {
public:
    using PhysicsViolation::PhysicsViolation;
};

/// Internal self-consistency check failed (continuity, T* search).
class ConsistencyError : public Error {
public:
    using Error::Error;
};

class IntegrationError : public Error {
public:
    using Error::Error;
};

/// Adaptive ODE step size underflowed.
class StiffnessError : public IntegrationError {
public:
    using IntegrationError::IntegrationError;
};

/// Noise grid too coarse for the deterministic dynamics.
class ResolutionError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

/// Time grids of path, base trajectory and perturbation do not line up.
class AlignmentError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace sgsim
