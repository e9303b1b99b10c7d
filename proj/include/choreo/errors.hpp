#pragma once

#include <stdexcept>
#include <string>

namespace choreo {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

// Two bodies came closer than the configured collision threshold.
class CollisionError : public Error {
public:
    using Error::Error;
};

class MaxStepsExceeded : public Error {
public:
    using Error::Error;
};

class ZeroEnergy : public Error {
public:
    using Error::Error;
};

class DegenerateSeries : public Error {
public:
    using Error::Error;
};

class OutOfRange : public Error {
public:
    using Error::Error;
};

class RankDeficient : public Error {
public:
    using Error::Error;
};

class NotPeriodic : public Error {
public:
    using Error::Error;
};

class NoConvergence : public Error {
public:
    using Error::Error;
};

class UnitCountMismatch : public Error {
public:
    using Error::Error;
};

class VerificationFailed : public Error {
public:
    using Error::Error;
};

class VerificationMismatch : public Error {
public:
    using Error::Error;
};

class DegenerateSyzygy : public Error {
public:
    using Error::Error;
};

class EmptyWord : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace choreo
