#pragma once

#include <stdexcept>
#include <string>

namespace tempo {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Scheduler misuse.
struct SchedulingInPast : Error {
    using Error::Error;
};

// Distribution construction and sampling.
struct InvalidDistribution : Error {
    using Error::Error;
};
struct EmptySample : Error {
    using Error::Error;
};

// Channel queries that have no closed form for the given channel kind.
struct Unsupported : Error {
    using Error::Error;
};

// Protocol configuration.
struct InvalidSplit : Error {
    using Error::Error;
};
struct InvalidK : Error {
    using Error::Error;
};

// Pipeline composition.
struct MergedNotDominant : Error {
    using Error::Error;
};

// Metric preconditions.
struct NoDeliveries : Error {
    using Error::Error;
};
struct InsufficientDeliveries : Error {
    using Error::Error;
};
struct NoQueriesInWindow : Error {
    using Error::Error;
};
struct NoClosedLoops : Error {
    using Error::Error;
};

// Federated simulation.
struct NoParticipants : Error {
    using Error::Error;
};
struct InvalidStep : Error {
    using Error::Error;
};
struct InsufficientGrid : Error {
    using Error::Error;
};

// Scenario handling.
struct ParseError : Error {
    using Error::Error;
};
struct ValidationError : Error {
    using Error::Error;
};
struct DuplicateSeeds : Error {
    using Error::Error;
};

}  // namespace tempo
