#pragma once

#include <stdexcept>
#include <string>

namespace mcausal {

// Two points or a point and a tangent vector live on different manifolds.
struct KindMismatchError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A point, tangent vector, weight vector, or dataset violates its invariants.
struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// log_map / parallel_transport asked for a point at or beyond the cut locus.
struct CutLocusError : std::domain_error {
    using std::domain_error::domain_error;
};

// An estimator cannot be formed (e.g. a stratum with no treated units).
struct EstimationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Matching could not produce a usable result.
struct MatchingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Input files are malformed or inconsistent.
struct IngestError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A generated replicate ended up with an empty treated or control cell.
struct DegenerateReplicateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace mcausal
