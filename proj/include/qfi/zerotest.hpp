#pragma once

// Deciding whether an expression vanishes identically.
//
// Two mechanisms, combinable:
//
//  * Exact: convert to a polynomial fraction over algebraic auxiliaries
//    (see rationalize.hpp) and reduce the numerator modulo the auxiliary
//    relations.  A zero result is a proof.  A nonzero result is a proof
//    only when no auxiliaries were introduced; with auxiliaries present
//    the relation list may be incomplete (e.g. multi-angle identities),
//    so "nonzero" is inconclusive.
//  * Sampled: evaluate at pseudo-random points in double precision and
//    compare against a cancellation-aware tolerance.  A value exceeding
//    the tolerance yields a NonZero verdict with a witness point.
//
// The default strategy runs the exact test and falls back to sampling
// whenever the exact test is inconclusive.
//
// Sampling details: symbols draw from per-name ranges ([0.1, 3.0] for
// "t", otherwise [0.5, 2.0] with a random sign); opaque function nodes
// are bound to independent random constants keyed by function name.
// Points raising domain errors (log of a negative, division by zero)
// are redrawn.  The tolerance at a point is eps * (1 + scale), where
// scale sums the magnitudes of the top-level addends there, so that
// large cancellations are not misread as nonzero residue.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qfi/expr.hpp"

namespace qfi {

inline constexpr std::uint64_t kDefaultSeed = 937162211ULL;

enum class ZeroStrategy { ExactOnly, SampledOnly, ExactThenSampled };

enum class Verdict { Zero, NonZero, Unknown };

struct SampleRange {
    double lo = 0.5;
    double hi = 2.0;
    bool signed_draw = true;  // multiply by a random sign
};

struct SampleWitness {
    std::vector<std::pair<std::string, double>> assignment;  // name-sorted
    double value = 0.0;
    double scale = 0.0;
};

struct ZeroTestOptions {
    ZeroStrategy strategy = ZeroStrategy::ExactThenSampled;
    int samples = 32;
    double eps = 1e-9;
    std::uint64_t seed = kDefaultSeed;
    std::map<std::string, SampleRange> ranges;

    ZeroTestOptions() { ranges["t"] = SampleRange{0.1, 3.0, false}; }
};

struct ZeroTestResult {
    Verdict verdict = Verdict::Unknown;
    std::string method;  // "exact" or "sampled"
    std::optional<SampleWitness> witness;
};

ZeroTestResult test_zero(const Expr& e, const ZeroTestOptions& opts = {});

// Convenience: verdict == Zero under the given options.
bool is_identically_zero(const Expr& e, const ZeroTestOptions& opts = {});

}  // namespace qfi
