#pragma once

#include <stdexcept>
#include <string>

namespace poincare {

// Library errors form a single hierarchy so the CLI can map any failure to
// a machine-readable {kind, message} pair.
struct Error : std::runtime_error {
    Error(std::string kind_, const std::string& msg)
        : std::runtime_error(msg), kind(std::move(kind_)) {}
    std::string kind;
};

struct NotInvertible : Error {
    explicit NotInvertible(const std::string& msg) : Error("NotInvertible", msg) {}
};

struct NonCoprimeModuli : Error {
    explicit NonCoprimeModuli(const std::string& msg) : Error("NonCoprimeModuli", msg) {}
};

struct ModulusMismatch : Error {
    explicit ModulusMismatch(const std::string& msg) : Error("ModulusMismatch", msg) {}
};

struct RangeExceeded : Error {
    explicit RangeExceeded(const std::string& msg) : Error("RangeExceeded", msg) {}
};

struct DominanceNotApplicable : Error {
    explicit DominanceNotApplicable(const std::string& msg) : Error("DominanceNotApplicable", msg) {}
};

struct WeightTooSmall : Error {
    explicit WeightTooSmall(const std::string& msg) : Error("WeightTooSmall", msg) {}
};

struct ToleranceUnreachable : Error {
    explicit ToleranceUnreachable(const std::string& msg) : Error("ToleranceUnreachable", msg) {}
};

struct ParityMismatch : Error {
    explicit ParityMismatch(const std::string& msg) : Error("ParityMismatch", msg) {}
};

} // namespace poincare
