#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace afzp {

/// Every failure the library reports by exception carries one of these codes.
/// The names are part of the CLI contract: they are printed verbatim.
enum class ErrorCode {
    DivisionByZero,
    ContextMismatch,
    UnsupportedOrder,
    ShapeMismatch,
    NotOrderP,
    MultisetMismatch,
    Inconsistent,
    InvalidSystem,
    NonScalarHolonomy,
    TwistNotRootOfUnity,
    TwistRootOutsideField,
    NonDiagonalizableWithinField,
    NormalizationOutsideField,
    NotAnAutomorphism,
    SystemMismatch,
    NotEquivariant,
    NonIntegralMultiplicity,
    PairCheckFailed,
    CaseShapeViolation,
    PackingInfeasible,
    KDataMismatch,
    NonDiagonalCommutant,
    UnitaryNotFoundInField,
    InvalidTower,
    ReindexFailed,
    LiftFailed,
    CorrectionFailed,
    ParseError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// One failed identity inside a report-style check.
struct Violation {
    std::string where;     // block, orbit, stage or matrix unit
    std::string identity;  // the identity that failed, e.g. "alpha^p = id"
    std::string detail;

    bool operator==(const Violation&) const = default;
};

/// Result of report-style operations (validate, hom_validate, check_pair, verify).
struct Report {
    std::vector<Violation> violations;
    std::vector<std::string> notes;

    bool ok() const noexcept { return violations.empty(); }
    void fail(std::string where, std::string identity, std::string detail = {}) {
        violations.push_back({std::move(where), std::move(identity), std::move(detail)});
    }
    void merge(const Report& other, const std::string& prefix = {});
    std::string to_text() const;
};

}  // namespace afzp
