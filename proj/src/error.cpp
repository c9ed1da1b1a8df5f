#include "afzp/error.hpp"

#include <sstream>

namespace afzp {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::DivisionByZero: return "DivisionByZero";
        case ErrorCode::ContextMismatch: return "ContextMismatch";
        case ErrorCode::UnsupportedOrder: return "UnsupportedOrder";
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::NotOrderP: return "NotOrderP";
        case ErrorCode::MultisetMismatch: return "MultisetMismatch";
        case ErrorCode::Inconsistent: return "Inconsistent";
        case ErrorCode::InvalidSystem: return "InvalidSystem";
        case ErrorCode::NonScalarHolonomy: return "NonScalarHolonomy";
        case ErrorCode::TwistNotRootOfUnity: return "TwistNotRootOfUnity";
        case ErrorCode::TwistRootOutsideField: return "TwistRootOutsideField";
        case ErrorCode::NonDiagonalizableWithinField: return "NonDiagonalizableWithinField";
        case ErrorCode::NormalizationOutsideField: return "NormalizationOutsideField";
        case ErrorCode::NotAnAutomorphism: return "NotAnAutomorphism";
        case ErrorCode::SystemMismatch: return "SystemMismatch";
        case ErrorCode::NotEquivariant: return "NotEquivariant";
        case ErrorCode::NonIntegralMultiplicity: return "NonIntegralMultiplicity";
        case ErrorCode::PairCheckFailed: return "PairCheckFailed";
        case ErrorCode::CaseShapeViolation: return "CaseShapeViolation";
        case ErrorCode::PackingInfeasible: return "PackingInfeasible";
        case ErrorCode::KDataMismatch: return "KDataMismatch";
        case ErrorCode::NonDiagonalCommutant: return "NonDiagonalCommutant";
        case ErrorCode::UnitaryNotFoundInField: return "UnitaryNotFoundInField";
        case ErrorCode::InvalidTower: return "InvalidTower";
        case ErrorCode::ReindexFailed: return "ReindexFailed";
        case ErrorCode::LiftFailed: return "LiftFailed";
        case ErrorCode::CorrectionFailed: return "CorrectionFailed";
        case ErrorCode::ParseError: return "ParseError";
    }
    return "Unknown";
}

void Report::merge(const Report& other, const std::string& prefix) {
    for (const auto& v : other.violations) {
        violations.push_back({prefix.empty() ? v.where : prefix + ": " + v.where, v.identity, v.detail});
    }
    for (const auto& n : other.notes) notes.push_back(prefix.empty() ? n : prefix + ": " + n);
}

std::string Report::to_text() const {
    std::ostringstream os;
    os << (ok() ? "PASS" : "FAIL") << "\n";
    for (const auto& v : violations) {
        os << "  [" << v.where << "] " << v.identity;
        if (!v.detail.empty()) os << " -- " << v.detail;
        os << "\n";
    }
    for (const auto& n : notes) os << "  note: " << n << "\n";
    return os.str();
}

}  // namespace afzp
