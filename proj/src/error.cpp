#include "relrep/error.hpp"

namespace relrep {

std::string_view error_code_name(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ZeroNormVector: return "ZeroNormVector";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::DisconnectedGraph: return "DisconnectedGraph";
    case ErrorCode::BadK: return "BadK";
    case ErrorCode::BadIndex: return "BadIndex";
    case ErrorCode::TooManyAnchors: return "TooManyAnchors";
    case ErrorCode::DuplicateKind: return "DuplicateKind";
    case ErrorCode::BadLabel: return "BadLabel";
    case ErrorCode::MissingCache: return "MissingCache";
    case ErrorCode::BadShape: return "BadShape";
    case ErrorCode::WrongKind: return "WrongKind";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::MismatchedOperands: return "MismatchedOperands";
    case ErrorCode::ZeroEndToEnd: return "ZeroEndToEnd";
    case ErrorCode::SingularMatrix: return "SingularMatrix";
    case ErrorCode::BadDim: return "BadDim";
    case ErrorCode::BadSize: return "BadSize";
    case ErrorCode::BadConfig: return "BadConfig";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::RaggedRows: return "RaggedRows";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::UnknownName: return "UnknownName";
    }
    return "Unknown";
}

} // namespace relrep
