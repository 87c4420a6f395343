#include "devoc/error.hpp"

namespace devoc {

const char* to_string(Errc code) {
    switch (code) {
        case Errc::MalformedHeader: return "MalformedHeader";
        case Errc::DimensionMismatch: return "DimensionMismatch";
        case Errc::IoFailure: return "IoFailure";
        case Errc::EmptyImage: return "EmptyImage";
        case Errc::BoxOutOfRange: return "BoxOutOfRange";
        case Errc::OutOfBounds: return "OutOfBounds";
        case Errc::WrongDimensions: return "WrongDimensions";
        case Errc::InconsistentInputs: return "InconsistentInputs";
        case Errc::BadDimensions: return "BadDimensions";
        case Errc::NonFiniteInput: return "NonFiniteInput";
        case Errc::EmptyBatch: return "EmptyBatch";
        case Errc::LabelOutOfRange: return "LabelOutOfRange";
        case Errc::EmptyDataset: return "EmptyDataset";
        case Errc::MalformedModelFile: return "MalformedModelFile";
        case Errc::VersionMismatch: return "VersionMismatch";
        case Errc::InsufficientData: return "InsufficientData";
        case Errc::BadConfig: return "BadConfig";
    }
    return "Unknown";
}

} // namespace devoc
