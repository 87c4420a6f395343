#pragma once

#include <stdexcept>
#include <string>

namespace devoc {

enum class Errc {
    MalformedHeader,
    DimensionMismatch,
    IoFailure,
    EmptyImage,
    BoxOutOfRange,
    OutOfBounds,
    WrongDimensions,
    InconsistentInputs,
    BadDimensions,
    NonFiniteInput,
    EmptyBatch,
    LabelOutOfRange,
    EmptyDataset,
    MalformedModelFile,
    VersionMismatch,
    InsufficientData,
    BadConfig,
};

const char* to_string(Errc code);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

} // namespace devoc
