#pragma once

#include <stdexcept>
#include <string>

namespace rescast {

enum class Errc {
    EmptySeries,
    ConstantSeries,
    OutOfRange,
    EmptyTrain,
    Parse,
    NonHourly,
    NoOverlap,
    ExcessiveGaps,
    InsufficientHistory,
    GapInWindow,
    InsufficientCoverage,
    EmptyMatrix,
    SingularSystem,
    InvalidK,
    MisalignedRegressors,
    MissingRegressors,
    EmptyTraining,
    WidthMismatch,
    EmptyGrid,
    EmptyRun,
    MixedEnergyTypes,
    GapAtLag,
    Config,
    Io,
};

inline const char* errc_name(Errc c) {
    switch (c) {
        case Errc::EmptySeries: return "EmptySeries";
        case Errc::ConstantSeries: return "ConstantSeries";
        case Errc::OutOfRange: return "OutOfRange";
        case Errc::EmptyTrain: return "EmptyTrain";
        case Errc::Parse: return "ParseError";
        case Errc::NonHourly: return "NonHourly";
        case Errc::NoOverlap: return "NoOverlap";
        case Errc::ExcessiveGaps: return "ExcessiveGaps";
        case Errc::InsufficientHistory: return "InsufficientHistory";
        case Errc::GapInWindow: return "GapInWindow";
        case Errc::InsufficientCoverage: return "InsufficientCoverage";
        case Errc::EmptyMatrix: return "EmptyMatrix";
        case Errc::SingularSystem: return "SingularSystem";
        case Errc::InvalidK: return "InvalidK";
        case Errc::MisalignedRegressors: return "MisalignedRegressors";
        case Errc::MissingRegressors: return "MissingRegressors";
        case Errc::EmptyTraining: return "EmptyTraining";
        case Errc::WidthMismatch: return "WidthMismatch";
        case Errc::EmptyGrid: return "EmptyGrid";
        case Errc::EmptyRun: return "EmptyRun";
        case Errc::MixedEnergyTypes: return "MixedEnergyTypes";
        case Errc::GapAtLag: return "GapAtLag";
        case Errc::Config: return "ConfigError";
        case Errc::Io: return "IoError";
    }
    return "Error";
}

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    Errc code() const { return code_; }

private:
    Errc code_;
};

}  // namespace rescast
