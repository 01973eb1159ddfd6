#pragma once

#include <stdexcept>
#include <string>

namespace salab {

enum class ErrorCode {
    InvalidArgument,
    DimensionMismatch,
    NotHurwitz,
    Singular,
    MissingFixedPoint,
    DegenerateRegion,
    ZeroBase,
    UnsupportedNoise,
    UnavailableMoment,
    Config,
    Io,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

inline const char* to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotHurwitz: return "NotHurwitz";
    case ErrorCode::Singular: return "Singular";
    case ErrorCode::MissingFixedPoint: return "MissingFixedPoint";
    case ErrorCode::DegenerateRegion: return "DegenerateRegion";
    case ErrorCode::ZeroBase: return "ZeroBase";
    case ErrorCode::UnsupportedNoise: return "UnsupportedNoise";
    case ErrorCode::UnavailableMoment: return "UnavailableMoment";
    case ErrorCode::Config: return "Config";
    case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

} // namespace salab
