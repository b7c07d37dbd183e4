#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace repdl {

enum class ErrorCode {
    EmptyOccupancy,
    DuplicateReplicaOnServer,
    IdOutOfRange,
    AlreadyDownloaded,
    NonUniformDesign,
    EmptyDesign,
    NotPrime,
    InvalidParams,
    CapacityMismatch,
    ServerUseless,
    FragmentAlreadyDownloaded,
    TooManyFragments,
    EmptyProfile,
    ParseError,
    SchemaVersionUnsupported,
    ValidationFailed,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::EmptyOccupancy: return "EmptyOccupancy";
    case ErrorCode::DuplicateReplicaOnServer: return "DuplicateReplicaOnServer";
    case ErrorCode::IdOutOfRange: return "IdOutOfRange";
    case ErrorCode::AlreadyDownloaded: return "AlreadyDownloaded";
    case ErrorCode::NonUniformDesign: return "NonUniformDesign";
    case ErrorCode::EmptyDesign: return "EmptyDesign";
    case ErrorCode::NotPrime: return "NotPrime";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::CapacityMismatch: return "CapacityMismatch";
    case ErrorCode::ServerUseless: return "ServerUseless";
    case ErrorCode::FragmentAlreadyDownloaded: return "FragmentAlreadyDownloaded";
    case ErrorCode::TooManyFragments: return "TooManyFragments";
    case ErrorCode::EmptyProfile: return "EmptyProfile";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::SchemaVersionUnsupported: return "SchemaVersionUnsupported";
    case ErrorCode::ValidationFailed: return "ValidationFailed";
    }
    return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

namespace detail {
[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }
} // namespace detail

} // namespace repdl
