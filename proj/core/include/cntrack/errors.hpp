#pragma once

#include <stdexcept>
#include <string>

namespace cntrack {

// I/O failures carry a machine-checkable kind plus the offending path.
class IoError : public std::runtime_error {
public:
    enum class Kind {
        MissingDirectory,
        NoFrames,
        DimensionMismatch,
        BadImage,
        BadGroundTruth,
        WriteFailure,
    };

    IoError(Kind kind, std::string path, const std::string& detail)
        : std::runtime_error(detail + " (" + path + ")"),
          kind_(kind),
          path_(std::move(path)) {}

    Kind kind() const { return kind_; }
    const std::string& path() const { return path_; }

private:
    Kind kind_;
    std::string path_;
};

// Contract violations on module inputs (bad dimensions, invalid parameters).
class ContractError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// MeanShift iteration with no positive kernel support under the window.
class EmptySupportError : public std::runtime_error {
public:
    EmptySupportError() : std::runtime_error("empty kernel support") {}
};

}  // namespace cntrack
