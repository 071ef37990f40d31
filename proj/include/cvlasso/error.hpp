#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cvlasso {

enum class Errc {
    EmptyData,
    ConstantColumn,
    DimensionMismatch,
    DegenerateSplit,
    BadK,
    ParseError,
    IoError,
    RankDeficient,
    ZeroTSS,
    EpsilonTooLarge,
    NonPositiveRatio,
    ZeroMeanLoss,
    TooLargeS,
    ZeroRestrictedEigenvalue,
    RegimeMismatch,
    InvalidArgument,
};

std::string_view to_string(Errc code) noexcept;

/// Base exception for every failure raised by the library.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

class ConstantColumnError : public Error {
public:
    explicit ConstantColumnError(long column)
        : Error(Errc::ConstantColumn, "column " + std::to_string(column) + " has zero variance"),
          column_(column) {}

    /// Zero-based covariate index, or -1 for the response.
    long column() const noexcept { return column_; }

private:
    long column_;
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, std::size_t column, const std::string& what)
        : Error(Errc::ParseError,
                "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
          line_(line), column_(column) {}

    // 1-based, as an editor would show them.
    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

} // namespace cvlasso
