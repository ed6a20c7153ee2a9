#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace vcei {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// A sample set stores one observation per row.
using SampleSet = Matrix;

enum class Direction { XtoY, YtoX };

std::string_view to_string(Direction d);
Direction parse_direction(std::string_view text);
Direction opposite(Direction d);

/// Independent child seed for a named stream (splitmix64 of base and stream).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UsageError : public Error {
public:
    using Error::Error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class MalformedFileError : public Error {
public:
    MalformedFileError(const std::string& what, std::size_t row)
        : Error(what), row_(row) {}
    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

class InsufficientDataError : public Error {
public:
    using Error::Error;
};

class DegenerateSampleError : public Error {
public:
    using Error::Error;
};

class InfeasibleBoundError : public Error {
public:
    using Error::Error;
};

class SolverError : public Error {
public:
    using Error::Error;
};

class InsufficientSupportError : public Error {
public:
    using Error::Error;
};

class FactorizationError : public Error {
public:
    using Error::Error;
};

class PipelineError : public Error {
public:
    using Error::Error;
};

}  // namespace vcei
