#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace bucmrl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct InvalidModel : std::runtime_error {
    explicit InvalidModel(const std::string& msg) : std::runtime_error(msg) {}
};

struct DimensionMismatch : std::runtime_error {
    explicit DimensionMismatch(const std::string& msg) : std::runtime_error(msg) {}
};

struct SingularKPsi : std::runtime_error {
    explicit SingularKPsi(const std::string& msg) : std::runtime_error(msg) {}
};

struct InvalidDelta : std::runtime_error {
    explicit InvalidDelta(const std::string& msg) : std::runtime_error(msg) {}
};

struct InvalidFamily : std::runtime_error {
    explicit InvalidFamily(const std::string& msg) : std::runtime_error(msg) {}
};

struct EmptyHistory : std::runtime_error {
    explicit EmptyHistory(const std::string& msg) : std::runtime_error(msg) {}
};

struct IncompleteLog : std::runtime_error {
    explicit IncompleteLog(const std::string& msg) : std::runtime_error(msg) {}
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

struct IncompatibleRuns : std::runtime_error {
    explicit IncompatibleRuns(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace bucmrl
