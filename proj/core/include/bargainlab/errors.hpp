#pragma once

#include <stdexcept>
#include <string>

namespace bargainlab {

// Input data violated a schema rule or a precondition that the caller
// could have checked (bad CSV row, invariant breach, bad config value).
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// An estimator could not produce a usable result: singular design,
// non-convergence, perfect separation, failed recovery chain.
class EstimationError : public std::runtime_error {
public:
    explicit EstimationError(const std::string& what) : std::runtime_error(what) {}
};

// Filesystem-level failure (missing file, unwritable output).
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace bargainlab
