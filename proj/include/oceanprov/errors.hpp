#ifndef OCEANPROV_ERRORS_HPP
#define OCEANPROV_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace oceanprov {

// Malformed or inconsistent input data: unparseable files, schema
// violations, mismatched lengths, unsatisfied data preconditions.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// A computation that is undefined for the given configuration of points,
// e.g. a validity index over clusters of duplicated points, an elbow of a
// constant curve, or registration of a rank-deficient cloud.
class DegeneracyError : public std::runtime_error {
public:
    explicit DegeneracyError(const std::string& msg) : std::runtime_error(msg) {}
};

}

#endif
