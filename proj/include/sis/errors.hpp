#pragma once

#include <stdexcept>
#include <string>

namespace sis {

// Caller violated a precondition (bad coordinates, invalid CSST, ...).
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A file or record could not be parsed or has the wrong schema.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Candidate set does not realize any populated CSST.
class NoFeasiblePair : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A grasp point fell outside the garment mask.
class GraspMiss : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace sis
