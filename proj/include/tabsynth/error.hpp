#ifndef TABSYNTH_ERROR_HPP
#define TABSYNTH_ERROR_HPP

#include <stdexcept>
#include <string>

namespace tabsynth {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// file could not be opened / read / written
struct IoError : Error {
    using Error::Error;
};

// structurally malformed input (ragged CSV rows, bad JSON, ...)
struct FormatError : Error {
    using Error::Error;
};

// input present but empty where content is required
struct EmptyInputError : Error {
    using Error::Error;
};

// two tables / a model and a table disagree on schema
struct SchemaError : Error {
    using Error::Error;
};

// caller violated an operation's contract (sizes, ranges, ...)
struct ContractError : Error {
    using Error::Error;
};

}  // namespace tabsynth

#endif
