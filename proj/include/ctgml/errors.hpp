#pragma once

#include <stdexcept>
#include <string>

namespace ctgml {

// Base class for every error the toolkit throws.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Structural problems: wrong shape, wrong columns, mismatched lengths.
struct SchemaError : Error {
    using Error::Error;
};

// A cell in an input file could not be parsed.
struct ParseError : Error {
    using Error::Error;
};

// A label outside the {1, 2, 3} encoding.
struct LabelError : Error {
    using Error::Error;
};

struct ArgumentError : Error {
    using Error::Error;
};

// A stratified split would leave some class without training rows.
struct DegenerateSplitError : Error {
    using Error::Error;
};

// A class has too few samples for the requested fit.
struct DegenerateClassError : Error {
    using Error::Error;
};

struct NotPositiveDefiniteError : Error {
    using Error::Error;
};

struct NumericError : Error {
    using Error::Error;
};

struct TrainingError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

struct ConvergenceError : Error {
    double residual;
    ConvergenceError(const std::string& what, double res) : Error(what), residual(res) {}
};

}  // namespace ctgml
