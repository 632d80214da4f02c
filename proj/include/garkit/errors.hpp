#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace garkit {

// Base class for all library errors. Subclasses map onto the CLI exit-code
// contract: config/input errors -> 2, degenerate data -> 3, numerical -> 4.
class error : public std::runtime_error {
public:
    explicit error(const std::string& what) : std::runtime_error(what) {}
};

// Input or configuration rejected before any computation ran.
class config_error : public error {
public:
    using error::error;
};

class model_error : public config_error {
public:
    using config_error::config_error;
};

// Expression referenced a model-coupled function but no model was supplied.
class missing_model_error : public config_error {
public:
    using config_error::config_error;
};

// Data is structurally valid but statistically unusable (zero mean, empty
// sample, constant coordinate, ...).
class degenerate_error : public error {
public:
    using error::error;
};

class empty_sample_error : public degenerate_error {
public:
    empty_sample_error() : degenerate_error("sample is empty") {}
};

// Non-finite or otherwise inadmissible observation; carries the insertion
// index of the offending value.
class bad_value_error : public degenerate_error {
public:
    bad_value_error(std::size_t index, const std::string& what)
        : degenerate_error(what + " (value index " + std::to_string(index) + ")"),
          index_(index) {}

    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

// Argument outside the mathematical domain of an operation.
class domain_error : public error {
public:
    using error::error;
};

// Numerical failure while evaluating an expression or estimator.
class eval_error : public error {
public:
    using error::error;
};

class divide_by_zero_error : public eval_error {
public:
    divide_by_zero_error()
        : eval_error("division by a representation with zero constant term") {}
    using eval_error::eval_error;
};

// Monte Carlo experiment could not produce a trustworthy report.
class experiment_error : public error {
public:
    using error::error;
};

} // namespace garkit
