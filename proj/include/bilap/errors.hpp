#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace bilap {

// Raised for inputs outside an operation's contract (exit code 2 in the CLI).
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Base for failures of a numerical procedure (exit code 3 in the CLI).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class QuadratureError : public NumericalError {
public:
    QuadratureError(const std::string& what, double best, double error_estimate)
        : NumericalError(what), best_(best), error_(error_estimate) {}
    double best() const { return best_; }
    double error_estimate() const { return error_; }

private:
    double best_;
    double error_;
};

class ConvergenceError : public NumericalError {
public:
    ConvergenceError(const std::string& what, std::vector<double> best_iterate = {})
        : NumericalError(what), best_(std::move(best_iterate)) {}
    const std::vector<double>& best_iterate() const { return best_; }

private:
    std::vector<double> best_;
};

}  // namespace bilap
