#pragma once

#include <stdexcept>
#include <string>

namespace pseudoshrink {

// Fixed-point / root-bracketing did not converge.
class ConvergenceError : public std::runtime_error {
public:
    explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

// A shrinkage denominator collapsed; `quantity()` names the offending term.
class DegeneracyError : public std::runtime_error {
public:
    DegeneracyError(std::string quantity, const std::string& what)
        : std::runtime_error(what), quantity_(std::move(quantity)) {}
    const std::string& quantity() const noexcept { return quantity_; }

private:
    std::string quantity_;
};

// Tuning-parameter search could not evaluate its objective anywhere.
class SearchError : public std::runtime_error {
public:
    explicit SearchError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace pseudoshrink
