#pragma once

#include <stdexcept>
#include <string>

namespace epw {

/// Input outside the domain where a formula or solver is defined.
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// A numerical method failed to converge or left its expected regime.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace epw
