#pragma once

#include <stdexcept>
#include <string>

namespace lmd {

/// A numerical guard tripped during a run (NaN, negative mass, non-finite
/// right-hand side). Distinct from precondition failures, which throw
/// std::invalid_argument.
class NumericalGuardError : public std::runtime_error {
public:
    explicit NumericalGuardError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace lmd
