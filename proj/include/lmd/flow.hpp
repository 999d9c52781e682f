#pragma once

#include <cmath>
#include <concepts>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace lmd {

/// f(a) = sigma * a^gamma with sigma = +/-1, gamma >= 0. An inert drive has
/// f == 0 regardless of (sigma, gamma).
struct PowerLawDrive {
    int sigma = -1;
    double gamma = 0.0;
    bool inert = false;

    /// Validates sigma in {-1, +1} and gamma >= 0.
    static PowerLawDrive make(int sigma, double gamma);
    static PowerLawDrive zero() { return PowerLawDrive{1, 0.0, true}; }

    double operator()(double a) const {
        return inert ? 0.0 : static_cast<double>(sigma) * std::pow(a, gamma);
    }
    /// 3/2 - gamma, the exponent governing the closed-form flow.
    double flow_exponent() const { return 1.5 - gamma; }
    /// True when the local-time flow leaves (0, inf) at a finite level.
    bool finite_exit() const { return !inert && sigma * flow_exponent() < 0.0; }
};

/// Which ODE the local-time flow integrates.
enum class FlowLaw {
    sde_consistent,  // y' = f(y) / sqrt(2 y)
    unscaled,        // y' = f(y)
};

enum class FlowStatus { alive, exhausted_low, exhausted_high };

struct FlowResult {
    FlowStatus status = FlowStatus::alive;
    double value = 0.0;  // meaningful only when alive

    bool alive() const { return status == FlowStatus::alive; }
};

/// Guards defining numerical exit of a flow started at a0.
inline constexpr double kLowGuard = 1e-12;
inline constexpr double kHighGuard = 1e12;

/// Local-time level l* at which the power-law flow from a0 leaves (0, inf);
/// +inf when sigma (3/2 - gamma) >= 0.
template <std::floating_point Scalar = double>
Scalar blowup_threshold(const PowerLawDrive& drive, Scalar a0) {
    if (!(a0 > Scalar(0))) throw std::invalid_argument("blowup_threshold: a0 must be > 0");
    if (!drive.finite_exit()) return std::numeric_limits<Scalar>::infinity();
    const Scalar k = static_cast<Scalar>(drive.flow_exponent());
    return std::numbers::sqrt2_v<Scalar> * std::pow(a0, k) /
           (static_cast<Scalar>(drive.sigma) * -k);
}

/// Closed-form flow of y' = f(y) / sqrt(2 y) from a0 over local time l.
template <std::floating_point Scalar = double>
FlowResult phi_power(const PowerLawDrive& drive, Scalar a0, Scalar l) {
    if (!(a0 > Scalar(0))) throw std::invalid_argument("phi_power: a0 must be > 0");
    if (!(l >= Scalar(0))) throw std::invalid_argument("phi_power: l must be >= 0");
    if (drive.inert || l == Scalar(0)) return {FlowStatus::alive, static_cast<double>(a0)};
    const Scalar sigma = static_cast<Scalar>(drive.sigma);
    const Scalar k = static_cast<Scalar>(drive.flow_exponent());
    if (k == Scalar(0)) {
        const Scalar v = a0 * std::exp(sigma * l / std::numbers::sqrt2_v<Scalar>);
        return {FlowStatus::alive, static_cast<double>(v)};
    }
    if (l >= blowup_threshold(drive, a0)) {
        return {drive.sigma < 0 ? FlowStatus::exhausted_low : FlowStatus::exhausted_high, 0.0};
    }
    const Scalar base = std::pow(a0, k) + sigma * k * l / std::numbers::sqrt2_v<Scalar>;
    return {FlowStatus::alive, static_cast<double>(std::pow(base, Scalar(1) / k))};
}

using ScalarFunction = std::function<double(double)>;

/// Right-hand side of the chosen flow law for a given drive.
ScalarFunction flow_rhs(ScalarFunction f, FlowLaw law);

/// Adaptive Dormand-Prince 5(4) integration of y' = f(y) / sqrt(2 y) from a0
/// over local-time span l, relative local error <= tol. Exit below
/// kLowGuard * a0 or above kHighGuard * a0 is reported as exhausted.
/// Throws NumericalGuardError on a non-finite f evaluation.
FlowResult flow_general(const ScalarFunction& f, double a0, double l, double tol,
                        FlowLaw law = FlowLaw::sde_consistent);

struct EulerFlowResult {
    FlowStatus status = FlowStatus::alive;
    double value = 0.0;
    std::size_t steps = 0;  // steps actually taken before stopping
};

/// y_{k+1} = y_k + delta * f(y_k) for n steps, stopping early once y leaves
/// (kLowGuard * y0, kHighGuard * y0).
EulerFlowResult euler_flow(const ScalarFunction& f, double delta, std::size_t n_steps, double y0);

}  // namespace lmd
