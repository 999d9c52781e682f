#pragma once

#include <cstddef>
#include <functional>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "lmd/flow.hpp"

namespace lmd {

/// Tensor grid for the density n(x, a). x nodes are (i - i0) dx with
/// i0 = (nx - 1) / 2, dx = 2 x_max / (nx - 1); each node owns a cell of width
/// dx. The a axis has na cells of width (a_max - a_min) / na with centres
/// a_min + (j + 1/2) da.
struct GridSpec {
    double x_max = 8.0;
    std::size_t nx = 401;
    double a_min = 0.0025;
    double a_max = 1.0025;
    std::size_t na = 200;
    double dt = 1e-4;
    double t_end = 1.0;

    double dx() const { return 2.0 * x_max / static_cast<double>(nx - 1); }
    double da() const { return (a_max - a_min) / static_cast<double>(na); }
    std::size_t centre() const { return (nx - 1) / 2; }
    double x(std::size_t i) const {
        return (static_cast<double>(i) - static_cast<double>(centre())) * dx();
    }
    double a(std::size_t j) const { return a_min + (static_cast<double>(j) + 0.5) * da(); }
    double a_face(std::size_t j) const { return a_min + static_cast<double>(j) * da(); }

    /// 0.4 dx^2 / a_max.
    double heat_dt_bound() const;
    /// Largest dt keeping every update a convex combination:
    /// 1 / (2 a_max / dx^2 + max|f| / (dx da)).
    double positivity_dt_bound(const PowerLawDrive& drive) const;
    /// Shape checks only (no dt): nx odd >= 3, 0 < a_min < a_max, na >= 1, ...
    void validate_shape() const;
    /// Shape checks plus both dt bounds; the message quotes the bound.
    void validate(const PowerLawDrive& drive) const;
};

/// min(heat, positivity) bound times `safety`.
double stable_dt(const GridSpec& grid, const PowerLawDrive& drive, double safety = 0.9);

/// Grid whose top (sigma = -1) or bottom (sigma = +1) a-cell is centred on a0.
/// sigma = -1: da = a0 / na, cells cover (da / 2, a0 + da / 2).
/// sigma = +1: da = (a_far - a0) / na, cells start at a0 - da / 2.
/// dt is set by stable_dt.
GridSpec point_source_grid(const PowerLawDrive& drive, double a0, double x_max, std::size_t nx, std::size_t na,
                           double t_end, double a_far = 0.0);

/// n on cell centres, column j is the a_j slice; p and q are the atoms at
/// (0, 0) and (0, inf).
struct DensityField {
    Eigen::ArrayXXd n;
    double p = 0.0;
    double q = 0.0;
    double t = 0.0;

    double continuous_mass(const GridSpec& grid) const;
    double total_mass(const GridSpec& grid) const { return continuous_mass(grid) + p + q; }
};

/// Unit-mass product field gx(x) ga(a) sampled at cell centres.
DensityField product_field(const GridSpec& grid, const std::function<double(double)>& gx,
                           const std::function<double(double)>& ga);

/// Mollified point mass at (0, a0): Gaussian with full width at half maximum
/// 3 dx in x times the a-cell containing a0, unit mass.
DensityField point_source_field(const GridSpec& grid, double a0);

/// Z(x, a) = |x| / sqrt(a) + 2 int_{a0}^{a} sqrt(a') / f(a') da'.
/// Requires a <= a0 for sigma = -1, a >= a0 for sigma = +1 (a = 0 allowed for
/// sigma = -1 with gamma < 3/2).
double z_function(const PowerLawDrive& drive, double a0, double x, double a);

/// Explicit density for the point source at (0, a0); zero on the far side of
/// a0. Throws for t <= 0 or a <= 0.
double closed_form_density(const PowerLawDrive& drive, double a0, double t, double x, double a);

enum class AbsorbedMassForm {
    erfc,           // erfc(K / sqrt t)
    time_integrated,  // int_0^t erfc(K / sqrt s) ds; exceeds 1 for large t
};

/// Atom at (0, 0) for the point source. K = a0^{3/2-gamma} / (3/2 - gamma).
/// sigma = +1 returns 0. Throws for sigma = -1 with gamma >= 3/2.
double absorbed_mass(const PowerLawDrive& drive, double a0, double t,
                     AbsorbedMassForm form = AbsorbedMassForm::erfc);

/// (sum |n|^p dx da)^{1/p}; atoms excluded. Throws for p < 1.
double lp_norm(const DensityField& field, const GridSpec& grid, double p);

struct PdeOptions {
    std::vector<double> snapshot_times;  // rounded to the step grid; 0 and t_end always included
    /// Called after every step with the current field.
    std::function<void(const DensityField&)> on_step;
};

/// Explicit finite-volume solver. Heat step a dxx n per a-slice with zero-flux
/// outer faces; at the x = 0 column, upwind transport -d_a(f n) / dx whose
/// outflow through a_min feeds p and through a_max feeds q. The step count is
/// ceil(t_end / dt) with dt shrunk to fit exactly.
///
/// Throws std::invalid_argument when the grid is unstable for the drive or
/// the initial field is negative or has the wrong shape, and
/// NumericalGuardError if a NaN or negative density appears.
std::vector<DensityField> solve_pde(const PowerLawDrive& drive, const DensityField& initial, const GridSpec& grid,
                                    const PdeOptions& options = {});

/// sum |n - n_cf| / sum n_cf over cell centres, n_cf = closed_form_density.
double relative_l1_error(const DensityField& field, const GridSpec& grid, const PowerLawDrive& drive, double a0);

/// max_{i,j} |n(x_i, a_j) - n(-x_i, a_j)|.
double symmetry_defect(const DensityField& field);

/// Mass in cells with centre above `a0`.
double mass_above(const DensityField& field, const GridSpec& grid, double a0);

enum class BlowupVerdict { blowup_symptom, global_symptom, inconclusive };

std::string_view to_string(BlowupVerdict v);

struct BlowupParameters {
    double m = 0.25;
    double eta = 0.125;
    bool constraint_ok = true;  // M - 1/2 + gamma > 0
};

/// M = max(0.56 - gamma, 0.25) clipped to (0, 0.49], eta = min(3/2 - gamma, M / 2).
BlowupParameters blowup_parameters(double gamma);

struct BlowupProbe {
    BlowupParameters params;
    std::vector<double> times;
    std::vector<double> y_curve;   // Y(t) = sum_j a_j^M n(t, 0, a_j) da
    std::vector<double> l1_curve;
    std::vector<double> l2_curve;
    std::vector<double> p_curve;
    std::vector<double> q_curve;
    double y_growth_exponent = 0.0;  // see superlinear_y
    bool superlinear_y = false;
    BlowupVerdict verdict = BlowupVerdict::inconclusive;
};

inline constexpr double kAtomThreshold = 1e-6;

/// Curves and verdict from a snapshot series. Blow-up symptom: p > 1e-6 at
/// some time or super-linear growth of Y; global symptom: sup L2 <= 2 L2(0)
/// and p <= 1e-6 throughout. Super-linear growth is a least-squares slope
/// above 1 of log(Y(t) - Y(t0)) against log(t - t0) over the snapshots after
/// t0, the time of the minimum of Y. These are finite-grid symptoms, not
/// certificates about the continuum equation.
BlowupProbe blowup_probe(const std::vector<DensityField>& series, const GridSpec& grid, double m, double gamma);

/// Test function with its derivatives (phi, phi_x, phi_xx, phi_a).
struct TestFunction {
    std::function<double(double, double)> phi;
    std::function<double(double, double)> phi_xx;
    std::function<double(double, double)> phi_a;
};

/// Largest |int int u(t) phi - int int u0 phi - int_0^t [int int a u phi_xx
/// + int f(a) u(s, 0, a) phi_a(0, a)] ds| over snapshots and test functions
/// (the weak form after moving both x-derivatives onto phi); time integrals
/// use the trapezoid rule over the snapshot times.
double weak_form_residual(const std::vector<DensityField>& series, const GridSpec& grid, const PowerLawDrive& drive,
                          const std::vector<TestFunction>& tests);

}  // namespace lmd
