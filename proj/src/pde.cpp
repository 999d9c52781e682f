#include "lmd/pde.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "lmd/errors.hpp"

namespace lmd {

namespace {

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(17);
    s << v;
    return s.str();
}

double max_face_drive(const GridSpec& grid, const PowerLawDrive& drive) {
    double m = 0.0;
    for (std::size_t j = 0; j <= grid.na; ++j) m = std::max(m, std::abs(drive(grid.a_face(j))));
    return m;
}

}  // namespace

double GridSpec::heat_dt_bound() const { return 0.4 * dx() * dx() / a_max; }

double GridSpec::positivity_dt_bound(const PowerLawDrive& drive) const {
    const double rate = 2.0 * a_max / (dx() * dx()) + max_face_drive(*this, drive) / (dx() * da());
    return 1.0 / rate;
}

void GridSpec::validate_shape() const {
    if (!(x_max > 0.0) || !std::isfinite(x_max)) throw std::invalid_argument("GridSpec: x_max must be > 0");
    if (nx < 3 || nx % 2 == 0) throw std::invalid_argument("GridSpec: nx must be odd and >= 3 (x = 0 is a node)");
    if (!(a_min > 0.0)) throw std::invalid_argument("GridSpec: a_min must be > 0");
    if (!(a_max > a_min) || !std::isfinite(a_max)) throw std::invalid_argument("GridSpec: need a_max > a_min");
    if (na < 1) throw std::invalid_argument("GridSpec: na must be >= 1");
    if (!(t_end > 0.0) || !std::isfinite(t_end)) throw std::invalid_argument("GridSpec: t_end must be > 0");
}

void GridSpec::validate(const PowerLawDrive& drive) const {
    validate_shape();
    if (!(dt > 0.0)) throw std::invalid_argument("GridSpec: dt must be > 0");
    const double heat = heat_dt_bound();
    if (dt > heat) {
        throw std::invalid_argument("GridSpec: unstable dt = " + fmt(dt) +
                                    "; heat stability requires dt <= 0.4 dx^2 / a_max = " + fmt(heat));
    }
    const double pos = positivity_dt_bound(drive);
    if (dt > pos) {
        throw std::invalid_argument("GridSpec: unstable dt = " + fmt(dt) +
                                    "; positivity with transport requires dt <= 1 / (2 a_max / dx^2 + "
                                    "max|f| / (dx da)) = " +
                                    fmt(pos));
    }
}

double stable_dt(const GridSpec& grid, const PowerLawDrive& drive, double safety) {
    grid.validate_shape();
    if (!(safety > 0.0 && safety <= 1.0)) throw std::invalid_argument("stable_dt: safety must be in (0, 1]");
    return safety * std::min(grid.heat_dt_bound(), grid.positivity_dt_bound(drive));
}

GridSpec point_source_grid(const PowerLawDrive& drive, double a0, double x_max, std::size_t nx, std::size_t na,
                           double t_end, double a_far) {
    if (!(a0 > 0.0)) throw std::invalid_argument("point_source_grid: a0 must be > 0");
    if (na < 1) throw std::invalid_argument("point_source_grid: na must be >= 1");
    GridSpec g;
    g.x_max = x_max;
    g.nx = nx;
    g.na = na;
    g.t_end = t_end;
    const double n = static_cast<double>(na);
    if (drive.sigma > 0 && !drive.inert) {
        if (!(a_far > a0)) throw std::invalid_argument("point_source_grid: sigma = +1 needs a_far > a0");
        const double da = (a_far - a0) / n;
        g.a_min = a0 - 0.5 * da;
        g.a_max = a0 + (n - 0.5) * da;
    } else {
        const double da = a0 / n;
        g.a_min = 0.5 * da;
        g.a_max = a0 + 0.5 * da;
    }
    g.dt = stable_dt(g, drive);
    return g;
}

double DensityField::continuous_mass(const GridSpec& grid) const { return n.sum() * grid.dx() * grid.da(); }

DensityField product_field(const GridSpec& grid, const std::function<double(double)>& gx,
                           const std::function<double(double)>& ga) {
    grid.validate_shape();
    DensityField f;
    f.n.resize(static_cast<Eigen::Index>(grid.nx), static_cast<Eigen::Index>(grid.na));
    for (std::size_t j = 0; j < grid.na; ++j) {
        const double va = ga(grid.a(j));
        for (std::size_t i = 0; i < grid.nx; ++i) {
            f.n(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = gx(grid.x(i)) * va;
        }
    }
    if ((f.n < 0.0).any() || !f.n.allFinite()) {
        throw std::invalid_argument("product_field: profiles must be finite and nonnegative");
    }
    const double mass = f.continuous_mass(grid);
    if (!(mass > 0.0)) throw std::invalid_argument("product_field: zero mass");
    f.n /= mass;
    return f;
}

DensityField point_source_field(const GridSpec& grid, double a0) {
    grid.validate_shape();
    if (!(a0 >= grid.a_min && a0 <= grid.a_max)) {
        throw std::invalid_argument("point_source_field: a0 outside [a_min, a_max]");
    }
    const auto cell = std::min<std::size_t>(grid.na - 1, static_cast<std::size_t>((a0 - grid.a_min) / grid.da()));
    // Full width at half maximum of 3 dx.
    const double width = 3.0 * grid.dx() / (2.0 * std::sqrt(2.0 * std::numbers::ln2));
    return product_field(
        grid, [&](double x) { return std::exp(-0.5 * (x / width) * (x / width)); },
        [&](double a) { return std::abs(a - grid.a(cell)) < 0.5 * grid.da() ? 1.0 : 0.0; });
}

double z_function(const PowerLawDrive& drive, double a0, double x, double a) {
    if (drive.inert) throw std::invalid_argument("z_function: needs a nonzero drive");
    if (!(a0 > 0.0)) throw std::invalid_argument("z_function: a0 must be > 0");
    const bool admissible = drive.sigma < 0 ? (a <= a0 && a >= 0.0) : a >= a0;
    if (!admissible || !std::isfinite(x)) {
        throw std::invalid_argument("z_function: a on the wrong side of a0 for this sign of f");
    }
    const double k = drive.flow_exponent();
    if (a == 0.0 && (x != 0.0 || !(k > 0.0))) throw std::invalid_argument("z_function: a = 0 is not admissible here");
    const double spatial = a == 0.0 ? 0.0 : std::abs(x) / std::sqrt(a);
    const double s = static_cast<double>(drive.sigma);
    const double transport = k == 0.0 ? 2.0 * s * std::log(a / a0) : (2.0 * s / k) * (std::pow(a, k) - std::pow(a0, k));
    return spatial + transport;
}

double closed_form_density(const PowerLawDrive& drive, double a0, double t, double x, double a) {
    if (!(t > 0.0)) throw std::invalid_argument("closed_form_density: t must be > 0");
    if (!(a > 0.0)) throw std::invalid_argument("closed_form_density: a must be > 0");
    if (drive.inert) throw std::invalid_argument("closed_form_density: needs a nonzero drive");
    if (drive.sigma < 0 ? a > a0 : a < a0) return 0.0;
    const double z = z_function(drive, a0, x, a);
    return z / (std::abs(drive(a)) * std::sqrt(4.0 * std::numbers::pi * t * t * t)) * std::exp(-z * z / (4.0 * t));
}

double absorbed_mass(const PowerLawDrive& drive, double a0, double t, AbsorbedMassForm form) {
    if (!(a0 > 0.0)) throw std::invalid_argument("absorbed_mass: a0 must be > 0");
    if (!(t >= 0.0)) throw std::invalid_argument("absorbed_mass: t must be >= 0");
    if (drive.inert || drive.sigma > 0) return 0.0;
    const double k = drive.flow_exponent();
    if (!(k > 0.0)) throw std::invalid_argument("absorbed_mass: sigma = -1 requires gamma < 3/2");
    if (t == 0.0) return 0.0;
    const double big_k = std::pow(a0, k) / k;
    const double r = big_k / std::sqrt(t);
    if (form == AbsorbedMassForm::erfc) return std::erfc(r);
    // Closed form of int_0^t erfc(K / sqrt s) ds.
    return (t + 2.0 * big_k * big_k) * std::erfc(r) - 2.0 * big_k * std::sqrt(t / std::numbers::pi) * std::exp(-r * r);
}

double lp_norm(const DensityField& field, const GridSpec& grid, double p) {
    if (!(p >= 1.0)) throw std::invalid_argument("lp_norm: p must be >= 1");
    const double cell = grid.dx() * grid.da();
    if (p == 1.0) return field.n.abs().sum() * cell;
    if (p == 2.0) return std::sqrt(field.n.square().sum() * cell);
    return std::pow(field.n.abs().pow(p).sum() * cell, 1.0 / p);
}

namespace {

void check_field(const DensityField& f, const GridSpec& grid, const char* who) {
    if (f.n.rows() != static_cast<Eigen::Index>(grid.nx) || f.n.cols() != static_cast<Eigen::Index>(grid.na)) {
        throw std::invalid_argument(std::string(who) + ": field shape does not match the grid");
    }
}

void guard(const DensityField& f, std::size_t step) {
    const bool finite = f.n.allFinite() && std::isfinite(f.p) && std::isfinite(f.q);
    const double lowest = f.n.minCoeff();
    if (!finite || lowest < 0.0) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "solve_pde: " << (finite ? "negative density" : "non-finite density") << " at step " << step
            << ", t = " << f.t << ", min n = " << lowest << ", p = " << f.p << ", q = " << f.q;
        throw NumericalGuardError(msg.str());
    }
}

}  // namespace

std::vector<DensityField> solve_pde(const PowerLawDrive& drive, const DensityField& initial, const GridSpec& grid,
                                    const PdeOptions& options) {
    grid.validate(drive);
    check_field(initial, grid, "solve_pde");
    if (!initial.n.allFinite() || (initial.n < 0.0).any() || initial.p < 0.0 || initial.q < 0.0) {
        throw std::invalid_argument("solve_pde: initial field must be finite and nonnegative");
    }
    const auto steps = static_cast<std::size_t>(std::ceil(grid.t_end / grid.dt - 1e-9));
    const double dt = grid.t_end / static_cast<double>(steps);
    std::vector<std::size_t> marks;
    for (double t : options.snapshot_times) {
        if (!(t >= 0.0 && t <= grid.t_end)) throw std::invalid_argument("solve_pde: snapshot time outside [0, t_end]");
        marks.push_back(static_cast<std::size_t>(std::llround(t / dt)));
    }
    marks.push_back(0);
    marks.push_back(steps);
    std::sort(marks.begin(), marks.end());
    marks.erase(std::unique(marks.begin(), marks.end()), marks.end());

    const auto nx = static_cast<Eigen::Index>(grid.nx);
    const auto na = static_cast<Eigen::Index>(grid.na);
    const auto i0 = static_cast<Eigen::Index>(grid.centre());
    const double dx = grid.dx();
    const double transport = dt / (dx * grid.da());
    Eigen::ArrayXd heat_coef(na);
    for (Eigen::Index j = 0; j < na; ++j) heat_coef(j) = dt * grid.a(static_cast<std::size_t>(j)) / (dx * dx);
    Eigen::ArrayXd f_face(na + 1);
    for (Eigen::Index j = 0; j <= na; ++j) f_face(j) = drive(grid.a_face(static_cast<std::size_t>(j)));

    std::vector<DensityField> out;
    DensityField cur = initial;
    cur.t = 0.0;
    out.push_back(cur);
    std::size_t next_mark = 1;
    DensityField nxt = cur;
    Eigen::ArrayXd flux(na + 1);

    for (std::size_t k = 1; k <= steps; ++k) {
        for (Eigen::Index j = 0; j < na; ++j) {
            const double c = heat_coef(j);
            const double* u = cur.n.col(j).data();
            double* v = nxt.n.col(j).data();
            v[0] = u[0] + c * (u[1] - u[0]);
            for (Eigen::Index i = 1; i + 1 < nx; ++i) v[i] = u[i] + c * ((u[i - 1] + u[i + 1]) - 2.0 * u[i]);
            v[nx - 1] = u[nx - 1] + c * (u[nx - 2] - u[nx - 1]);
        }
        // Upwind fluxes at a-faces of the x = 0 column; face j sits below cell j.
        for (Eigen::Index j = 0; j <= na; ++j) {
            const double fj = f_face(j);
            if (fj > 0.0) {
                flux(j) = j > 0 ? fj * cur.n(i0, j - 1) : 0.0;
            } else if (fj < 0.0) {
                flux(j) = j < na ? fj * cur.n(i0, j) : 0.0;
            } else {
                flux(j) = 0.0;
            }
        }
        for (Eigen::Index j = 0; j < na; ++j) nxt.n(i0, j) -= transport * (flux(j + 1) - flux(j));
        nxt.p = cur.p - dt * std::min(flux(0), 0.0);
        nxt.q = cur.q + dt * std::max(flux(na), 0.0);
        nxt.t = static_cast<double>(k) * dt;
        std::swap(cur, nxt);
        guard(cur, k);
        if (options.on_step) options.on_step(cur);
        if (next_mark < marks.size() && marks[next_mark] == k) {
            out.push_back(cur);
            ++next_mark;
        }
    }
    return out;
}

double relative_l1_error(const DensityField& field, const GridSpec& grid, const PowerLawDrive& drive, double a0) {
    check_field(field, grid, "relative_l1_error");
    double diff = 0.0;
    double ref = 0.0;
    for (std::size_t j = 0; j < grid.na; ++j) {
        for (std::size_t i = 0; i < grid.nx; ++i) {
            const double exact = closed_form_density(drive, a0, field.t, grid.x(i), grid.a(j));
            diff += std::abs(field.n(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) - exact);
            ref += exact;
        }
    }
    if (!(ref > 0.0)) throw std::invalid_argument("relative_l1_error: closed form vanishes on the grid");
    return diff / ref;
}

double symmetry_defect(const DensityField& field) {
    return (field.n - field.n.colwise().reverse()).abs().maxCoeff();
}

double mass_above(const DensityField& field, const GridSpec& grid, double a0) {
    check_field(field, grid, "mass_above");
    double m = 0.0;
    for (std::size_t j = 0; j < grid.na; ++j) {
        if (grid.a(j) > a0) m += field.n.col(static_cast<Eigen::Index>(j)).sum();
    }
    return m * grid.dx() * grid.da();
}

std::string_view to_string(BlowupVerdict v) {
    switch (v) {
        case BlowupVerdict::blowup_symptom: return "blowup-symptom";
        case BlowupVerdict::global_symptom: return "global-symptom";
        case BlowupVerdict::inconclusive: return "inconclusive";
    }
    return "unknown";
}

BlowupParameters blowup_parameters(double gamma) {
    if (!(gamma >= 0.0)) throw std::invalid_argument("blowup_parameters: gamma must be >= 0");
    BlowupParameters b;
    b.m = std::clamp(std::max(0.51 - gamma + 0.05, 0.25), 1e-3, 0.49);
    b.eta = std::min(1.5 - gamma, b.m / 2.0);
    b.constraint_ok = b.m - 0.5 + gamma > 0.0;
    return b;
}

namespace {

// Least-squares slope of log(Y - Y_min) on log(t - t_min) after the minimum.
double growth_exponent(const std::vector<double>& t, const std::vector<double>& y) {
    if (y.size() < 4) return 0.0;
    const auto lo = static_cast<std::size_t>(std::min_element(y.begin(), y.end()) - y.begin());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int count = 0;
    for (std::size_t k = lo + 1; k < y.size(); ++k) {
        const double dy = y[k] - y[lo];
        const double dt = t[k] - t[lo];
        if (!(dy > 0.0) || !(dt > 0.0)) continue;
        const double lx = std::log(dt);
        const double ly = std::log(dy);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++count;
    }
    if (count < 3) return 0.0;
    const double denom = count * sxx - sx * sx;
    return denom == 0.0 ? 0.0 : (count * sxy - sx * sy) / denom;
}

}  // namespace

BlowupProbe blowup_probe(const std::vector<DensityField>& series, const GridSpec& grid, double m, double gamma) {
    BlowupProbe probe;
    probe.params = blowup_parameters(gamma);
    probe.params.m = m;
    probe.params.constraint_ok = m - 0.5 + gamma > 0.0;
    const auto i0 = static_cast<Eigen::Index>(grid.centre());
    Eigen::ArrayXd weight(static_cast<Eigen::Index>(grid.na));
    for (std::size_t j = 0; j < grid.na; ++j) weight(static_cast<Eigen::Index>(j)) = std::pow(grid.a(j), m) * grid.da();
    for (const DensityField& f : series) {
        check_field(f, grid, "blowup_probe");
        probe.times.push_back(f.t);
        probe.y_curve.push_back((f.n.row(i0).transpose() * weight).sum());
        probe.l1_curve.push_back(lp_norm(f, grid, 1.0));
        probe.l2_curve.push_back(lp_norm(f, grid, 2.0));
        probe.p_curve.push_back(f.p);
        probe.q_curve.push_back(f.q);
    }
    if (series.empty()) return probe;
    probe.y_growth_exponent = growth_exponent(probe.times, probe.y_curve);
    probe.superlinear_y = probe.y_growth_exponent > 1.0;
    const double p_max = *std::max_element(probe.p_curve.begin(), probe.p_curve.end());
    const double l2_max = *std::max_element(probe.l2_curve.begin(), probe.l2_curve.end());
    if (p_max > kAtomThreshold || probe.superlinear_y) {
        probe.verdict = BlowupVerdict::blowup_symptom;
    } else if (l2_max <= 2.0 * probe.l2_curve.front()) {
        probe.verdict = BlowupVerdict::global_symptom;
    }
    return probe;
}

double weak_form_residual(const std::vector<DensityField>& series, const GridSpec& grid, const PowerLawDrive& drive,
                          const std::vector<TestFunction>& tests) {
    if (series.empty()) return 0.0;
    const auto i0 = static_cast<Eigen::Index>(grid.centre());
    const double cell = grid.dx() * grid.da();
    double worst = 0.0;
    for (const TestFunction& tf : tests) {
        Eigen::ArrayXXd phi(grid.nx, grid.na), bulk(grid.nx, grid.na);
        Eigen::ArrayXd edge(static_cast<Eigen::Index>(grid.na));
        for (std::size_t j = 0; j < grid.na; ++j) {
            const double a = grid.a(j);
            const auto jj = static_cast<Eigen::Index>(j);
            for (std::size_t i = 0; i < grid.nx; ++i) {
                const auto ii = static_cast<Eigen::Index>(i);
                phi(ii, jj) = tf.phi(grid.x(i), a);
                bulk(ii, jj) = a * tf.phi_xx(grid.x(i), a) * cell;
            }
            edge(jj) = drive(a) * tf.phi_a(0.0, a) * grid.da();
        }
        auto rate = [&](const DensityField& f) {
            return (f.n * bulk).sum() + (f.n.row(i0).transpose() * edge).sum();
        };
        const double base = (series.front().n * phi).sum() * cell;
        double integral = 0.0;
        double prev_rate = rate(series.front());
        for (std::size_t k = 1; k < series.size(); ++k) {
            const double r = rate(series[k]);
            integral += 0.5 * (series[k].t - series[k - 1].t) * (prev_rate + r);
            prev_rate = r;
            const double lhs = (series[k].n * phi).sum() * cell - base;
            worst = std::max(worst, std::abs(lhs - integral));
        }
    }
    return worst;
}

}  // namespace lmd
