#include "breather/quantization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "breather/analytic.hpp"
#include "breather/errors.hpp"
#include "breather/special_functions.hpp"

namespace breather {

namespace {

constexpr Complex kI{0.0, 1.0};
constexpr double kPi = std::numbers::pi;

Complex cis(double theta) { return {std::cos(theta), std::sin(theta)}; }

double j0(double x) { return spherical_bessel(0, x); }

// Pairwise sum of j0(sqrt(3) r_k) over image indices [lo, hi).
double image_sum(long lo, long hi, double xi, double perp2, double gamma, double d) {
    if (hi - lo <= 8) {
        double s = 0.0;
        for (long k = lo; k < hi; ++k) {
            const double along = gamma * (xi - static_cast<double>(k) * d);
            s += j0(kBreatherK * std::sqrt(along * along + perp2));
        }
        return s;
    }
    const long mid = lo + (hi - lo) / 2;
    return image_sum(lo, mid, xi, perp2, gamma, d) + image_sum(mid, hi, xi, perp2, gamma, d);
}

void check_shell(const TrainSpec& spec, double E, double p) {
    if (!(E > 0.0) || std::abs(E * E - p * p - 1.0) > 1e-12 * E * E) {
        throw InvalidInput("train_action: (E, p) is off the mass shell");
    }
    if (std::abs(p / E - spec.v) > 1e-12) throw InvalidInput("train_action: p / E does not match the train velocity");
}

Complex log_argument(const TrainSpec& spec, const SpacetimePoint& pt, double theta) {
    return 1.0 + spec.alpha * cis(theta) * train_sum(spec, pt);
}

double wrap_angle(double a) {
    a = std::remainder(a, 2.0 * kPi);  // [-pi, pi]
    return a == -kPi ? kPi : a;
}

}  // namespace

void TrainSpec::validate() const {
    if (!(d > 0.0) || !std::isfinite(d)) throw InvalidInput("TrainSpec: d must be positive");
    if (!(std::abs(v) < 1.0)) throw InvalidInput("TrainSpec: |v| must be below 1");
    if (!(std::abs(alpha) < 1.0)) throw InvalidInput("TrainSpec: |alpha| must be below 1");
    if (K > kMaxImages) throw InvalidInput("TrainSpec: K must not exceed 10000");
}

double TrainSpec::certificate() const {
    if (K == 0) return std::numeric_limits<double>::infinity();
    return 2.0 * (1.0 + std::numbers::ln2) / (kBreatherK * static_cast<double>(K) * d);
}

std::size_t images_for_tolerance(double d, double tolerance) {
    if (!(d > 0.0) || !(tolerance > 0.0)) throw InvalidInput("images_for_tolerance: need positive d and tolerance");
    const double k = 2.0 * (1.0 + std::numbers::ln2) / (kBreatherK * d * tolerance);
    const auto K = static_cast<std::size_t>(std::floor(k)) + 1;
    if (K > kMaxImages) throw InvalidInput("images_for_tolerance: tolerance needs more than 10000 images");
    return K;
}

double train_sum(const TrainSpec& spec, const SpacetimePoint& pt) {
    spec.validate();
    const double gamma = 1.0 / std::sqrt((1.0 - spec.v) * (1.0 + spec.v));
    const double xi = pt.x - spec.v * pt.t;
    const auto K = static_cast<long>(spec.K);
    return image_sum(-K, K + 1, xi, pt.y * pt.y + pt.z * pt.z, gamma, spec.d);
}

Complex train_psi(const TrainSpec& spec, const SpacetimePoint& pt, double E, double p) {
    check_shell(spec, E, p);
    const double theta = -E * pt.t + p * pt.x;
    return cis(theta) * log_argument(spec, pt, theta);
}

ActionValue train_action(const TrainSpec& spec, const SpacetimePoint& pt, double E, double p) {
    check_shell(spec, E, p);
    const double theta = -E * pt.t + p * pt.x;
    const Complex arg = log_argument(spec, pt, theta);
    if (arg == Complex(0.0, 0.0)) throw SingularPointError("train_action: Psi vanishes");
    const Complex s = theta - kI * std::log(arg);
    return {s, branch_of(s)};
}

std::vector<double> quantized_momenta(double d, int n_max) {
    if (!(d > 0.0)) throw InvalidInput("quantized_momenta: d must be positive");
    if (n_max < 0) throw InvalidInput("quantized_momenta: n_max must be non-negative");
    std::vector<double> out;
    for (int n = 0; n <= n_max; ++n) out.push_back(2.0 * kPi * n / d);
    return out;
}

double periodicity_defect(const TrainSpec& spec, double E, double p, std::span<const SpacetimePoint> samples,
                          double path_step, Execution exec) {
    spec.validate();
    check_shell(spec, E, p);
    if (!(path_step > 0.0)) throw InvalidInput("periodicity_defect: path_step must be positive");
    const auto n = static_cast<std::size_t>(std::ceil(spec.d / path_step));
    const double h = spec.d / static_cast<double>(n);
    std::vector<Complex> path(n + 1);
    double worst = 0.0;
    for (const auto& s : samples) {
        const auto count = static_cast<std::ptrdiff_t>(n + 1);
        auto eval = [&](std::ptrdiff_t i) {
            SpacetimePoint q = s;
            q.x = s.x + static_cast<double>(i) * h;
            path[i] = train_psi(spec, q, E, p);
        };
        if (exec == Execution::parallel) {
#pragma omp parallel for schedule(static)
            for (std::ptrdiff_t i = 0; i < count; ++i) eval(i);
        } else {
            for (std::ptrdiff_t i = 0; i < count; ++i) eval(i);
        }
        const auto action = action_from_psi(path);
        const double defect = std::abs(action.back().value - action.front().value - p * spec.d);
        worst = std::max(worst, defect);
    }
    return worst;
}

std::vector<ScanRow> quantization_scan(double d, Complex alpha, std::size_t K, int n_max, int subdivisions,
                                       std::span<const SpacetimePoint> samples, double path_step, Execution exec) {
    if (subdivisions < 1) throw InvalidInput("quantization_scan: subdivisions must be positive");
    std::vector<ScanRow> rows;
    const int per_quantum = 2 * subdivisions;
    for (int j = 0; j <= n_max * per_quantum; ++j) {
        const double p = 2.0 * kPi * static_cast<double>(j) / (static_cast<double>(per_quantum) * d);
        const double E = std::sqrt(1.0 + p * p);
        const TrainSpec spec{d, p / E, alpha, K};
        rows.push_back({p, periodicity_defect(spec, E, p, samples, path_step, exec), spec.certificate(),
                        j % per_quantum == 0});
    }
    return rows;
}

double fold_two_wall(double x, Sheet sheet, double d) {
    if (!(d > 0.0)) throw InvalidInput("fold_two_wall: d must be positive");
    if (!(x >= 0.0 && x <= 0.5 * d)) throw InvalidInput("fold_two_wall: x must lie in [0, d/2]");
    if (sheet == Sheet::upper || x == 0.0) return x;
    return d - x;
}

StripPoint unfold_to_strip(double y, double d) {
    if (!(d > 0.0)) throw InvalidInput("unfold_to_strip: d must be positive");
    if (!(y >= 0.0 && y < d)) throw InvalidInput("unfold_to_strip: y must lie in [0, d)");
    if (y <= 0.5 * d) return {y, Sheet::upper};
    return {d - y, Sheet::lower};
}

double fold_orientation(Sheet sheet) { return sheet == Sheet::upper ? 1.0 : -1.0; }

ActionValue two_wall_action(const TrainSpec& spec, const StripPoint& x, double y, double z, double t, double E,
                            double p) {
    return train_action(spec, SpacetimePoint{t, fold_two_wall(x.x, x.sheet, spec.d), y, z}, E, p);
}

double TorusSpec::energy() const { return 1.0 + 0.5 * v_phi() * v_phi(); }

void TorusSpec::validate() const {
    if (!(d_duct >= 10.0)) throw InvalidInput("TorusSpec: duct width must be at least 10 Compton lengths");
    if (!(R >= 10.0 * d_duct)) throw InvalidInput("TorusSpec: need R >= 10 d_duct");
    if (!(std::abs(v_phi()) <= 0.1)) throw InvalidInput("TorusSpec: |v_phi| = |n|/R must not exceed 0.1");
    if (!(std::abs(alpha) < 1.0)) throw InvalidInput("TorusSpec: |alpha| must be below 1");
}

namespace {

struct TorusParts {
    double theta;
    double radial;
};

TorusParts torus_parts(const TorusSpec& spec, const CylindricalPoint& pt, double t) {
    spec.validate();
    if (std::abs(pt.rho - spec.R) > spec.d_duct || std::abs(pt.z) > spec.d_duct) {
        std::ostringstream os;
        os << "torus_action: point (rho=" << pt.rho << ", z=" << pt.z << ") lies outside the duct window";
        throw InvalidInput(os.str());
    }
    const double theta = -spec.energy() * t + spec.p_phi() * spec.R * pt.phi;
    const double arc = spec.R * wrap_angle(pt.phi - spec.v_phi() * t / spec.R);
    const double dr = pt.rho - spec.R;
    const double r = std::sqrt(arc * arc + dr * dr + pt.z * pt.z);
    return {theta, j0(kBreatherK * r)};
}

}  // namespace

Complex torus_psi(const TorusSpec& spec, const CylindricalPoint& pt, double t) {
    const auto [theta, radial] = torus_parts(spec, pt, t);
    return cis(theta) * (1.0 + spec.alpha * cis(theta) * radial);
}

ActionValue torus_action(const TorusSpec& spec, const CylindricalPoint& pt, double t) {
    const auto [theta, radial] = torus_parts(spec, pt, t);
    const Complex arg = 1.0 + spec.alpha * cis(theta) * radial;
    if (arg == Complex(0.0, 0.0)) throw SingularPointError("torus_action: Psi vanishes");
    const Complex s = theta - kI * std::log(arg);
    return {s, branch_of(s)};
}

double torus_winding(const TorusSpec& spec, double t, std::size_t samples) {
    if (samples < 3) throw InvalidInput("torus_winding: need at least three samples");
    std::vector<Complex> path(samples + 1);
    for (std::size_t k = 0; k <= samples; ++k) {
        const double phi = 2.0 * kPi * static_cast<double>(k) / static_cast<double>(samples);
        path[k] = torus_psi(spec, {spec.R, phi, 0.0}, t);
    }
    const auto action = action_from_psi(path);
    return action.back().value.real() - action.front().value.real();
}

double torus_envelope_angle(const TorusSpec& spec, double t, std::size_t samples) {
    if (samples < 3) throw InvalidInput("torus_envelope_angle: need at least three samples");
    const double dphi = 2.0 * kPi / static_cast<double>(samples);
    std::vector<double> env(samples);
    for (std::size_t k = 0; k < samples; ++k) {
        env[k] = std::abs(torus_parts(spec, {spec.R, dphi * static_cast<double>(k), 0.0}, t).radial);
    }
    const auto imax = static_cast<std::size_t>(std::max_element(env.begin(), env.end()) - env.begin());
    const double fm = env[(imax + samples - 1) % samples];
    const double f0 = env[imax];
    const double fp = env[(imax + 1) % samples];
    double phi = dphi * static_cast<double>(imax);
    const double curvature = fm - 2.0 * f0 + fp;
    if (curvature < 0.0) phi += 0.5 * (fm - fp) / curvature * dphi;
    phi = std::fmod(phi, 2.0 * kPi);
    return phi < 0.0 ? phi + 2.0 * kPi : phi;
}

}  // namespace breather
