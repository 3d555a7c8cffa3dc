#include "breather/special_functions.hpp"

#include <cmath>
#include <string>

#include "breather/errors.hpp"

namespace breather {

namespace {

void check_degree(int l) {
    if (l < 0 || l > kMaxDegree) {
        throw InvalidInput("degree l=" + std::to_string(l) + " outside supported range 0.." +
                           std::to_string(kMaxDegree));
    }
}

// x^l / (2l+1)!! * sum_k (-x^2/2)^k / (k! (2l+3)(2l+5)...(2l+2k+1)).
double bessel_series(int l, double x) {
    double lead = 1.0;
    for (int i = 1; i <= l; ++i) lead *= x / (2.0 * i + 1.0);
    const double q = -0.5 * x * x;
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 200; ++k) {
        term *= q / (k * (2.0 * l + 2.0 * k + 1.0));
        sum += term;
        if (std::abs(term) < 1e-17 * std::abs(sum)) break;
    }
    return lead * sum;
}

}  // namespace

double spherical_bessel(int l, double x) {
    check_degree(l);
    if (!std::isfinite(x)) throw InvalidInput("spherical_bessel: non-finite argument");
    const double ax = std::abs(x);
    const double sign = (x < 0.0 && (l % 2 == 1)) ? -1.0 : 1.0;
    // The series loses about log10(e^x) digits to cancellation; upward
    // recurrence is stable once x exceeds l.
    if (ax <= static_cast<double>(l) + 2.0 || ax < 0.5) return sign * bessel_series(l, ax);
    const double s = std::sin(ax);
    const double c = std::cos(ax);
    double jm = s / ax;
    if (l == 0) return jm;
    double j = s / (ax * ax) - c / ax;
    for (int k = 1; k < l; ++k) {
        const double jp = (2.0 * k + 1.0) / ax * j - jm;
        jm = j;
        j = jp;
    }
    return sign * j;
}

double assoc_legendre(int l, int n, double u) {
    check_degree(l);
    if (n < -l || n > l) throw InvalidInput("assoc_legendre: need |n| <= l");
    if (!(std::abs(u) <= 1.0)) throw InvalidInput("assoc_legendre: |u| must not exceed 1");
    const int m = std::abs(n);
    // P_m^m = (-1)^m (2m-1)!! (1-u^2)^{m/2}
    const double root = std::sqrt((1.0 - u) * (1.0 + u));
    double pmm = 1.0;
    for (int i = 1; i <= m; ++i) pmm *= -(2.0 * i - 1.0) * root;
    double value = pmm;
    if (l > m) {
        double pm1 = u * (2.0 * m + 1.0) * pmm;
        double pm0 = pmm;
        for (int k = m + 2; k <= l; ++k) {
            const double pk = ((2.0 * k - 1.0) * u * pm1 - (k + m - 1.0) * pm0) / (k - m);
            pm0 = pm1;
            pm1 = pk;
        }
        value = pm1;
    }
    if (n < 0) {
        double ratio = 1.0;  // (l-m)! / (l+m)!
        for (int i = l - m + 1; i <= l + m; ++i) ratio /= i;
        value *= (m % 2 == 0 ? 1.0 : -1.0) * ratio;
    }
    return value;
}

}  // namespace breather
