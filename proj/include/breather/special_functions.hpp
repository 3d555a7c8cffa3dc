#pragma once

namespace breather {

inline constexpr int kMaxDegree = 8;

/// Spherical Bessel function of the first kind j_l(x) for 0 <= l <= 8.
/// j_0(0) = 1. Power series near the origin, upward recurrence from the
/// closed forms of j_0 and j_1 elsewhere.
double spherical_bessel(int l, double x);

/// Associated Legendre function P_l^n(u), unnormalized, for |n| <= l <= 8
/// and |u| <= 1.
///
/// Sign convention: P_l^m(u) = (-1)^m (1 - u^2)^{m/2} d^m/du^m P_l(u) for
/// m >= 0, so P_1^1(u) = -sqrt(1 - u^2) and P_2^1(u) = -3u sqrt(1 - u^2).
/// Negative orders use P_l^{-m} = (-1)^m (l-m)!/(l+m)! P_l^m.
double assoc_legendre(int l, int n, double u);

}  // namespace breather
