#pragma once

#include <cmath>

namespace oscar {

/// Smooth bump phi0 in C_c^inf(-2,2), identically 1 on [-1,1].
/// Taper on 1 < |s| < 2: exp(1 - 1/(1 - (|s|-1)^2)).
inline double phi0(double s) {
    double a = std::abs(s);
    if (a <= 1.0) return 1.0;
    if (a >= 2.0) return 0.0;
    double u = a - 1.0;
    return std::exp(1.0 - 1.0 / (1.0 - u * u));
}

/// Cutoff in C_c^inf(-1,1), identically 1 on [-1/2,1/2].
inline double phi_narrow(double s) { return phi0(2.0 * s); }

/// Japanese bracket of up to three arguments: sqrt(1 + sum of squares).
inline double bracket(double a, double b = 0.0, double c = 0.0) {
    return std::sqrt(1.0 + a * a + b * b + c * c);
}

}  // namespace oscar
