#include "coopscatter/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "coopscatter/errors.hpp"

namespace coop::specfun {
namespace {

constexpr double kRescaleAbove = 1e200;
constexpr double kRescaleBy = 1e-200;

void require_order(int n_max, const char* fn) {
    if (n_max < 0) {
        throw DomainError(std::string(fn) + ": n_max must be >= 0");
    }
}

// Downward three-term recurrence started at `start` from
// (f_{start+1}, f_start) = (0, tiny) and kept in range by rescaling:
//   spherical:  f_{n-1} = (2n+1)/x f_n - f_{n+1}
//   modified:   f_{n-1} = (2n+1)/x f_n + f_{n+1}
// Returns unnormalized values for orders 0..n_max.
std::vector<double> miller_downward(int n_max, int start, double x, bool modified) {
    std::vector<double> out(static_cast<std::size_t>(n_max) + 1, 0.0);
    double upper = 0.0;    // f_{n+1}
    double current = 1e-300;  // f_n
    for (int n = start; n >= 1; --n) {
        const double factor = (2.0 * n + 1.0) / x * current;
        const double lower = modified ? upper + factor : factor - upper;
        if (n <= n_max) {
            out[static_cast<std::size_t>(n)] = current;
        }
        upper = current;
        current = lower;
        if (std::abs(current) > kRescaleAbove) {
            current *= kRescaleBy;
            upper *= kRescaleBy;
            for (int k = n; k <= n_max; ++k) {
                out[static_cast<std::size_t>(k)] *= kRescaleBy;
            }
        }
    }
    out[0] = current;
    return out;
}

}  // namespace

std::vector<double> spherical_j(int n_max, double x) {
    require_order(n_max, "spherical_j");
    if (!(x >= 0.0) || !std::isfinite(x)) {
        throw DomainError("spherical_j: x must be finite and >= 0");
    }
    std::vector<double> j(static_cast<std::size_t>(n_max) + 1, 0.0);
    if (x == 0.0) {
        j[0] = 1.0;
        return j;
    }
    if (x < 1e-8) {
        // leading two terms of x^n / (2n+1)!! * (1 - x^2 / (2(2n+3)))
        double lead = 1.0;
        for (int n = 0; n <= n_max; ++n) {
            if (n > 0) {
                lead *= x / (2.0 * n + 1.0);
            }
            j[static_cast<std::size_t>(n)] = lead * (1.0 - x * x / (2.0 * (2.0 * n + 3.0)));
        }
        return j;
    }
    const double s = std::sin(x);
    const double c = std::cos(x);
    const double j0 = s / x;
    if (n_max == 0) {
        j[0] = j0;
        return j;
    }
    // j_1 closed form cancels for small x, but there j_0 ~ 1 is always the
    // better normalizer, so the closed j_1 is only used away from the origin.
    const double j1 = (s / x - c) / x;

    const int turning = static_cast<int>(std::ceil(x + 15.0 * std::cbrt(x) + 25.0));
    const int start = std::max(n_max + 20, turning);
    std::vector<double> f = miller_downward(n_max, start, x, /*modified=*/false);

    // f[1] is always filled since n_max >= 1
    const bool use_j0 = std::abs(j0) >= std::abs(j1);
    const double scale = use_j0 ? j0 / f[0] : j1 / f[1];
    for (std::size_t n = 0; n < f.size(); ++n) {
        j[n] = f[n] * scale;
    }
    return j;
}

std::vector<double> spherical_y(int n_max, double x) {
    require_order(n_max, "spherical_y");
    if (!(x > 0.0) || !std::isfinite(x)) {
        throw DomainError("spherical_y: x must be finite and > 0 (y_n is singular at the origin)");
    }
    std::vector<double> y(static_cast<std::size_t>(n_max) + 1, 0.0);
    const double s = std::sin(x);
    const double c = std::cos(x);
    y[0] = -c / x;
    if (n_max >= 1) {
        y[1] = -c / (x * x) - s / x;
    }
    for (int n = 1; n < n_max; ++n) {
        const auto k = static_cast<std::size_t>(n);
        y[k + 1] = (2.0 * n + 1.0) / x * y[k] - y[k - 1];
    }
    return y;
}

std::vector<double> scaled_mod_bessel_half(int n_max, double x) {
    require_order(n_max, "scaled_mod_bessel_half");
    if (!(x > 0.0) || !std::isfinite(x)) {
        throw DomainError("scaled_mod_bessel_half: x must be finite and > 0");
    }
    // Truncation error at order n behaves like (I_start / I_n)^2 ~ exp(-(start^2 - n^2)/x).
    const double nm = static_cast<double>(n_max);
    const int start = static_cast<int>(std::ceil(std::sqrt(nm * nm + 60.0 * x))) + 20;
    std::vector<double> f = miller_downward(n_max, std::max(start, n_max + 20), x, /*modified=*/true);

    const double g0 = -std::expm1(-2.0 * x) / std::sqrt(2.0 * std::numbers::pi * x);
    const double scale = g0 / f[0];
    for (double& v : f) {
        v *= scale;
    }
    return f;
}

std::vector<double> legendre(int n_max, double u) {
    require_order(n_max, "legendre");
    if (!(std::abs(u) <= 1.0)) {
        throw DomainError("legendre: argument must lie in [-1, 1]");
    }
    std::vector<double> p(static_cast<std::size_t>(n_max) + 1);
    p[0] = 1.0;
    if (n_max >= 1) {
        p[1] = u;
    }
    for (int n = 1; n < n_max; ++n) {
        const auto k = static_cast<std::size_t>(n);
        p[k + 1] = ((2.0 * n + 1.0) * u * p[k] - n * p[k - 1]) / (n + 1.0);
    }
    return p;
}

double exp_integral_e1(double x) {
    if (!(x > 0.0)) {
        throw DomainError("exp_integral_e1: x must be > 0");
    }
    if (std::isinf(x)) {
        return 0.0;
    }
    constexpr double eps = 1e-16;
    if (x <= 1.0) {
        // -gamma - ln x + sum_{k>=1} (-1)^{k+1} x^k / (k k!)
        double sum = 0.0;
        double term = 1.0;  // (-1)^{k+1} x^k / k!
        for (int k = 1; k < 200; ++k) {
            term *= (k == 1 ? x : -x / k);
            const double contrib = term / k;
            sum += contrib;
            if (std::abs(contrib) < eps * std::abs(sum)) {
                break;
            }
        }
        return -std::numbers::egamma - std::log(x) + sum;
    }
    // Modified Lentz evaluation of the continued fraction
    // E_1(x) = e^{-x} / (x + 1 - 1^2/(x + 3 - 2^2/(x + 5 - ...))).
    constexpr double tiny = 1e-300;
    double b = x + 1.0;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 10000; ++i) {
        const double an = -static_cast<double>(i) * i;
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        const double delta = c * d;
        h *= delta;
        if (std::abs(delta - 1.0) < eps) {
            break;
        }
    }
    return h * std::exp(-x);
}

QuadratureRule gauss_legendre(int m) {
    if (m < 1) {
        throw DomainError("gauss_legendre: m must be >= 1");
    }
    QuadratureRule rule;
    rule.nodes.assign(static_cast<std::size_t>(m), 0.0);
    rule.weights.assign(static_cast<std::size_t>(m), 0.0);
    const int half = (m + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (m + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = z;
            for (int n = 1; n < m; ++n) {
                const double p2 = ((2.0 * n + 1.0) * z * p1 - n * p0) / (n + 1.0);
                p0 = p1;
                p1 = p2;
            }
            // for m == 1 the loop is skipped and p1 = P_1(z) = z, p0 = P_0 = 1
            dp = m * (z * p1 - p0) / (z * z - 1.0);
            const double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) {
                break;
            }
        }
        const double w = 2.0 / ((1.0 - z * z) * dp * dp);
        const auto lo = static_cast<std::size_t>(i);
        const auto hi = static_cast<std::size_t>(m - 1 - i);
        rule.nodes[lo] = -z;
        rule.nodes[hi] = z;
        rule.weights[lo] = w;
        rule.weights[hi] = w;
    }
    return rule;
}

}  // namespace coop::specfun
