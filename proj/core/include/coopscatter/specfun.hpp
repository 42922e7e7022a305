#pragma once

#include <vector>

/// Real special functions used by the mode expansion: spherical Bessel
/// functions, scaled modified Bessel functions of half-integer order,
/// Legendre polynomials, the exponential integral and Gauss-Legendre rules.
///
/// All routines are pure and thread-safe. Accuracy target is 1e-10 relative
/// in double precision unless a function says otherwise.
namespace coop::specfun {

/// j_n(x) for n = 0..n_max by Miller downward recurrence, normalized against
/// whichever of the closed forms j_0, j_1 is better conditioned at x.
/// Exact limits at x = 0. Throws DomainError for x < 0 or n_max < 0.
std::vector<double> spherical_j(int n_max, double x);

/// y_n(x) for n = 0..n_max by upward recurrence. Throws DomainError for x <= 0.
std::vector<double> spherical_y(int n_max, double x);

/// e^{-x} I_{n+1/2}(x) for n = 0..n_max.
///
/// The unscaled function overflows already at x ~ 710, so only the scaled form
/// is exposed. Values come from downward recurrence normalized by the closed
/// form e^{-x} I_{1/2}(x) = (1 - e^{-2x}) / sqrt(2 pi x). Orders whose value is
/// below the double range underflow to zero. Throws DomainError for x <= 0.
std::vector<double> scaled_mod_bessel_half(int n_max, double x);

/// P_n(u) for n = 0..n_max. Throws DomainError for |u| > 1.
std::vector<double> legendre(int n_max, double u);

/// E_1(x) = int_x^inf e^{-u}/u du. Throws DomainError for x <= 0.
double exp_integral_e1(double x);

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// m-point Gauss-Legendre rule on [-1, 1], nodes ascending. Exact for
/// polynomials of degree <= 2m - 1.
QuadratureRule gauss_legendre(int m);

}  // namespace coop::specfun
