#include "coopscatter/meanfield.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>

#include "coopscatter/csv.hpp"
#include "coopscatter/errors.hpp"
#include "coopscatter/specfun.hpp"
#include "coopscatter/warnings.hpp"

namespace coop {

using cplx = std::complex<double>;

namespace {

cplx i_pow(int n) {
    switch (n & 3) {
        case 0: return {1.0, 0.0};
        case 1: return {0.0, 1.0};
        case 2: return {-1.0, 0.0};
        default: return {0.0, -1.0};
    }
}

}  // namespace

std::string_view to_string(Phase phase) {
    return phase == Phase::driven ? "driven" : "free";
}

std::string_view to_string(LambShift shift) {
    return shift == LambShift::neglect ? "neglect" : "include";
}

LambShift parse_lamb_shift(std::string_view name) {
    if (name == "neglect") return LambShift::neglect;
    if (name == "include") return LambShift::include;
    throw std::invalid_argument("unknown Lamb-shift mode '" + std::string(name) +
                                "' (expected neglect or include)");
}

double ModeSpectrum::sum_rule_residual() const {
    double sum = 0.0;
    for (std::size_t n = 0; n < lambda.size(); ++n) {
        sum += (2.0 * n + 1.0) * lambda[n];
    }
    const double atoms = profile.n_atoms();
    return std::abs(sum - atoms) / atoms;
}

ModeEvolution::ModeEvolution(ModeSpectrum spectrum, DriveParams drive, LambShift shift)
    : spectrum_(std::move(spectrum)), drive_(drive), shift_(shift) {
    if (!(drive_.rabi >= 0.0) || !std::isfinite(drive_.rabi) || !std::isfinite(drive_.detuning)) {
        throw std::invalid_argument("ModeEvolution: need finite detuning and Rabi frequency >= 0");
    }
    const auto size = static_cast<std::size_t>(spectrum_.n_max + 1);
    if (spectrum_.lambda.size() != size || spectrum_.omega.size() != size) {
        throw std::invalid_argument("ModeEvolution: spectrum arrays do not match n_max");
    }
    steady_.resize(size);
    rates_.resize(size);
    for (int n = 0; n <= spectrum_.n_max; ++n) {
        const double lam = spectrum_.lambda[n];
        const double om = shift_ == LambShift::include ? spectrum_.omega[n] : 0.0;
        const double detuning = drive_.detuning - om;
        steady_[n] = i_pow(n) * (2.0 * n + 1.0) * drive_.rabi / cplx(2.0 * detuning, 1.0 + lam);
        rates_[n] = cplx(-0.5 * (1.0 + lam), detuning);
    }
}

namespace meanfield {
namespace {

constexpr double kPi = std::numbers::pi;
using GK = boost::math::quadrature::gauss_kronrod<double, 61>;

// j_n at one argument
double sph_j(int n, double x) {
    return specfun::spherical_j(n, x)[n];
}

std::vector<double> uniform_lambda(double sigma, int n_atoms, int n_max) {
    const auto j = specfun::spherical_j(n_max + 1, sigma);
    const double j_minus1 = std::cos(sigma) / sigma;
    std::vector<double> lambda(n_max + 1);
    for (int n = 0; n <= n_max; ++n) {
        const double below = n == 0 ? j_minus1 : j[n - 1];
        lambda[n] = 1.5 * n_atoms * (j[n] * j[n] - below * j[n + 1]);
    }
    return lambda;
}

// 4 pi int_0^sigma r^2 n(r) j_n(r)^2 dr on a Gauss-Legendre rule; used where the
// closed form loses too many digits to cancellation.
double parabolic_lambda_quadrature(double sigma, int n_atoms, int n) {
    const int m = std::min(1024, n + 40 + static_cast<int>(std::ceil(sigma)));
    const auto rule = specfun::gauss_legendre(m);
    double sum = 0.0;
    for (int k = 0; k < m; ++k) {
        const double x = 0.5 * sigma * (rule.nodes[k] + 1.0);
        const double jn = sph_j(n, x);
        sum += rule.weights[k] * x * x * (1.0 - x * x / (sigma * sigma)) * jn * jn;
    }
    sum *= 0.5 * sigma;
    return 7.5 * n_atoms * sum / (sigma * sigma * sigma);
}

std::vector<double> parabolic_lambda(double sigma, int n_atoms, int n_max) {
    const auto j = specfun::spherical_j(n_max + 1, sigma);
    const double j_minus1 = std::cos(sigma) / sigma;
    std::vector<double> lambda(n_max + 1);
    for (int n = 0; n <= n_max; ++n) {
        const double jm = n == 0 ? j_minus1 : j[n - 1];
        const double jn = j[n];
        const double jp = j[n + 1];
        const double a = n + 1.5;
        const double terms[] = {
            jn * jn / 3.0,
            -0.5 * jp * jm,
            -jm * jm / 6.0,
            a * jm * jn / (3.0 * sigma),
            -a * (n + 0.5) * jn * jn / (3.0 * sigma * sigma),
            a * (n - 0.5) * jp * jm / (3.0 * sigma * sigma),
        };
        double value = 0.0, scale = 0.0;
        for (double t : terms) {
            value += t;
            scale += std::abs(t);
        }
        // More than ~6 digits cancelled: fall back to direct quadrature.
        if (!(value > 1e-6 * scale)) {
            lambda[n] = scale > 0.0 ? parabolic_lambda_quadrature(sigma, n_atoms, n) : 0.0;
        } else {
            lambda[n] = 7.5 * n_atoms * value;
        }
    }
    return lambda;
}

std::vector<double> gaussian_lambda(double sigma, int n_atoms, int n_max) {
    const auto scaled = specfun::scaled_mod_bessel_half(n_max, sigma * sigma);
    const double prefactor = n_atoms / sigma * std::sqrt(kPi / 2.0);
    std::vector<double> lambda(n_max + 1);
    for (int n = 0; n <= n_max; ++n) {
        lambda[n] = prefactor * scaled[n];
    }
    return lambda;
}

ModeSpectrum build_spectrum(const CloudProfile& profile, int n_max) {
    ModeSpectrum s{profile, n_max, {}, std::vector<double>(n_max + 1, 0.0), {}};
    const double sigma = profile.sigma();
    switch (profile.kind()) {
        case ProfileKind::uniform: s.lambda = uniform_lambda(sigma, profile.n_atoms(), n_max); break;
        case ProfileKind::parabolic: s.lambda = parabolic_lambda(sigma, profile.n_atoms(), n_max); break;
        case ProfileKind::gaussian: s.lambda = gaussian_lambda(sigma, profile.n_atoms(), n_max); break;
    }
    if (profile.kind() == ProfileKind::gaussian) {
        return s;
    }
    const auto j = specfun::spherical_j(n_max, sigma);
    const auto y = specfun::spherical_y(n_max, sigma);
    for (int n = 0; n <= n_max; ++n) {
        if (n < sigma && std::abs(j[n]) < kSingularShiftThreshold) {
            s.singular_shift_modes.push_back(n);
        } else if (j[n] != 0.0 && std::isfinite(y[n])) {
            s.omega[n] = 0.5 * s.lambda[n] * y[n] / j[n];
        }
    }
    return s;
}

bool spectrum_converged(const ModeSpectrum& s) {
    return s.sum_rule_residual() < kSumRuleTolerance &&
           s.lambda.back() < kTailTolerance * s.profile.n_atoms();
}

}  // namespace

int default_truncation(double sigma) {
    return static_cast<int>(std::ceil(sigma + 15.0 * std::cbrt(sigma) + 20.0));
}

double plateau_rate(const CloudProfile& p) {
    const double base = p.n_atoms() / (p.sigma() * p.sigma());
    switch (p.kind()) {
        case ProfileKind::uniform: return 1.5 * base;
        case ProfileKind::parabolic: return 2.5 * base;
        case ProfileKind::gaussian: return 0.5 * base;
    }
    return 0.0;
}

ModeSpectrum mode_spectrum(const CloudProfile& profile, int n_max) {
    if (n_max != kAutoOrder && n_max < 0) {
        throw std::invalid_argument("mode_spectrum: n_max must be >= 0");
    }
    const bool automatic = n_max == kAutoOrder;
    if (automatic) n_max = default_truncation(profile.sigma());
    const int ceiling = 8 * n_max + 1000;
    ModeSpectrum s = build_spectrum(profile, n_max);
    while (automatic && !spectrum_converged(s)) {
        n_max += std::max(16, n_max / 2);
        if (n_max > ceiling) {
            throw std::runtime_error("mode_spectrum: sum rule not reached by n_max=" +
                                     std::to_string(ceiling) + " (residual " +
                                     std::to_string(s.sum_rule_residual()) + ")");
        }
        s = build_spectrum(profile, n_max);
    }
    if (!s.singular_shift_modes.empty()) {
        std::string list;
        for (int n : s.singular_shift_modes) {
            list += (list.empty() ? "" : ",") + std::to_string(n);
        }
        warn("j_n(sigma) vanishes for n=" + list + " at sigma=" + csv::format(profile.sigma()) +
             "; Lamb shift of these modes set to 0");
    }
    return s;
}

void write_csv(std::ostream& out, const ModeSpectrum& spectrum) {
    csv::Writer w(out, {"n", "lambda_over_N", "omega_over_N"});
    const double atoms = spectrum.profile.n_atoms();
    for (int n = 0; n <= spectrum.n_max; ++n) {
        w.cell(static_cast<long long>(n)).cell(spectrum.lambda[n] / atoms).cell(spectrum.omega[n] / atoms);
        w.end_row();
    }
}

std::complex<double> f_kernel_quadrature(const CloudProfile& profile, int n, double r, double rel_tol) {
    if (n < 0) throw std::invalid_argument("f_kernel_quadrature: n must be >= 0");
    if (!(r > 0.0)) throw DomainError("f_kernel_quadrature: r must be > 0");

    // The Gaussian tail beyond 13 sigma holds < 1e-30 of the atoms.
    const double top = profile.kind() == ProfileKind::gaussian ? 13.0 * profile.sigma() : profile.sigma();

    auto weight = [&](double x) { return x * x * cloud::density(profile, x); };
    auto jj = [&](double x) {
        const double j = sph_j(n, x);
        return weight(x) * j * j;
    };
    auto jy = [&](double x) {
        if (x == 0.0) return 0.0;
        double product = sph_j(n, x) * specfun::spherical_y(n, x)[n];
        if (!std::isfinite(product)) {
            product = -1.0 / ((2.0 * n + 1.0) * x);  // small-x limit of j_n y_n
        }
        return weight(x) * product;
    };

    auto integrate = [&](auto&& f, double a, double b, double& error_out) {
        // Panels a few oscillation periods wide keep the adaptive scheme well-behaved.
        error_out = 0.0;
        if (!(b > a)) return 0.0;
        const int panels = std::max(1, static_cast<int>(std::ceil((b - a) / (2.0 * kPi))));
        double total = 0.0;
        for (int k = 0; k < panels; ++k) {
            const double lo = a + (b - a) * k / panels;
            const double hi = a + (b - a) * (k + 1) / panels;
            double error = 0.0;
            total += GK::integrate(f, lo, hi, 15, rel_tol * 1e-2, &error);
            error_out += error;
        }
        return total;
    };

    const double inner_top = std::min(r, top);
    double e_inner = 0.0, e_re = 0.0, e_im = 0.0;
    const double inner = integrate(jj, 0.0, inner_top, e_inner);
    const double outer_re = integrate(jj, inner_top, top, e_re);
    const double outer_im = integrate(jy, inner_top, top, e_im);

    const double jn_r = sph_j(n, r);
    const double yn_r = specfun::spherical_y(n, r)[n];
    const cplx h(jn_r, yn_r);
    const cplx value = 4.0 * kPi * (h * inner + jn_r * cplx(outer_re, outer_im));
    const double error = 4.0 * kPi * (std::abs(h) * e_inner + std::abs(jn_r) * (e_re + e_im));
    if (!(error <= rel_tol * std::abs(value))) {
        throw QuadratureError("f_kernel_quadrature: tolerance not reached for n=" + std::to_string(n),
                              std::abs(value), error);
    }
    return value;
}

std::vector<cplx> driven_alpha(const ModeEvolution& evo, double t) {
    const auto c = evo.steady();
    const auto s = evo.rates();
    std::vector<cplx> a(c.size());
    for (std::size_t n = 0; n < c.size(); ++n) {
        // 1 - e^{st} via expm1 keeps the small-t build-up accurate
        a[n] = -c[n] * std::expm1(s[n].real() * t) * std::polar(1.0, s[n].imag() * t) -
               c[n] * (std::polar(1.0, s[n].imag() * t) - 1.0);
    }
    return a;
}

std::vector<cplx> free_alpha(const ModeEvolution& evo, double t) {
    const auto c = evo.steady();
    const auto s = evo.rates();
    std::vector<cplx> a(c.size());
    for (std::size_t n = 0; n < c.size(); ++n) {
        a[n] = c[n] * std::exp(s[n] * t);
    }
    return a;
}

std::vector<cplx> alpha(const ModeEvolution& evo, double t, Phase phase) {
    if (!(t >= 0.0)) throw std::invalid_argument("alpha: t must be >= 0");
    return phase == Phase::driven ? driven_alpha(evo, t) : free_alpha(evo, t);
}

cplx field(const ModeEvolution& evo, double r, double theta, double t, Phase phase) {
    if (!(r >= 0.0)) throw std::invalid_argument("field: r must be >= 0");
    const auto a = alpha(evo, t, phase);
    const auto j = specfun::spherical_j(evo.n_max(), r);
    const auto p = specfun::legendre(evo.n_max(), std::clamp(std::cos(theta), -1.0, 1.0));
    cplx sum = 0.0;
    for (int n = 0; n <= evo.n_max(); ++n) {
        sum += a[n] * j[n] * p[n];
    }
    return sum;
}

double mean_excitation(const ModeEvolution& evo, double t, Phase phase) {
    const auto a = alpha(evo, t, phase);
    const auto& lam = evo.spectrum().lambda;
    double sum = 0.0;
    for (int n = 0; n <= evo.n_max(); ++n) {
        sum += std::norm(a[n]) * lam[n] / (2.0 * n + 1.0);
    }
    return sum / evo.n_atoms();
}

double timed_dicke_mean(const ModeSpectrum& spectrum, const DriveParams& drive, double t) {
    if (!(t >= 0.0)) throw std::invalid_argument("timed_dicke_mean: t must be >= 0");
    const double lam = plateau_rate(spectrum.profile);
    const double d = drive.detuning;
    const double g = 1.0 + lam;
    const cplx build = 1.0 - std::exp(cplx(-0.5 * g * t, d * t));
    return drive.rabi * drive.rabi * std::norm(build) / (4.0 * d * d + g * g);
}

double angular_power(const ModeEvolution& evo, double theta, double t, Phase phase) {
    const auto a = alpha(evo, t, phase);
    const auto& lam = evo.spectrum().lambda;
    const auto p = specfun::legendre(evo.n_max(), std::clamp(std::cos(theta), -1.0, 1.0));
    double incoherent = 0.0;
    cplx coherent = 0.0;
    for (int n = 0; n <= evo.n_max(); ++n) {
        incoherent += std::norm(a[n]) * lam[n] / (2.0 * n + 1.0);
        coherent += a[n] * std::conj(i_pow(n)) * lam[n] * p[n];
    }
    return (incoherent + std::norm(coherent)) / (4.0 * kPi);
}

double total_power(const ModeEvolution& evo, double t, Phase phase) {
    const auto a = alpha(evo, t, phase);
    const auto& lam = evo.spectrum().lambda;
    double sum = 0.0;
    for (int n = 0; n <= evo.n_max(); ++n) {
        sum += std::norm(a[n]) * lam[n] * (1.0 + lam[n]) / (2.0 * n + 1.0);
    }
    return sum;
}

std::string_view to_string(ContinuumBranch branch) {
    switch (branch) {
        case ContinuumBranch::integral: return "integral";
        case ContinuumBranch::large_delta: return "large_delta";
        case ContinuumBranch::resonant: return "resonant";
        case ContinuumBranch::late_time: return "late_time";
    }
    return "unknown";
}

double gaussian_continuum_free_mean(double sigma, int n_atoms, const DriveParams& drive, double t,
                                    ContinuumBranch branch) {
    const CloudProfile profile(ProfileKind::gaussian, sigma, n_atoms);
    if (!(t >= 0.0)) throw std::invalid_argument("gaussian_continuum_free_mean: t must be >= 0");
    const double big = plateau_rate(profile);  // Gamma_sr / Gamma
    const double d = drive.detuning;
    const double scale = drive.rabi * drive.rabi;

    switch (branch) {
        case ContinuumBranch::integral: {
            auto f = [&](double x) {
                const double g = 1.0 + x;
                return std::exp(-g * t) / (4.0 * d * d + g * g);
            };
            double error = 0.0;
            const double value = GK::integrate(f, 0.0, big, 20, 1e-14, &error);
            if (error > 1e-10 * std::abs(value)) {
                throw QuadratureError("gaussian continuum integral", value, error);
            }
            return scale * value / big;
        }
        case ContinuumBranch::large_delta: {
            if (d == 0.0) throw DomainError("large_delta branch needs a nonzero detuning");
            const double y = big * t;
            const double ratio = y == 0.0 ? 1.0 : -std::expm1(-y) / y;
            return scale / (4.0 * d * d) * std::exp(-t) * ratio;
        }
        case ContinuumBranch::resonant: {
            if (d != 0.0) throw DomainError("resonant branch is the delta = 0 form");
            if (t == 0.0) return scale / (1.0 + big);
            const double a = t;
            const double b = (1.0 + big) * t;
            const double bracket = std::exp(-a) / a - std::exp(-b) / b + specfun::exp_integral_e1(b) -
                                   specfun::exp_integral_e1(a);
            return scale * t * bracket / big;
        }
        case ContinuumBranch::late_time: {
            if (d != 0.0) throw DomainError("late_time branch is the delta = 0 form");
            if (t == 0.0) return std::numeric_limits<double>::infinity();
            const double q = 1.0 / (1.0 + big);
            return scale * std::exp(-t) / (big * t) * (1.0 - q * q * std::exp(-big * t));
        }
    }
    return 0.0;
}

OpticalThickness optical_thickness(const CloudProfile& profile, double detuning) {
    OpticalThickness out;
    out.b0 = 3.0 * profile.n_atoms() / (profile.sigma() * profile.sigma());
    out.b = out.b0 / (1.0 + 4.0 * detuning * detuning);
    out.warn = out.b >= 1.0;
    return out;
}

}  // namespace meanfield
}  // namespace coop
