#pragma once

#include <complex>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "coopscatter/cloud.hpp"

/// Mean-field model of a driven spherical cloud.
///
/// The smooth-density excitation field decouples into Legendre modes
///   beta(r, theta, t) = sum_n alpha_n(t) j_n(k0 r) P_n(cos theta),
/// each relaxing at (1 + lambda_n) Gamma with collective shift omega_n.
/// Time is measured in 1/Gamma, frequencies in Gamma, and every excitation
/// in units of (Omega0/Gamma)^2; powers are in units of the single-atom P1.
namespace coop {

/// Plane-wave drive. `detuning` is delta = Delta0/Gamma, `rabi` is Omega0/Gamma.
struct DriveParams {
    double detuning = 0.0;
    double rabi = 1.0;
};

enum class Phase { driven, free };
std::string_view to_string(Phase phase);

/// Whether the collective Lamb shifts enter the mode dynamics.
enum class LambShift { neglect, include };
std::string_view to_string(LambShift shift);
LambShift parse_lamb_shift(std::string_view name);

struct ModeSpectrum {
    CloudProfile profile;
    int n_max = 0;
    std::vector<double> lambda;  ///< collective decay rates lambda_n, units of Gamma
    std::vector<double> omega;   ///< collective Lamb shifts omega_n, units of Gamma
    /// Orders n < sigma with |j_n(sigma)| < 1e-12, i.e. sigma sits on a zero of
    /// j_n and the closed-form shift is singular. Their omega entry is set to 0.
    /// (Past n ~ sigma, j_n(sigma) is small but has no zeros; those shifts are kept.)
    std::vector<int> singular_shift_modes;

    /// |sum_n (2n+1) lambda_n - N| / N
    double sum_rule_residual() const;
};

/// Closed-form mode dynamics for a fixed drive.
class ModeEvolution {
public:
    ModeEvolution(ModeSpectrum spectrum, DriveParams drive, LambShift shift = LambShift::neglect);

    const ModeSpectrum& spectrum() const noexcept { return spectrum_; }
    const DriveParams& drive() const noexcept { return drive_; }
    LambShift lamb_shift() const noexcept { return shift_; }
    int n_max() const noexcept { return spectrum_.n_max; }
    int n_atoms() const noexcept { return spectrum_.profile.n_atoms(); }

    /// c_n = i^n (2n+1) Omega0 / [2(delta - omega_n) + i(1 + lambda_n)], the steady amplitudes.
    std::span<const std::complex<double>> steady() const noexcept { return steady_; }
    /// s_n = i(delta - omega_n) - (1 + lambda_n)/2
    std::span<const std::complex<double>> rates() const noexcept { return rates_; }

private:
    ModeSpectrum spectrum_;
    DriveParams drive_;
    LambShift shift_;
    std::vector<std::complex<double>> steady_;
    std::vector<std::complex<double>> rates_;
};

namespace meanfield {

inline constexpr int kAutoOrder = -1;
inline constexpr double kSumRuleTolerance = 1e-8;
inline constexpr double kTailTolerance = 1e-12;
inline constexpr double kSingularShiftThreshold = 1e-12;

/// ceil(sigma + 15 sigma^{1/3} + 20)
int default_truncation(double sigma);

/// lambda_N of the Timed-Dicke regime: 3N/2sigma^2 (uniform), 5N/2sigma^2
/// (parabolic), N/2sigma^2 (Gaussian, which is also Gamma_sr/Gamma).
double plateau_rate(const CloudProfile& profile);

/// Collective decay rates and shifts from the profile's closed form.
///
/// With n_max = kAutoOrder the truncation starts at default_truncation(sigma)
/// and grows until the sum rule holds to kSumRuleTolerance and the last rate
/// is below kTailTolerance * N. An explicit n_max is used as given.
ModeSpectrum mode_spectrum(const CloudProfile& profile, int n_max = kAutoOrder);

/// CSV with columns n,lambda_over_N,omega_over_N.
void write_csv(std::ostream& out, const ModeSpectrum& spectrum);

/// F_n(r) from its defining radial integrals by adaptive Gauss-Kronrod
/// quadrature. Independent of the closed forms used by mode_spectrum:
/// Re F_n(r) = lambda_n j_n(r), and for sharp-edged clouds
/// Im F_n(sigma) = lambda_n y_n(sigma).
/// Throws QuadratureError if the requested relative tolerance is not reached.
std::complex<double> f_kernel_quadrature(const CloudProfile& profile, int n, double r,
                                         double rel_tol = 1e-12);

/// alpha_n(t) = c_n (1 - e^{s_n t}) with alpha_n(0) = 0.
std::vector<std::complex<double>> driven_alpha(const ModeEvolution& evo, double t);
/// alpha_n(t) = c_n e^{s_n t}, t measured from switch-off at steady state.
std::vector<std::complex<double>> free_alpha(const ModeEvolution& evo, double t);
std::vector<std::complex<double>> alpha(const ModeEvolution& evo, double t, Phase phase);

/// beta(r, theta, t), truncated at the spectrum's n_max.
std::complex<double> field(const ModeEvolution& evo, double r, double theta, double t, Phase phase);

/// <|beta|^2> = (1/N) sum_n |alpha_n|^2 lambda_n / (2n+1)
double mean_excitation(const ModeEvolution& evo, double t, Phase phase);

/// Driven build-up with every lambda_n replaced by the plateau lambda_N:
/// Omega0^2 |1 - e^{i delta t - (1+lambda_N) t/2}|^2 / [4 delta^2 + (1 + lambda_N)^2].
double timed_dicke_mean(const ModeSpectrum& spectrum, const DriveParams& drive, double t);

/// dP/dOmega / P1 = (1/4pi) { N <|beta|^2> + |sum_n alpha_n i^{-n} lambda_n P_n(cos theta)|^2 }
double angular_power(const ModeEvolution& evo, double theta, double t, Phase phase);

/// P / P1 = sum_n |alpha_n|^2 lambda_n (1 + lambda_n) / (2n+1)
double total_power(const ModeEvolution& evo, double t, Phase phase);

enum class ContinuumBranch { integral, large_delta, resonant, late_time };
std::string_view to_string(ContinuumBranch branch);

/// Free decay of <|beta|^2> for a large Gaussian cloud with the mode sum
/// replaced by an integral over x = lambda(eta) in [0, Gamma_sr]:
///   integral     adaptive quadrature of the continuum integral (any delta)
///   large_delta  (Omega0/2delta)^2 e^{-t} (1 - e^{-G t}) / (G t),   delta != 0
///   resonant     exact delta = 0 form through E_1,                   delta == 0
///   late_time    e^{-t}/(G t) [1 - (1/(1+G))^2 e^{-G t}] (Omega0 units), delta == 0
/// with G = Gamma_sr/Gamma = N/2sigma^2. t = 0 returns the analytic limit.
double gaussian_continuum_free_mean(double sigma, int n_atoms, const DriveParams& drive, double t,
                                    ContinuumBranch branch);

struct OpticalThickness {
    double b0 = 0.0;  ///< resonant optical thickness 3N/sigma^2
    double b = 0.0;   ///< b0 / (1 + 4 delta^2)
    bool warn = false;  ///< b >= 1: outside the single-scattering regime the model assumes
};

OpticalThickness optical_thickness(const CloudProfile& profile, double detuning);

}  // namespace meanfield
}  // namespace coop
