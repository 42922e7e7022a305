#include "coopscatter/meanfield.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "coopscatter/errors.hpp"
#include "coopscatter/specfun.hpp"
#include "coopscatter/warnings.hpp"

using coop::CloudProfile;
using coop::DriveParams;
using coop::LambShift;
using coop::ModeEvolution;
using coop::Phase;
using coop::ProfileKind;
namespace mf = coop::meanfield;
using cplx = std::complex<double>;

namespace {

constexpr double kPi = std::numbers::pi;

// Reference values from tests/oracles/reference_values.py (mpmath, 40 digits,
// lambda_n by quadrature of the density definition).
struct LambdaRef {
    ProfileKind kind;
    int n;
    double value;
};
constexpr LambdaRef kLambdaSigma20[] = {
    {ProfileKind::uniform, 0, 3.6801456412050611},
    {ProfileKind::uniform, 5, 3.5445266088432659},
    {ProfileKind::uniform, 19, 0.5271370777336569},
    {ProfileKind::uniform, 30, 2.6960161466316684e-8},
    {ProfileKind::parabolic, 0, 6.2419660247187784},
    {ProfileKind::parabolic, 5, 5.5695145146948447},
    {ProfileKind::parabolic, 19, 0.12456227817463153},
    {ProfileKind::parabolic, 30, 2.5960709251116263e-9},
    {ProfileKind::gaussian, 0, 1.25},
    {ProfileKind::gaussian, 5, 1.2039371554022217},
    {ProfileKind::gaussian, 19, 0.77696728307365916},
    {ProfileKind::gaussian, 30, 0.39053141016946608},
};
constexpr double kOmegaUniform20[] = {-0.82250355091916856, 4.8983605411840857, -0.50893244322390515,
                                      15.413171330463329, 0.14917516565023697};
constexpr double kSteadyNoShift = 0.0024091956369732848;
constexpr double kSteadyWithShift = 0.0090455795700931928;
constexpr double kUniformEarlySlopeBeta = 3.7331007995270262;
constexpr double kGaussianEarlySlopeBeta = 1.6109248395058132;
constexpr double kGaussianEarlySlopePower = 1.6917266718847387;

constexpr ProfileKind kAllKinds[] = {ProfileKind::uniform, ProfileKind::parabolic,
                                     ProfileKind::gaussian};

const coop::ModeSpectrum& spectrum20(ProfileKind kind) {
    static const auto u = mf::mode_spectrum(CloudProfile(ProfileKind::uniform, 20.0, 1000));
    static const auto p = mf::mode_spectrum(CloudProfile(ProfileKind::parabolic, 20.0, 1000));
    static const auto g = mf::mode_spectrum(CloudProfile(ProfileKind::gaussian, 20.0, 1000));
    return kind == ProfileKind::uniform ? u : kind == ProfileKind::parabolic ? p : g;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// Captures warnings for the lifetime of the object.
struct WarningCapture {
    std::vector<std::string> messages;
    coop::WarningSink previous;
    WarningCapture() {
        previous = coop::set_warning_sink([this](std::string_view m) { messages.emplace_back(m); });
    }
    ~WarningCapture() { coop::set_warning_sink(previous); }
};

}  // namespace

TEST(ModeSpectrum, MatchesQuadratureReference) {
    for (const auto& ref : kLambdaSigma20) {
        const auto& s = spectrum20(ref.kind);
        EXPECT_LT(rel(s.lambda[ref.n], ref.value), 1e-10) << coop::to_string(ref.kind) << " n=" << ref.n;
    }
    const auto g5 = mf::mode_spectrum(CloudProfile(ProfileKind::gaussian, 5.0, 1000));
    EXPECT_LT(rel(g5.lambda[3], 15.6608), 1e-10);
}

TEST(ModeSpectrum, SpecExamples) {
    EXPECT_NEAR(spectrum20(ProfileKind::uniform).lambda[0], 3.680, 5e-4);
    EXPECT_DOUBLE_EQ(mf::plateau_rate(CloudProfile(ProfileKind::uniform, 20.0, 1000)) / 1000, 3.75e-3);
    EXPECT_DOUBLE_EQ(mf::plateau_rate(CloudProfile(ProfileKind::parabolic, 20.0, 1000)) / 1000, 6.25e-3);
    EXPECT_NEAR(spectrum20(ProfileKind::gaussian).lambda[0] / 1000, 1.25e-3, 1e-16);
    const auto tiny = mf::mode_spectrum(CloudProfile(ProfileKind::uniform, 0.01, 1000));
    EXPECT_LT(rel(tiny.lambda[0], 1000.0), 1e-3);
    EXPECT_LT(rel(tiny.lambda[0], 999.98000019047513), 1e-10);
}

TEST(ModeSpectrum, SumRuleAndTruncation) {
    for (auto kind : kAllKinds) {
        for (double sigma : {0.5, 5.0, 20.0}) {
            const auto s = mf::mode_spectrum(CloudProfile(kind, sigma, 1000));
            EXPECT_LT(s.sum_rule_residual(), 1e-8) << coop::to_string(kind) << " sigma=" << sigma;
            EXPECT_LT(s.lambda.back(), 1e-12 * 1000);
            EXPECT_GE(s.n_max, mf::default_truncation(sigma));
            for (int n = 0; n <= s.n_max; ++n) {
                EXPECT_GT(s.lambda[n], 0.0) << coop::to_string(kind) << " sigma=" << sigma << " n=" << n;
            }
        }
    }
}

TEST(ModeSpectrum, GaussianNeedsExtendedTruncation) {
    const auto& g = spectrum20(ProfileKind::gaussian);
    EXPECT_GT(g.n_max, mf::default_truncation(20.0));
    for (double w : g.omega) EXPECT_EQ(w, 0.0);
}

TEST(ModeSpectrum, GaussianContinuumWithinFivePercent) {
    const auto& g = spectrum20(ProfileKind::gaussian);
    const double sigma = 20.0;
    for (int n = 0; n <= 20; ++n) {
        const double eta = n + 0.5;
        const double continuum = 1000.0 / (2 * sigma * sigma) * std::exp(-eta * eta / (2 * sigma * sigma));
        EXPECT_LT(rel(g.lambda[n], continuum), 0.05) << "n=" << n;
    }
}

TEST(ModeSpectrum, UniformTailAsymptotics) {
    // Past n ~ sigma the rates collapse like (sigma^2/4)^n / (n^2 n!^2). The
    // leading-order coefficient is 3 pi N / 8; exact values from mpmath.
    const double sigma = 5.0;
    const auto s = mf::mode_spectrum(CloudProfile(ProfileKind::uniform, sigma, 1000), 61);
    struct Ref {
        int n;
        double lambda;
    };
    double previous_ratio = 0.0;
    for (const Ref r : {Ref{15, 1.1180941539895281e-12}, Ref{30, 8.8427566804103372e-42},
                        Ref{60, 2.1099933910732188e-117}}) {
        EXPECT_LT(rel(s.lambda[r.n], r.lambda), 1e-9) << r.n;
        const double n = r.n;
        const double leading = 3.0 * kPi * 1000 / (8.0 * n * n) *
                               std::exp(n * std::log(sigma * sigma / 4.0) - 2.0 * std::lgamma(n + 1.0));
        const double ratio = s.lambda[r.n] / leading;
        EXPECT_GT(ratio, previous_ratio);
        EXPECT_LT(ratio, 1.0);
        previous_ratio = ratio;
    }
    EXPECT_GT(previous_ratio, 0.75);
}

TEST(ModeSpectrum, ParabolicSmallSigmaStaysPositive) {
    // The closed form cancels badly here; the quadrature fallback must take over.
    const auto s = mf::mode_spectrum(CloudProfile(ProfileKind::parabolic, 0.5, 1000), 30);
    for (int n = 0; n <= 30; ++n) {
        EXPECT_GT(s.lambda[n], 0.0) << n;
    }
    for (int n : {0, 3, 10}) {
        const double fk = mf::f_kernel_quadrature(s.profile, n, 0.5).real() / coop::specfun::spherical_j(n, 0.5)[n];
        EXPECT_LT(rel(s.lambda[n], fk), 1e-8) << n;
    }
}

TEST(ModeSpectrum, UniformLambShiftReference) {
    const auto& s = spectrum20(ProfileKind::uniform);
    for (int n = 0; n < 5; ++n) {
        EXPECT_LT(rel(s.omega[n], kOmegaUniform20[n]), 1e-9) << n;
    }
    EXPECT_TRUE(s.singular_shift_modes.empty());
}

TEST(ModeSpectrum, SingularShiftFlagged) {
    WarningCapture capture;
    // sigma = pi is the first zero of j_0
    const auto s = mf::mode_spectrum(CloudProfile(ProfileKind::uniform, kPi, 100));
    ASSERT_FALSE(s.singular_shift_modes.empty());
    EXPECT_EQ(s.singular_shift_modes.front(), 0);
    EXPECT_EQ(s.omega[0], 0.0);
    EXPECT_GT(s.lambda[0], 0.0);
    ASSERT_EQ(capture.messages.size(), 1u);
    EXPECT_NE(capture.messages[0].find("n=0"), std::string::npos);
}

TEST(ModeSpectrum, ExplicitOrderAndCsv) {
    const auto s = mf::mode_spectrum(CloudProfile(ProfileKind::uniform, 2.0, 10), 4);
    EXPECT_EQ(s.n_max, 4);
    EXPECT_EQ(s.lambda.size(), 5u);
    EXPECT_THROW(mf::mode_spectrum(s.profile, -3), std::invalid_argument);
    std::ostringstream out;
    mf::write_csv(out, s);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "n,lambda_over_N,omega_over_N");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    EXPECT_EQ(rows, 5);
}

TEST(KernelQuadrature, RealPartGivesLambda) {
    const auto& u = spectrum20(ProfileKind::uniform);
    const double j0 = coop::specfun::spherical_j(0, 20.0)[0];
    EXPECT_LT(rel(mf::f_kernel_quadrature(u.profile, 0, 20.0).real() / j0, u.lambda[0]), 1e-8);

    const auto g5 = mf::mode_spectrum(CloudProfile(ProfileKind::gaussian, 5.0, 1000));
    const double r = 65.0;
    const double j3 = coop::specfun::spherical_j(3, r)[3];
    EXPECT_LT(rel(mf::f_kernel_quadrature(g5.profile, 3, r).real() / j3, g5.lambda[3]), 1e-8);
}

TEST(KernelQuadrature, ImaginaryPartGivesLambShift) {
    const auto& u = spectrum20(ProfileKind::uniform);
    const auto j = coop::specfun::spherical_j(4, 20.0);
    for (int n = 0; n < 5; ++n) {
        const double from_kernel = mf::f_kernel_quadrature(u.profile, n, 20.0).imag() / (2.0 * j[n]);
        EXPECT_LT(rel(from_kernel, u.omega[n]), 1e-6) << n;
    }
}

TEST(KernelQuadrature, FiniteNearOrigin) {
    for (auto kind : kAllKinds) {
        const CloudProfile p(kind, 3.0, 50);
        const cplx f = mf::f_kernel_quadrature(p, 0, 1e-6);
        EXPECT_TRUE(std::isfinite(f.real()) && std::isfinite(f.imag())) << coop::to_string(kind);
    }
    EXPECT_THROW(mf::f_kernel_quadrature(CloudProfile(ProfileKind::uniform, 3.0, 5), 0, 0.0),
                 coop::DomainError);
}

TEST(KernelQuadrature, SumRuleSpotCheck) {
    const CloudProfile p(ProfileKind::parabolic, 5.0, 1000);
    const auto s = mf::mode_spectrum(p);
    const auto j = coop::specfun::spherical_j(8, 3.3);
    for (int n = 0; n <= 8; ++n) {
        EXPECT_LT(rel(mf::f_kernel_quadrature(p, n, 3.3).real() / j[n], s.lambda[n]), 1e-8) << n;
    }
}

TEST(ModeEvolution, RatesAndCoefficients) {
    const ModeEvolution evo(spectrum20(ProfileKind::uniform), DriveParams{10.0, 1.0});
    for (const auto& s : evo.rates()) {
        EXPECT_LE(s.real(), -0.5);
        EXPECT_DOUBLE_EQ(s.imag(), 10.0);
    }
    const ModeEvolution shifted(spectrum20(ProfileKind::uniform), DriveParams{10.0, 1.0}, LambShift::include);
    EXPECT_DOUBLE_EQ(shifted.rates()[0].imag(), 10.0 - spectrum20(ProfileKind::uniform).omega[0]);
    EXPECT_THROW(ModeEvolution(spectrum20(ProfileKind::uniform), DriveParams{0.0, -1.0}), std::invalid_argument);
    EXPECT_EQ(coop::parse_lamb_shift("include"), LambShift::include);
    EXPECT_THROW(coop::parse_lamb_shift("maybe"), std::invalid_argument);
}

TEST(DrivenAlpha, StartsAtZeroAndReachesSteadyState) {
    const ModeEvolution evo(spectrum20(ProfileKind::uniform), DriveParams{10.0, 1.0});
    for (const auto& a : mf::driven_alpha(evo, 0.0)) EXPECT_EQ(std::abs(a), 0.0);
    const auto late = mf::driven_alpha(evo, 200.0);
    const auto start = mf::free_alpha(evo, 0.0);
    for (int n = 0; n <= evo.n_max(); ++n) {
        EXPECT_LT(std::abs(late[n] - start[n]), 1e-14 * (1.0 + std::abs(start[n])));
    }
}

TEST(DrivenAlpha, SingleModeSteadyState) {
    const CloudProfile p(ProfileKind::uniform, 0.01, 1000);
    coop::ModeSpectrum s{p, 0, {1000.0}, {0.0}, {}};
    const ModeEvolution evo(s, DriveParams{0.0, 2.0});
    const auto a = mf::driven_alpha(evo, 1e3);
    EXPECT_NEAR(std::norm(a[0]), 4.0 / (1001.0 * 1001.0), 1e-18);
}

TEST(DrivenAlpha, SteadyMeanExcitationReference) {
    const ModeEvolution evo(spectrum20(ProfileKind::uniform), DriveParams{10.0, 1.0});
    EXPECT_LT(rel(mf::mean_excitation(evo, 0.0, Phase::free), kSteadyNoShift), 1e-9);
    EXPECT_LT(rel(mf::mean_excitation(evo, 300.0, Phase::driven), kSteadyNoShift), 1e-9);
    const ModeEvolution shifted(spectrum20(ProfileKind::uniform), DriveParams{10.0, 1.0}, LambShift::include);
    EXPECT_LT(rel(mf::mean_excitation(shifted, 0.0, Phase::free), kSteadyWithShift), 1e-9);
}

TEST(FreeAlpha, ModesDecayAtCollectiveRate) {
    const ModeEvolution evo(spectrum20(ProfileKind::uniform), DriveParams{10.0, 1.0});
    const auto a0 = mf::free_alpha(evo, 0.0);
    const auto a1 = mf::free_alpha(evo, 1.0);
    const auto a3 = mf::free_alpha(evo, 3.0);
    const auto& lam = evo.spectrum().lambda;
    for (int n = 0; n <= 40; ++n) {
        EXPECT_NEAR(std::abs(a1[n]) / std::abs(a0[n]), std::exp(-0.5 * (1 + lam[n])), 1e-14);
        EXPECT_LE(std::abs(a1[n]) / std::abs(a0[n]), std::exp(-0.5) * (1 + 1e-15));
        const double slope = (std::log(std::norm(a3[n])) - std::log(std::norm(a1[n]))) / 2.0;
        EXPECT_NEAR(slope, -(1 + lam[n]), 1e-10);
    }
    EXPECT_NEAR(std::abs(a1[0]) / std::abs(a0[0]), std::exp(-2.34), 1e-3);
}

TEST(Field, ZeroDriveAndOrigin) {
    const auto& s = spectrum20(ProfileKind::uniform);
    const ModeEvolution dark(s, DriveParams{3.0, 0.0});
    EXPECT_EQ(std::abs(mf::field(dark, 5.0, 1.0, 0.5, Phase::driven)), 0.0);
    const ModeEvolution evo(s, DriveParams{3.0, 1.0});
    const auto a = mf::driven_alpha(evo, 0.7);
    const cplx at_origin = mf::field(evo, 0.0, 2.0, 0.7, Phase::driven);
    EXPECT_LT(std::abs(at_origin - a[0]), 1e-15 * std::abs(a[0]));
}

TEST(Field, TimedDickePlaneWave) {
    const CloudProfile p(ProfileKind::uniform, 20.0, 1000);
    const int n_max = 80;
    const double lam_n = mf::plateau_rate(p);
    coop::ModeSpectrum s{p, n_max, std::vector<double>(n_max + 1, lam_n), std::vector<double>(n_max + 1, 0.0), {}};
    const double delta = 10.0;
    const ModeEvolution evo(s, DriveParams{delta, 1.0});
    for (double r : {0.0, 3.0, 12.0, 20.0}) {
        for (double theta : {0.0, 0.8, 2.0, kPi}) {
            const double t = 0.3;
            const cplx expected = 1.0 / cplx(2 * delta, 1 + lam_n) * std::exp(cplx(0.0, r * std::cos(theta))) *
                                  std::exp(cplx(-(1 + lam_n) / 2, delta) * t);
            EXPECT_LT(std::abs(mf::field(evo, r, theta, t, Phase::free) - expected), 1e-12)
                << "r=" << r << " theta=" << theta;
        }
    }
}

TEST(MeanExcitation, FreeDecayModeSumIdentity) {
    const auto& s = spectrum20(ProfileKind::parabolic);
    const double delta = 4.0;
    const ModeEvolution evo(s, DriveParams{delta, 1.5}, LambShift::include);
    for (double t : {0.0, 0.4, 2.5}) {
        double sum = 0.0;
        for (int n = 0; n <= s.n_max; ++n) {
            const double lam = s.lambda[n];
            const double dw = delta - s.omega[n];
            sum += (2 * n + 1) * lam * std::exp(-(1 + lam) * t) / (4 * dw * dw + (1 + lam) * (1 + lam));
        }
        sum *= 1.5 * 1.5 / 1000;
        EXPECT_LT(rel(mf::mean_excitation(evo, t, Phase::free), sum), 1e-12) << t;
    }
}

TEST(MeanExcitation, WeakCouplingLimit) {
    const auto s = mf::mode_spectrum(CloudProfile(ProfileKind::uniform, 20.0, 1));
    const ModeEvolution evo(s, DriveParams{10.0, 1.0});
    EXPECT_LT(rel(mf::mean_excitation(evo, 0.0, Phase::free), 1.0 / 401.0), 1e-4);
    EXPECT_NEAR(mf::mean_excitation(evo, 0.0, Phase::free), 2.4938e-3, 1e-7);
}

TEST(MeanExcitation, FreeDecayMonotone) {
    for (auto kind : kAllKinds) {
        const ModeEvolution evo(spectrum20(kind), DriveParams{0.0, 1.0});
        double previous = mf::mean_excitation(evo, 0.0, Phase::free);
        for (int k = 1; k <= 100; ++k) {
            const double value = mf::mean_excitation(evo, 0.05 * k, Phase::free);
            EXPECT_LE(value, previous);
            previous = value;
        }
    }
}

TEST(MeanExcitation, EarlyDecaySlopes) {
    auto slope = [](const ModeEvolution& evo, bool power) {
        auto f = [&](double t) {
            return power ? mf::total_power(evo, t, Phase::free) : mf::mean_excitation(evo, t, Phase::free);
        };
        return (std::log(f(0.0)) - std::log(f(0.2))) / 0.2;
    };
    const ModeEvolution u(spectrum20(ProfileKind::uniform), DriveParams{10.0, 1.0});
    EXPECT_LT(rel(slope(u, false), kUniformEarlySlopeBeta), 1e-9);
    const ModeEvolution g(spectrum20(ProfileKind::gaussian), DriveParams{10.0, 1.0});
    EXPECT_LT(rel(slope(g, false), kGaussianEarlySlopeBeta), 1e-8);
    EXPECT_LT(rel(slope(g, true), kGaussianEarlySlopePower), 1e-8);
}

TEST(TimedDicke, LimitsAndAgreement) {
    const auto& s = spectrum20(ProfileKind::uniform);
    const DriveParams drive{10.0, 1.0};
    EXPECT_EQ(mf::timed_dicke_mean(s, drive, 0.0), 0.0);
    const double plateau = mf::timed_dicke_mean(s, drive, 100.0);
    EXPECT_NEAR(plateau, 1.0 / (400.0 + 4.75 * 4.75), 1e-15);
    EXPECT_NEAR(plateau, 2.366e-3, 1e-6);
    const ModeEvolution evo(s, drive);
    const double exact = mf::mean_excitation(evo, 100.0, Phase::driven);
    EXPECT_LT(rel(plateau, exact), 0.05);
}

TEST(AngularPower, ForwardLobeAndZeroDrive) {
    const auto& s = spectrum20(ProfileKind::uniform);
    const ModeEvolution evo(s, DriveParams{10.0, 1.0});
    EXPECT_GT(mf::angular_power(evo, 0.0, 0.0, Phase::free), mf::angular_power(evo, kPi, 0.0, Phase::free));
    const ModeEvolution dark(s, DriveParams{10.0, 0.0});
    EXPECT_EQ(mf::angular_power(dark, 0.3, 1.0, Phase::driven), 0.0);
    EXPECT_EQ(mf::total_power(dark, 1.0, Phase::driven), 0.0);
    EXPECT_EQ(mf::mean_excitation(dark, 1.0, Phase::driven), 0.0);
}

TEST(AngularPower, SolidAngleIntegralIsTotalPower) {
    for (auto kind : kAllKinds) {
        const auto& s = spectrum20(kind);
        const ModeEvolution evo(s, DriveParams{2.0, 1.0}, LambShift::include);
        const auto rule = coop::specfun::gauss_legendre(2 * (s.n_max + 1));
        for (auto [t, phase] : {std::pair{0.0, Phase::free}, std::pair{0.8, Phase::driven}}) {
            double integral = 0.0;
            for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
                integral += rule.weights[k] * mf::angular_power(evo, std::acos(rule.nodes[k]), t, phase);
            }
            integral *= 2.0 * kPi;
            EXPECT_LT(rel(integral, mf::total_power(evo, t, phase)), 1e-8) << coop::to_string(kind);
        }
    }
}

TEST(Observables, ScaleAsRabiSquared) {
    const auto& s = spectrum20(ProfileKind::parabolic);
    const ModeEvolution one(s, DriveParams{1.0, 1.0});
    const ModeEvolution three(s, DriveParams{1.0, 3.0});
    for (auto phase : {Phase::driven, Phase::free}) {
        EXPECT_LT(rel(mf::mean_excitation(three, 0.5, phase), 9 * mf::mean_excitation(one, 0.5, phase)), 1e-14);
        EXPECT_LT(rel(mf::total_power(three, 0.5, phase), 9 * mf::total_power(one, 0.5, phase)), 1e-14);
        EXPECT_LT(rel(mf::angular_power(three, 0.4, 0.5, phase), 9 * mf::angular_power(one, 0.4, 0.5, phase)),
                  1e-14);
    }
}

TEST(GaussianContinuum, IntegralReference) {
    struct Ref {
        double delta, t, value;
    };
    for (const Ref r : {Ref{0, 0.5, 0.21732419244037378}, Ref{0, 2, 0.029394985228116259},
                        Ref{0, 5, 0.00079682261642275514}, Ref{10, 0.5, 0.0011203453133364564},
                        Ref{10, 2, 0.0001236012780164643}, Ref{10, 5, 2.6801231804119263e-6}}) {
        const double v = mf::gaussian_continuum_free_mean(20.0, 1000, DriveParams{r.delta, 1.0}, r.t,
                                                          mf::ContinuumBranch::integral);
        EXPECT_LT(rel(v, r.value), 1e-10) << r.delta << " " << r.t;
    }
}

TEST(GaussianContinuum, BranchesAgree) {
    using B = mf::ContinuumBranch;
    const DriveParams far{10.0, 1.0};
    EXPECT_DOUBLE_EQ(mf::gaussian_continuum_free_mean(20, 1000, far, 0.0, B::large_delta), 1.0 / 400.0);
    EXPECT_LT(rel(mf::gaussian_continuum_free_mean(20, 1000, far, 2.0, B::integral),
                  mf::gaussian_continuum_free_mean(20, 1000, far, 2.0, B::large_delta)),
              0.01);
    const DriveParams resonant{0.0, 1.0};
    for (double t : {0.5, 2.0, 5.0}) {
        EXPECT_LT(rel(mf::gaussian_continuum_free_mean(20, 1000, resonant, t, B::resonant),
                      mf::gaussian_continuum_free_mean(20, 1000, resonant, t, B::integral)),
                  1e-6)
            << t;
    }
    EXPECT_DOUBLE_EQ(mf::gaussian_continuum_free_mean(20, 1000, resonant, 0.0, B::resonant), 1.0 / 2.25);
    EXPECT_DOUBLE_EQ(mf::gaussian_continuum_free_mean(20, 1000, resonant, 0.0, B::integral), 1.0 / 2.25);
    // Asymptotic in 1/t: the relative error is about 2/t.
    const double late = mf::gaussian_continuum_free_mean(20, 1000, resonant, 40.0, B::late_time);
    const double exact = mf::gaussian_continuum_free_mean(20, 1000, resonant, 40.0, B::resonant);
    EXPECT_LT(rel(late, exact), 0.06);
}

TEST(GaussianContinuum, BranchPreconditions) {
    using B = mf::ContinuumBranch;
    EXPECT_THROW(mf::gaussian_continuum_free_mean(20, 1000, DriveParams{0.0, 1.0}, 1.0, B::large_delta),
                 coop::DomainError);
    EXPECT_THROW(mf::gaussian_continuum_free_mean(20, 1000, DriveParams{1.0, 1.0}, 1.0, B::resonant),
                 coop::DomainError);
    EXPECT_THROW(mf::gaussian_continuum_free_mean(20, 1000, DriveParams{0.0, 1.0}, -1.0, B::integral),
                 std::invalid_argument);
    EXPECT_TRUE(std::isinf(mf::gaussian_continuum_free_mean(20, 1000, DriveParams{0.0, 1.0}, 0.0, B::late_time)));
}

TEST(OpticalThickness, SpecExamples) {
    const CloudProfile p(ProfileKind::gaussian, 20.0, 1000);
    const auto resonant = mf::optical_thickness(p, 0.0);
    EXPECT_DOUBLE_EQ(resonant.b0, 7.5);
    EXPECT_DOUBLE_EQ(resonant.b, 7.5);
    EXPECT_TRUE(resonant.warn);
    const auto detuned = mf::optical_thickness(p, 10.0);
    EXPECT_NEAR(detuned.b, 7.5 / 401.0, 1e-15);
    EXPECT_NEAR(detuned.b, 0.0187, 1e-4);
    EXPECT_FALSE(detuned.warn);
}
