#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "coopscatter/cloud.hpp"
#include "coopscatter/meanfield.hpp"

/// The N-atom coupled-dipole model
///   d beta_j/dt = (i delta - 1/2) beta_j - (1/2) sum_{m != j} G_jm beta_m - i (Omega0/2) e^{i z_j},
///   G(r) = e^{i r} / (i r) = sinc(r) - i cos(r)/r,
/// in units of Gamma and 1/k0, with the drive along +z.
namespace coop {

using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

class CoupledDipoleSystem {
public:
    /// Dense O(N^2) assembly of A and b. Throws DomainError if two atoms coincide.
    CoupledDipoleSystem(AtomEnsemble ensemble, DriveParams drive);

    const AtomEnsemble& ensemble() const noexcept { return ensemble_; }
    const DriveParams& drive() const noexcept { return drive_; }
    /// A with A_jj = i delta - 1/2, A_jm = -G_jm / 2 (complex symmetric).
    const CMatrix& matrix() const noexcept { return a_; }
    /// b_j = -i (Omega0/2) e^{i z_j}
    const CVector& drive_vector() const noexcept { return b_; }
    int size() const noexcept { return static_cast<int>(b_.size()); }

private:
    AtomEnsemble ensemble_;
    DriveParams drive_;
    CMatrix a_;
    CVector b_;
};

struct DipoleState {
    CVector beta;
    double t = 0.0;
};

/// A = V diag(s) V^{-1}.
struct SpectralDecomposition {
    CVector eigenvalues;
    CMatrix vectors;                      ///< right eigenvectors, unit 2-norm columns
    Eigen::PartialPivLU<CMatrix> solver;  ///< LU of `vectors`, applies V^{-1}
    double condition = 0.0;               ///< 1-norm condition estimate of V

    /// |sum_k (-2 Re s_k) - N| / N
    double trace_residual() const;
    /// ||A V - V diag(s)||_F / ||A||_F
    double reconstruction_residual(const CMatrix& a) const;
};

enum class EvolutionMethod { automatic, spectral, integrate };
std::string_view to_string(EvolutionMethod method);

/// States on a time grid; column k of `beta` is the state at times[k].
struct Trajectory {
    std::vector<double> times;
    CMatrix beta;
    EvolutionMethod method = EvolutionMethod::spectral;  ///< path actually taken
    double condition = 0.0;  ///< eigenvector condition estimate, NaN when not computed

    DipoleState state(std::size_t k) const { return {beta.col(static_cast<Eigen::Index>(k)), times[k]}; }
};

namespace discrete {

inline constexpr double kSteadyConditionLimit = 1e12;
inline constexpr double kSpectralConditionLimit = 1e10;
inline constexpr double kIntegratorRelTol = 1e-9;

/// sinc(r) - i cos(r)/r. Throws DomainError for r <= 0.
std::complex<double> kernel_g(double kr);

CoupledDipoleSystem assemble(const AtomEnsemble& ensemble, const DriveParams& drive);

/// Direct LU solve of A beta = -b. Throws IllConditioned when the condition
/// estimate exceeds kSteadyConditionLimit.
DipoleState steady_state(const CoupledDipoleSystem& sys);

/// Full eigendecomposition of A (LAPACK zgeev).
SpectralDecomposition spectral(const CoupledDipoleSystem& sys);

/// Exact solution of d beta/dt = A beta + b (driven) or A beta (free) on an
/// ascending grid that starts at 0, from `initial` at t = 0.
///
/// `automatic` uses the eigenbasis unless its condition exceeds
/// kSpectralConditionLimit, in which case it warns and integrates with
/// adaptive Dormand-Prince at relative tolerance kIntegratorRelTol.
/// Throws IntegrationError if the integrator cannot make progress.
Trajectory evolve(const CoupledDipoleSystem& sys, const DipoleState& initial, std::span<const double> t_grid,
                  Phase mode, EvolutionMethod method = EvolutionMethod::automatic);
/// Same, reusing a decomposition computed earlier for this system.
Trajectory evolve(const CoupledDipoleSystem& sys, const SpectralDecomposition& decomposition,
                  const DipoleState& initial, std::span<const double> t_grid, Phase mode);

/// (1/N) sum_j |beta_j|^2
double mean_excitation_d(const DipoleState& state);

/// dP/dOmega / P1 = (1/4pi) |sum_j beta_j e^{-i k.r_j}| ^2 with k along (theta, phi).
double angular_power_d(const DipoleState& state, const AtomEnsemble& ensemble, double theta, double phi);

/// P / P1 = sum_{j,m} beta_j beta_m^* sinc(|r_j - r_m|), with sinc(0) = 1.
double total_power_d(const DipoleState& state, const AtomEnsemble& ensemble);

/// sinc(|r_j - r_m|) for all pairs.
Eigen::MatrixXd sinc_matrix(const AtomEnsemble& ensemble);

/// mean_excitation_d and total_power_d for every column of a trajectory.
std::vector<double> mean_excitation_series(const Trajectory& trajectory);
std::vector<double> total_power_series(const Trajectory& trajectory, const AtomEnsemble& ensemble);

/// CSV with columns re_s,im_s.
void write_eigenvalues_csv(std::ostream& out, const CVector& eigenvalues);

/// Time grids for one realization: a driven run from beta = 0 and a free run
/// from the steady state (the direct solve). Either may be empty.
struct Protocol {
    std::vector<double> driven_times;
    std::vector<double> free_times;
};

struct SeriesStats {
    std::vector<double> mean_beta2;
    std::vector<double> stderr_beta2;
    std::vector<double> power;
    std::vector<double> stderr_power;
};

struct RealizationAverage {
    SeriesStats driven;
    SeriesStats free;
    std::vector<std::uint64_t> seeds;  ///< one per realization, in order
    /// Normalized free decay <|beta(t)|^2> / <|beta(0)|^2>, per-realization ratio averaged.
    std::vector<double> free_normalized;
    std::vector<double> stderr_free_normalized;
    int fallback_count = 0;  ///< realizations that needed the integrator
    /// Eigenvalues of realization 0 when the spectral path was used for it.
    std::optional<CVector> first_eigenvalues;
};

struct AverageOptions {
    double r_min = cloud::kDefaultMinSeparation;
    EvolutionMethod method = EvolutionMethod::automatic;
    unsigned workers = 0;  ///< 0: std::thread::hardware_concurrency()
};

/// Mean and standard error over n_real independent ensembles. Realization k
/// uses derive_seed(seed, k); the reduction runs in realization order, so the
/// output is bit-identical for a given seed whatever the worker count.
/// A failing realization aborts the average with RealizationError.
RealizationAverage realization_average(const CloudProfile& profile, const DriveParams& drive,
                                       const Protocol& protocol, int n_real, std::uint64_t seed,
                                       const AverageOptions& options = {});

}  // namespace discrete
}  // namespace coop
