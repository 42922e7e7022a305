#include "coopscatter/discrete.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>

#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include <boost/numeric/odeint.hpp>

#include "coopscatter/csv.hpp"
#include "coopscatter/errors.hpp"
#include "coopscatter/random.hpp"
#include "coopscatter/warnings.hpp"

namespace coop {

using cplx = std::complex<double>;

CoupledDipoleSystem::CoupledDipoleSystem(AtomEnsemble ensemble, DriveParams drive)
    : ensemble_(std::move(ensemble)), drive_(drive) {
    const auto& pos = ensemble_.positions;
    const auto n = static_cast<Eigen::Index>(pos.size());
    a_.resize(n, n);
    b_.resize(n);
    const cplx diagonal(-0.5, drive_.detuning);
    for (Eigen::Index j = 0; j < n; ++j) {
        a_(j, j) = diagonal;
        for (Eigen::Index m = j + 1; m < n; ++m) {
            const double r = distance(pos[j], pos[m]);
            if (!(r > 0.0)) {
                throw DomainError("assemble: atoms " + std::to_string(j) + " and " + std::to_string(m) +
                                  " coincide");
            }
            const cplx coupling = -0.5 * discrete::kernel_g(r);
            a_(j, m) = coupling;
            a_(m, j) = coupling;
        }
        b_(j) = cplx(0.0, -0.5 * drive_.rabi) * std::polar(1.0, pos[j].z);
    }
}

double SpectralDecomposition::trace_residual() const {
    const double n = static_cast<double>(eigenvalues.size());
    return std::abs(-2.0 * eigenvalues.real().sum() - n) / n;
}

double SpectralDecomposition::reconstruction_residual(const CMatrix& a) const {
    const CMatrix lhs = a * vectors;
    const CMatrix rhs = vectors * eigenvalues.asDiagonal();
    return (lhs - rhs).norm() / a.norm();
}

std::string_view to_string(EvolutionMethod method) {
    switch (method) {
        case EvolutionMethod::automatic: return "automatic";
        case EvolutionMethod::spectral: return "spectral";
        case EvolutionMethod::integrate: return "integrate";
    }
    return "unknown";
}

namespace discrete {
namespace {

void check_grid(std::span<const double> t_grid) {
    if (t_grid.empty()) return;
    if (t_grid.front() != 0.0) {
        throw std::invalid_argument("evolve: time grid must start at 0");
    }
    for (std::size_t k = 1; k < t_grid.size(); ++k) {
        if (!(t_grid[k] > t_grid[k - 1])) {
            throw std::invalid_argument("evolve: time grid must be strictly ascending");
        }
    }
}

CVector stationary_point(const CoupledDipoleSystem& sys, Phase mode) {
    if (mode == Phase::free) return CVector::Zero(sys.size());
    return steady_state(sys).beta;
}

Trajectory integrate_directly(const CoupledDipoleSystem& sys, const DipoleState& initial,
                              std::span<const double> t_grid, Phase mode) {
    namespace odeint = boost::numeric::odeint;
    using State = std::vector<cplx>;

    const auto n = static_cast<Eigen::Index>(sys.size());
    Trajectory out;
    out.times.assign(t_grid.begin(), t_grid.end());
    out.beta.resize(n, static_cast<Eigen::Index>(t_grid.size()));
    out.method = EvolutionMethod::integrate;
    out.condition = std::numeric_limits<double>::quiet_NaN();
    if (t_grid.empty()) return out;

    const CMatrix& a = sys.matrix();
    const CVector& b = sys.drive_vector();
    const bool driven = mode == Phase::driven;
    auto rhs = [&](const State& x, State& dxdt, double) {
        Eigen::Map<const CVector> xv(x.data(), n);
        Eigen::Map<CVector> dv(dxdt.data(), n);
        dv.noalias() = a * xv;
        if (driven) dv += b;
    };

    const double scale = std::max({sys.drive().rabi, initial.beta.cwiseAbs().maxCoeff(), 1e-300});
    auto stepper = odeint::make_dense_output(1e-3 * kIntegratorRelTol * scale, kIntegratorRelTol,
                                             odeint::runge_kutta_dopri5<State>());
    State x(initial.beta.data(), initial.beta.data() + n);
    std::size_t column = 0;
    auto observer = [&](const State& state, double) {
        out.beta.col(static_cast<Eigen::Index>(column++)) = Eigen::Map<const CVector>(state.data(), n);
    };
    const double dt0 = t_grid.size() > 1 ? std::min(1e-3, t_grid[1] - t_grid[0]) : 1e-3;
    try {
        odeint::integrate_times(stepper, rhs, x, t_grid.begin(), t_grid.end(), dt0, observer,
                                odeint::max_step_checker(1000000));
    } catch (const std::exception& e) {
        throw IntegrationError(std::string("evolve: adaptive integration failed: ") + e.what());
    }
    return out;
}

}  // namespace

cplx kernel_g(double kr) {
    if (!(kr > 0.0)) {
        throw DomainError("kernel_g: k0 r must be > 0");
    }
    return {std::sin(kr) / kr, -std::cos(kr) / kr};
}

CoupledDipoleSystem assemble(const AtomEnsemble& ensemble, const DriveParams& drive) {
    return CoupledDipoleSystem(ensemble, drive);
}

DipoleState steady_state(const CoupledDipoleSystem& sys) {
    const Eigen::PartialPivLU<CMatrix> lu(sys.matrix());
    const double rcond = lu.rcond();
    const double condition = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
    if (!(condition <= kSteadyConditionLimit)) {
        throw IllConditioned("steady_state: coupled-dipole matrix is near singular", condition);
    }
    const CVector rhs = -sys.drive_vector();
    CVector beta = lu.solve(rhs);
    // one step of iterative refinement
    const CVector residual = sys.matrix() * beta - rhs;
    beta -= lu.solve(residual);
    return {beta, 0.0};
}

SpectralDecomposition spectral(const CoupledDipoleSystem& sys) {
    const auto n = static_cast<lapack_int>(sys.size());
    CMatrix work = sys.matrix();
    SpectralDecomposition out;
    out.eigenvalues.resize(n);
    out.vectors.resize(n, n);
    const lapack_int info = LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'V', n, work.data(), n, out.eigenvalues.data(),
                                          nullptr, 1, out.vectors.data(), n);
    if (info != 0) {
        throw std::runtime_error("spectral: zgeev failed with info=" + std::to_string(info));
    }
    out.solver.compute(out.vectors);
    const double rcond = out.solver.rcond();
    out.condition = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
    return out;
}

Trajectory evolve(const CoupledDipoleSystem& sys, const SpectralDecomposition& decomposition,
                  const DipoleState& initial, std::span<const double> t_grid, Phase mode) {
    check_grid(t_grid);
    const auto n = static_cast<Eigen::Index>(sys.size());
    if (initial.beta.size() != n) {
        throw std::invalid_argument("evolve: initial state has the wrong size");
    }
    const auto steps = static_cast<Eigen::Index>(t_grid.size());
    const CVector fixed = stationary_point(sys, mode);
    const CVector coefficients = decomposition.solver.solve(initial.beta - fixed);

    CMatrix modal(n, steps);
    for (Eigen::Index k = 0; k < steps; ++k) {
        const double t = t_grid[static_cast<std::size_t>(k)];
        for (Eigen::Index i = 0; i < n; ++i) {
            modal(i, k) = std::exp(decomposition.eigenvalues(i) * t) * coefficients(i);
        }
    }
    Trajectory out;
    out.times.assign(t_grid.begin(), t_grid.end());
    out.beta.noalias() = decomposition.vectors * modal;
    out.beta.colwise() += fixed;
    out.method = EvolutionMethod::spectral;
    out.condition = decomposition.condition;
    return out;
}

Trajectory evolve(const CoupledDipoleSystem& sys, const DipoleState& initial, std::span<const double> t_grid,
                  Phase mode, EvolutionMethod method) {
    check_grid(t_grid);
    if (initial.beta.size() != sys.size()) {
        throw std::invalid_argument("evolve: initial state has the wrong size");
    }
    if (method == EvolutionMethod::integrate) {
        return integrate_directly(sys, initial, t_grid, mode);
    }
    const auto decomposition = spectral(sys);
    if (method == EvolutionMethod::automatic && decomposition.condition > kSpectralConditionLimit) {
        warn("eigenvector basis condition " + csv::format(decomposition.condition) +
             " exceeds the limit; integrating directly");
        Trajectory out = integrate_directly(sys, initial, t_grid, mode);
        out.condition = decomposition.condition;
        return out;
    }
    return evolve(sys, decomposition, initial, t_grid, mode);
}

double mean_excitation_d(const DipoleState& state) {
    if (state.beta.size() == 0) return 0.0;
    return state.beta.squaredNorm() / static_cast<double>(state.beta.size());
}

double angular_power_d(const DipoleState& state, const AtomEnsemble& ensemble, double theta, double phi) {
    const double kx = std::sin(theta) * std::cos(phi);
    const double ky = std::sin(theta) * std::sin(phi);
    const double kz = std::cos(theta);
    cplx sum = 0.0;
    for (std::size_t j = 0; j < ensemble.positions.size(); ++j) {
        const auto& p = ensemble.positions[j];
        sum += state.beta(static_cast<Eigen::Index>(j)) * std::polar(1.0, -(kx * p.x + ky * p.y + kz * p.z));
    }
    return std::norm(sum) / (4.0 * std::numbers::pi);
}

Eigen::MatrixXd sinc_matrix(const AtomEnsemble& ensemble) {
    const auto& pos = ensemble.positions;
    const auto n = static_cast<Eigen::Index>(pos.size());
    Eigen::MatrixXd s(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        s(j, j) = 1.0;
        for (Eigen::Index m = j + 1; m < n; ++m) {
            const double r = distance(pos[j], pos[m]);
            s(j, m) = s(m, j) = r > 0.0 ? std::sin(r) / r : 1.0;
        }
    }
    return s;
}

double total_power_d(const DipoleState& state, const AtomEnsemble& ensemble) {
    const auto& pos = ensemble.positions;
    const auto& beta = state.beta;
    double sum = 0.0;
    for (std::size_t j = 0; j < pos.size(); ++j) {
        const cplx bj = beta(static_cast<Eigen::Index>(j));
        sum += std::norm(bj);
        for (std::size_t m = j + 1; m < pos.size(); ++m) {
            const double r = distance(pos[j], pos[m]);
            const double sinc = r > 0.0 ? std::sin(r) / r : 1.0;
            sum += 2.0 * sinc * (bj * std::conj(beta(static_cast<Eigen::Index>(m)))).real();
        }
    }
    return sum;
}

std::vector<double> mean_excitation_series(const Trajectory& trajectory) {
    std::vector<double> out(static_cast<std::size_t>(trajectory.beta.cols()));
    const double n = static_cast<double>(trajectory.beta.rows());
    for (Eigen::Index k = 0; k < trajectory.beta.cols(); ++k) {
        out[static_cast<std::size_t>(k)] = n > 0 ? trajectory.beta.col(k).squaredNorm() / n : 0.0;
    }
    return out;
}

std::vector<double> total_power_series(const Trajectory& trajectory, const AtomEnsemble& ensemble) {
    const Eigen::MatrixXd s = sinc_matrix(ensemble);
    const Eigen::MatrixXd re = trajectory.beta.real();
    const Eigen::MatrixXd im = trajectory.beta.imag();
    // beta^H S beta = re^T S re + im^T S im for real symmetric S
    const Eigen::MatrixXd s_re = s * re;
    const Eigen::MatrixXd s_im = s * im;
    std::vector<double> out(static_cast<std::size_t>(trajectory.beta.cols()));
    for (Eigen::Index k = 0; k < trajectory.beta.cols(); ++k) {
        out[static_cast<std::size_t>(k)] = re.col(k).dot(s_re.col(k)) + im.col(k).dot(s_im.col(k));
    }
    return out;
}

void write_eigenvalues_csv(std::ostream& out, const CVector& eigenvalues) {
    csv::Writer w(out, {"re_s", "im_s"});
    for (Eigen::Index k = 0; k < eigenvalues.size(); ++k) {
        w.cell(eigenvalues(k).real()).cell(eigenvalues(k).imag());
        w.end_row();
    }
}

namespace {

struct RealizationResult {
    std::vector<double> driven_mean, driven_power;
    std::vector<double> free_mean, free_power, free_normalized;
    bool used_fallback = false;
    std::optional<CVector> eigenvalues;
};

RealizationResult run_realization(const CloudProfile& profile, const DriveParams& drive, const Protocol& protocol,
                                  std::uint64_t seed, const AverageOptions& options, bool keep_eigenvalues) {
    const auto ensemble = cloud::sample(profile, seed, options.r_min);
    const CoupledDipoleSystem sys(ensemble, drive);
    RealizationResult result;

    std::optional<SpectralDecomposition> decomposition;
    if (options.method != EvolutionMethod::integrate) {
        decomposition = spectral(sys);
        if (options.method == EvolutionMethod::automatic && decomposition->condition > kSpectralConditionLimit) {
            warn("realization seed " + std::to_string(seed) + ": eigenvector condition " +
                 csv::format(decomposition->condition) + " too large, integrating directly");
            decomposition.reset();
            result.used_fallback = true;
        } else if (keep_eigenvalues) {
            result.eigenvalues = decomposition->eigenvalues;
        }
    } else {
        result.used_fallback = true;
    }

    auto run = [&](const DipoleState& start, const std::vector<double>& times, Phase phase) {
        return decomposition ? evolve(sys, *decomposition, start, times, phase)
                             : evolve(sys, start, times, phase, EvolutionMethod::integrate);
    };

    if (!protocol.driven_times.empty()) {
        const auto traj = run(DipoleState{CVector::Zero(sys.size()), 0.0}, protocol.driven_times, Phase::driven);
        result.driven_mean = mean_excitation_series(traj);
        result.driven_power = total_power_series(traj, ensemble);
    }
    if (!protocol.free_times.empty()) {
        const auto traj = run(steady_state(sys), protocol.free_times, Phase::free);
        result.free_mean = mean_excitation_series(traj);
        result.free_power = total_power_series(traj, ensemble);
        result.free_normalized.resize(result.free_mean.size());
        const double start = result.free_mean.front();
        for (std::size_t k = 0; k < result.free_mean.size(); ++k) {
            result.free_normalized[k] = start > 0.0 ? result.free_mean[k] / start : 0.0;
        }
    }
    return result;
}

// Mean and standard error of column k over realizations, in realization order.
void reduce(const std::vector<RealizationResult>& results, std::vector<double> RealizationResult::*field,
            std::vector<double>& mean, std::vector<double>* error) {
    const std::size_t count = results.size();
    const std::size_t length = (results.front().*field).size();
    mean.assign(length, 0.0);
    if (error) error->assign(length, 0.0);
    for (std::size_t k = 0; k < length; ++k) {
        double sum = 0.0;
        for (const auto& r : results) sum += (r.*field)[k];
        const double m = sum / static_cast<double>(count);
        mean[k] = m;
        if (!error) continue;
        if (count < 2) {
            (*error)[k] = std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        double ss = 0.0;
        for (const auto& r : results) {
            const double d = (r.*field)[k] - m;
            ss += d * d;
        }
        (*error)[k] = std::sqrt(ss / static_cast<double>(count - 1) / static_cast<double>(count));
    }
}

}  // namespace

RealizationAverage realization_average(const CloudProfile& profile, const DriveParams& drive,
                                       const Protocol& protocol, int n_real, std::uint64_t seed,
                                       const AverageOptions& options) {
    if (n_real < 1) {
        throw std::invalid_argument("realization_average: n_real must be >= 1");
    }
    check_grid(protocol.driven_times);
    check_grid(protocol.free_times);

    const auto count = static_cast<std::size_t>(n_real);
    RealizationAverage out;
    out.seeds.resize(count);
    for (std::size_t k = 0; k < count; ++k) out.seeds[k] = derive_seed(seed, k);

    std::vector<RealizationResult> results(count);
    std::vector<std::string> failures(count);
    std::vector<char> failed(count, 0);
    std::atomic<std::size_t> next{0};
    std::atomic<bool> abort{false};

    auto worker = [&] {
        while (!abort.load()) {
            const std::size_t k = next.fetch_add(1);
            if (k >= count) return;
            try {
                results[k] = run_realization(profile, drive, protocol, out.seeds[k], options, k == 0);
            } catch (const std::exception& e) {
                failures[k] = e.what();
                failed[k] = 1;
                abort.store(true);
            }
        }
    };

    unsigned workers = options.workers ? options.workers : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(count));
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    }
    for (std::size_t k = 0; k < count; ++k) {
        if (failed[k]) throw RealizationError(k, out.seeds[k], failures[k]);
    }

    if (!protocol.driven_times.empty()) {
        reduce(results, &RealizationResult::driven_mean, out.driven.mean_beta2, &out.driven.stderr_beta2);
        reduce(results, &RealizationResult::driven_power, out.driven.power, &out.driven.stderr_power);
    }
    if (!protocol.free_times.empty()) {
        reduce(results, &RealizationResult::free_mean, out.free.mean_beta2, &out.free.stderr_beta2);
        reduce(results, &RealizationResult::free_power, out.free.power, &out.free.stderr_power);
        reduce(results, &RealizationResult::free_normalized, out.free_normalized, &out.stderr_free_normalized);
    }
    for (const auto& r : results) out.fallback_count += r.used_fallback ? 1 : 0;
    out.first_eigenvalues = results.front().eigenvalues;
    return out;
}

}  // namespace discrete
}  // namespace coop
