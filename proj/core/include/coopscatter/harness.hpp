#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "coopscatter/cloud.hpp"
#include "coopscatter/meanfield.hpp"

/// Figure reproduction runs, run manifests and the acceptance suite.
namespace coop::harness {

enum class Experiment { fig1, fig2, fig3, fig4, fig5, fig6, fig7, fig8, fig9, custom };
std::string_view to_string(Experiment experiment);
/// "fig1".."fig9", "custom"; throws std::invalid_argument otherwise.
Experiment parse_experiment(std::string_view name);

inline constexpr std::uint64_t kDefaultSeed = 42;
inline constexpr int kDefaultRealizations = 8;

/// What the user asked for. Unset physical fields take the preset (or custom
/// default) value; a set field that contradicts a preset is an error.
struct RunConfig {
    Experiment experiment = Experiment::custom;
    std::optional<ProfileKind> profile;
    std::optional<double> sigma;
    std::optional<int> n_atoms;
    std::optional<double> detuning;
    double rabi = 1.0;
    std::optional<double> t_max;         ///< free-decay window (custom: both phases)
    std::optional<double> dt;
    std::optional<double> driven_t_max;  ///< build-up window
    std::optional<double> driven_dt;
    std::optional<int> n_real;
    std::uint64_t seed = kDefaultSeed;
    double r_min = cloud::kDefaultMinSeparation;
    int n_max = meanfield::kAutoOrder;
    LambShift lamb_shift = LambShift::neglect;
    unsigned workers = 0;
    std::filesystem::path out_dir = ".";
};

/// Fully specified parameters of one run.
struct ResolvedConfig {
    Experiment experiment;
    CloudProfile profile;
    DriveParams drive;
    double driven_t_max, driven_dt;
    double free_t_max, free_dt;
    int n_real;
    std::uint64_t seed;
    double r_min;
    int n_max;
    LambShift lamb_shift;
    unsigned workers;
    std::filesystem::path out_dir;
};

/// Applies presets and validates. Throws std::invalid_argument with a
/// message naming the offending field.
ResolvedConfig resolve(const RunConfig& config);

/// k dt for k = 0..round(t_max/dt).
std::vector<double> time_grid(double t_max, double dt);

struct RunResult {
    std::vector<std::filesystem::path> files;  ///< CSVs, then manifest.json last
    std::filesystem::path manifest;
    std::vector<std::string> warnings;
    double wall_seconds = 0.0;
};

/// Writes the experiment's CSVs and manifest.json into out_dir (created if needed).
RunResult run(const RunConfig& config);

/// spectrum.csv (n, lambda_over_N, omega_over_N) plus manifest.json.
RunResult run_spectrum(const RunConfig& config);

/// Suspected typos in the source formulas and how they are resolved; copied
/// into every manifest.
const std::vector<std::string>& typo_resolutions();

std::string version();

// ---------------------------------------------------------------- acceptance

struct Criterion {
    std::string name;
    bool passed = false;
    double measured = 0.0;
    double target = 0.0;
    double tolerance = 0.0;
    std::string comparison;  ///< how measured, target and tolerance relate
    std::string detail;
    double seconds = 0.0;
};

struct AcceptanceReport {
    std::vector<Criterion> criteria;
    std::uint64_t seed = kDefaultSeed;
    int n_real = kDefaultRealizations;
    double wall_seconds = 0.0;

    bool all_passed() const;
    std::string to_json() const;
};

struct AcceptOptions {
    std::uint64_t seed = kDefaultSeed;
    int n_real = kDefaultRealizations;
    unsigned workers = 0;
    /// Scratch space for the determinism reruns; a temporary directory when empty.
    std::filesystem::path scratch_dir;
    /// Applied to every spectrum the sum-rule criterion inspects (negative controls).
    std::function<void(ModeSpectrum&)> spectrum_fault;
    /// Restrict to these criterion names; all when empty.
    std::vector<std::string> only;
    /// Called after each criterion finishes.
    std::function<void(const Criterion&)> on_result;
};

/// Names of all criteria, in execution order.
const std::vector<std::string>& criterion_names();

/// Runs the acceptance suite. Failures are report entries, never exceptions;
/// an exception inside a criterion fails that criterion with its message.
AcceptanceReport accept(const AcceptOptions& options = {});

}  // namespace coop::harness
