#include "coopscatter/harness.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <utility>

#include <json.hpp>

#include "coopscatter/csv.hpp"
#include "coopscatter/discrete.hpp"
#include "coopscatter/random.hpp"
#include "coopscatter/warnings.hpp"

#ifndef COOPSCATTER_VERSION
#define COOPSCATTER_VERSION "unknown"
#endif

namespace coop::harness {
namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

constexpr std::array kExperimentNames{"fig1", "fig2", "fig3", "fig4", "fig5",
                                      "fig6", "fig7", "fig8", "fig9", "custom"};

struct Preset {
    ProfileKind profile;
    double detuning;
    bool driven;
    bool free;
};

constexpr double kPresetSigma = 20.0;
constexpr int kPresetAtoms = 1000;
constexpr double kBuildUpTMax = 2.0, kBuildUpDt = 0.005;
constexpr double kDecayTMax = 6.0, kDecayDt = 0.01;

Preset preset(Experiment e) {
    switch (e) {
        case Experiment::fig1:
        case Experiment::fig2: return {ProfileKind::uniform, 10.0, false, false};
        case Experiment::fig3: return {ProfileKind::uniform, 10.0, true, false};
        case Experiment::fig4: return {ProfileKind::uniform, 10.0, false, true};
        case Experiment::fig5: return {ProfileKind::parabolic, 10.0, false, false};
        case Experiment::fig6: return {ProfileKind::gaussian, 10.0, false, false};
        case Experiment::fig7:
        case Experiment::fig9: return {ProfileKind::gaussian, 10.0, true, true};
        case Experiment::fig8: return {ProfileKind::gaussian, 0.0, true, true};
        case Experiment::custom: return {ProfileKind::uniform, 10.0, true, true};
    }
    throw std::logic_error("unknown experiment");
}

bool needs_discrete(Experiment e) {
    const auto p = preset(e);
    return p.driven || p.free;
}

template <class T>
T locked(const std::optional<T>& requested, T value, Experiment e, std::string_view field) {
    if (requested && *requested != value) {
        throw std::invalid_argument(std::string(to_string(e)) + " fixes " + std::string(field) +
                                    "; remove the override or use --experiment custom");
    }
    return value;
}

void require(bool ok, const std::string& message) {
    if (!ok) throw std::invalid_argument(message);
}

// Copies warnings into a list while still passing them on.
class WarningCapture {
public:
    explicit WarningCapture(std::vector<std::string>& into) : into_(into) {
        previous_ = set_warning_sink([this](std::string_view msg) {
            into_.emplace_back(msg);
            if (previous_) {
                previous_(msg);
            } else {
                std::cerr << "coopscatter: warning: " << msg << '\n';
            }
        });
    }
    ~WarningCapture() { set_warning_sink(std::move(previous_)); }
    WarningCapture(const WarningCapture&) = delete;
    WarningCapture& operator=(const WarningCapture&) = delete;

private:
    std::vector<std::string>& into_;
    WarningSink previous_;
};

class Output {
public:
    explicit Output(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

    std::ofstream open(const std::string& name) {
        const fs::path path = dir_ / name;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + path.string());
        files_.push_back(path);
        return out;
    }
    const fs::path& dir() const { return dir_; }
    std::vector<fs::path>& files() { return files_; }

private:
    fs::path dir_;
    std::vector<fs::path> files_;
};

json config_json(const ResolvedConfig& c) {
    return {
        {"experiment", to_string(c.experiment)},
        {"profile", to_string(c.profile.kind())},
        {"sigma", c.profile.sigma()},
        {"n_atoms", c.profile.n_atoms()},
        {"detuning", c.drive.detuning},
        {"rabi", c.drive.rabi},
        {"driven_t_max", c.driven_t_max},
        {"driven_dt", c.driven_dt},
        {"t_max", c.free_t_max},
        {"dt", c.free_dt},
        {"n_real", c.n_real},
        {"seed", c.seed},
        {"r_min", c.r_min},
        {"n_max", c.n_max},
        {"lamb_shift", to_string(c.lamb_shift)},
        {"workers", c.workers},
    };
}

const std::vector<std::string>& interpretations() {
    static const std::vector<std::string> list{
        "parabolic omega_n = (lambda_n/2) y_n(sigma)/j_n(sigma) with the parabolic lambda_n",
        "omega_n is set to 0 (with a warning) when n < sigma and |j_n(sigma)| < 1e-12",
        "discrete free runs start from the direct steady-state solve; driven runs start from beta = 0",
        "normalized free decay is the realization mean of |beta(t)|^2/|beta(0)|^2",
        "discrete total power uses sinc(0) = 1 on the diagonal",
    };
    return list;
}

json base_manifest(const ResolvedConfig& c) {
    const auto ot = meanfield::optical_thickness(c.profile, c.drive.detuning);
    return {
        {"tool", "coopscatter"},
        {"version", version()},
        {"config", config_json(c)},
        {"rng", kRngName},
        {"optical_thickness", {{"b0", ot.b0}, {"b", ot.b}, {"multiple_scattering_regime", ot.warn}}},
        {"lamb_shift", to_string(c.lamb_shift)},
        {"typo_resolutions", typo_resolutions()},
        {"interpretations", interpretations()},
    };
}

RunResult finish(Output& out, json manifest, std::vector<std::string> warnings,
                 std::chrono::steady_clock::time_point start) {
    json names = json::array();
    for (const auto& f : out.files()) names.push_back(f.filename().string());
    manifest["outputs"] = names;
    manifest["warnings"] = warnings;
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    manifest["wall_clock_seconds"] = wall;

    auto stream = out.open("manifest.json");
    stream << manifest.dump(2) << '\n';
    if (!stream) throw std::runtime_error("failed writing manifest.json");

    RunResult result;
    result.files = out.files();
    result.manifest = out.files().back();
    result.warnings = std::move(warnings);
    result.wall_seconds = wall;
    return result;
}

void warn_regime(const ResolvedConfig& c) {
    const auto ot = meanfield::optical_thickness(c.profile, c.drive.detuning);
    if (ot.warn) {
        warn("optical thickness b = " + csv::format(ot.b) +
             " >= 1: multiple-scattering regime, the mean-field model is not expected to hold");
    }
}

json spectrum_json(const ModeSpectrum& s) {
    return {{"n_max", s.n_max},
            {"sum_rule_residual", s.sum_rule_residual()},
            {"singular_shift_modes", s.singular_shift_modes}};
}

void write_spectrum_figure(Output& out, const ResolvedConfig& c, const ModeSpectrum& s) {
    const double n = c.profile.n_atoms();
    const double sigma = c.profile.sigma();
    const double sigma2 = sigma * sigma;
    const std::string name = std::string(to_string(c.experiment)) + ".csv";
    auto stream = out.open(name);
    switch (c.experiment) {
        case Experiment::fig1: {
            csv::Writer w(stream, {"n", "lambda_over_N", "plateau_over_N"});
            for (int k = 0; k <= s.n_max; ++k) {
                w.cell(static_cast<long long>(k)).cell(s.lambda[k] / n).cell(1.5 / sigma2).end_row();
            }
            break;
        }
        case Experiment::fig2: {
            // omega_n ~ (3N/4 sigma^2) {tan sigma, -cot sigma} for n odd / even
            const double scale = 0.75 / sigma2;
            csv::Writer w(stream, {"n", "omega_over_N", "odd_ref_over_N", "even_ref_over_N"});
            for (int k = 0; k <= s.n_max; ++k) {
                w.cell(static_cast<long long>(k))
                    .cell(s.omega[k] / n)
                    .cell(scale * std::tan(sigma))
                    .cell(-scale / std::tan(sigma))
                    .end_row();
            }
            break;
        }
        case Experiment::fig5: {
            csv::Writer w(stream, {"n", "lambda_over_N", "omega_over_N", "plateau_over_N"});
            for (int k = 0; k <= s.n_max; ++k) {
                w.cell(static_cast<long long>(k)).cell(s.lambda[k] / n).cell(s.omega[k] / n).cell(2.5 / sigma2).end_row();
            }
            break;
        }
        case Experiment::fig6: {
            csv::Writer w(stream, {"n", "lambda_over_N", "continuum_over_N"});
            for (int k = 0; k <= s.n_max; ++k) {
                const double m = k + 0.5;
                w.cell(static_cast<long long>(k))
                    .cell(s.lambda[k] / n)
                    .cell(std::exp(-m * m / (2 * sigma2)) / (2 * sigma2))
                    .end_row();
            }
            break;
        }
        default: throw std::logic_error("not a spectrum figure");
    }
}

struct MfSeries {
    std::vector<double> beta2, power;
};

MfSeries mf_series(const ModeEvolution& evo, const std::vector<double>& times, Phase phase) {
    MfSeries out;
    out.beta2.reserve(times.size());
    out.power.reserve(times.size());
    for (double t : times) {
        out.beta2.push_back(meanfield::mean_excitation(evo, t, phase));
        out.power.push_back(meanfield::total_power(evo, t, phase));
    }
    return out;
}

// Writes one dynamics CSV; `columns` pairs a header with a series.
void write_series(Output& out, const std::string& name, const std::vector<double>& times,
                  const std::vector<std::pair<std::string, const std::vector<double>*>>& columns) {
    std::vector<std::string> header{"t_gamma"};
    for (const auto& [h, _] : columns) header.push_back(h);
    auto stream = out.open(name);
    csv::Writer w(stream, header);
    for (std::size_t k = 0; k < times.size(); ++k) {
        w.cell(times[k]);
        for (const auto& [_, series] : columns) w.cell((*series)[k]);
        w.end_row();
    }
}

RunResult run_dynamics(Output& out, const ResolvedConfig& c, const ModeSpectrum& spectrum, json manifest,
                       std::vector<std::string>& warnings, std::chrono::steady_clock::time_point start) {
    const auto p = preset(c.experiment);
    const auto driven_times = p.driven ? time_grid(c.driven_t_max, c.driven_dt) : std::vector<double>{};
    const auto free_times = p.free ? time_grid(c.free_t_max, c.free_dt) : std::vector<double>{};
    const ModeEvolution evo(spectrum, c.drive, c.lamb_shift);
    const auto mf_driven = mf_series(evo, driven_times, Phase::driven);
    const auto mf_free = mf_series(evo, free_times, Phase::free);

    std::optional<discrete::RealizationAverage> avg;
    if (c.n_real > 0) {
        discrete::AverageOptions options;
        options.r_min = c.r_min;
        options.workers = c.workers;
        avg = discrete::realization_average(c.profile, c.drive, {driven_times, free_times}, c.n_real, c.seed,
                                            options);
        manifest["discrete"] = {{"realization_seeds", avg->seeds},
                                {"integrator_fallbacks", avg->fallback_count},
                                {"evolution", avg->fallback_count > 0 ? "spectral with integrator fallback"
                                                                      : "spectral"}};
    }

    const double lambda_n = meanfield::plateau_rate(c.profile);
    std::vector<double> mf_normalized, single_atom, superradiant, td;
    for (std::size_t k = 0; k < free_times.size(); ++k) {
        mf_normalized.push_back(mf_free.beta2[0] > 0 ? mf_free.beta2[k] / mf_free.beta2[0] : 0.0);
        single_atom.push_back(std::exp(-free_times[k]));
        superradiant.push_back(std::exp(-lambda_n * free_times[k]));
    }
    for (double t : driven_times) td.push_back(meanfield::timed_dicke_mean(spectrum, c.drive, t));

    const std::string id(to_string(c.experiment));
    using Cols = std::vector<std::pair<std::string, const std::vector<double>*>>;
    switch (c.experiment) {
        case Experiment::fig3: {
            write_series(out, "fig3.csv", driven_times,
                         {{"mf_beta2", &mf_driven.beta2},
                          {"timed_dicke_beta2", &td},
                          {"discrete_beta2", &avg->driven.mean_beta2},
                          {"discrete_stderr_beta2", &avg->driven.stderr_beta2}});
            break;
        }
        case Experiment::fig4: {
            write_series(out, "fig4.csv", free_times,
                         {{"mf_normalized", &mf_normalized},
                          {"discrete_normalized", &avg->free_normalized},
                          {"discrete_stderr_normalized", &avg->stderr_free_normalized},
                          {"superradiant_ref", &superradiant},
                          {"single_atom_ref", &single_atom}});
            manifest["references"] = {{"superradiant_ref", "exp(-lambda_N t)"},
                                      {"single_atom_ref", "exp(-t)"},
                                      {"lambda_N", lambda_n}};
            break;
        }
        case Experiment::fig7:
        case Experiment::fig8: {
            const auto branch = meanfield::ContinuumBranch::integral;
            std::vector<double> continuum, single;
            for (double t : free_times) {
                continuum.push_back(meanfield::gaussian_continuum_free_mean(c.profile.sigma(), c.profile.n_atoms(),
                                                                            c.drive, t, branch));
                single.push_back(mf_free.beta2.front() * std::exp(-t));
            }
            write_series(out, id + "_driven.csv", driven_times,
                         {{"mf_beta2", &mf_driven.beta2},
                          {"discrete_beta2", &avg->driven.mean_beta2},
                          {"discrete_stderr_beta2", &avg->driven.stderr_beta2}});
            write_series(out, id + "_free.csv", free_times,
                         {{"mf_beta2", &mf_free.beta2},
                          {"continuum_beta2", &continuum},
                          {"discrete_beta2", &avg->free.mean_beta2},
                          {"discrete_stderr_beta2", &avg->free.stderr_beta2},
                          {"single_atom_ref", &single}});
            manifest["references"] = {{"continuum_branch", to_string(branch)},
                                      {"single_atom_ref", "mf_beta2(0) exp(-t)"},
                                      {"free_time_origin", "laser switch-off at the steady state"}};
            break;
        }
        case Experiment::fig9: {
            write_series(out, "fig9_driven.csv", driven_times,
                         {{"mf_power", &mf_driven.power},
                          {"discrete_power", &avg->driven.power},
                          {"discrete_stderr_power", &avg->driven.stderr_power}});
            write_series(out, "fig9_free.csv", free_times,
                         {{"mf_power", &mf_free.power},
                          {"discrete_power", &avg->free.power},
                          {"discrete_stderr_power", &avg->free.stderr_power}});
            manifest["references"] = {{"free_time_origin", "laser switch-off at the steady state"}};
            break;
        }
        case Experiment::custom: {
            {
                auto stream = out.open("spectrum.csv");
                meanfield::write_csv(stream, spectrum);
            }
            Cols driven{{"mf_beta2", &mf_driven.beta2}, {"mf_power", &mf_driven.power}, {"timed_dicke_beta2", &td}};
            Cols free{{"mf_beta2", &mf_free.beta2}, {"mf_normalized", &mf_normalized}, {"mf_power", &mf_free.power}};
            if (avg) {
                driven.insert(driven.end(), {{"discrete_beta2", &avg->driven.mean_beta2},
                                             {"discrete_stderr_beta2", &avg->driven.stderr_beta2},
                                             {"discrete_power", &avg->driven.power},
                                             {"discrete_stderr_power", &avg->driven.stderr_power}});
                free.insert(free.end(), {{"discrete_beta2", &avg->free.mean_beta2},
                                         {"discrete_stderr_beta2", &avg->free.stderr_beta2},
                                         {"discrete_normalized", &avg->free_normalized},
                                         {"discrete_stderr_normalized", &avg->stderr_free_normalized},
                                         {"discrete_power", &avg->free.power},
                                         {"discrete_stderr_power", &avg->free.stderr_power}});
            }
            free.emplace_back("single_atom_ref", &single_atom);
            write_series(out, "custom_driven.csv", driven_times, driven);
            write_series(out, "custom_free.csv", free_times, free);
            break;
        }
        default: throw std::logic_error("not a dynamics figure");
    }

    if (avg && avg->first_eigenvalues) {
        auto stream = out.open("discrete_eigenvalues.csv");
        discrete::write_eigenvalues_csv(stream, *avg->first_eigenvalues);
    }
    return finish(out, std::move(manifest), std::move(warnings), start);
}

}  // namespace

std::string_view to_string(Experiment experiment) {
    return kExperimentNames.at(static_cast<std::size_t>(experiment));
}

Experiment parse_experiment(std::string_view name) {
    for (std::size_t k = 0; k < kExperimentNames.size(); ++k) {
        if (name == kExperimentNames[k]) return static_cast<Experiment>(k);
    }
    throw std::invalid_argument("unknown experiment '" + std::string(name) + "' (expected fig1..fig9 or custom)");
}

std::string version() { return COOPSCATTER_VERSION; }

const std::vector<std::string>& typo_resolutions() {
    static const std::vector<std::string> list{
        "gaussian lambda_n prefactor: (N/sigma) sqrt(pi/2) e^{-sigma^2} I_{n+1/2}(sigma^2), not N sqrt(pi/(2 sigma)) ...",
        "timed-Dicke mean excitation: the 1/N prefactor is dropped",
        "dP/dOmega denominator read as 2(delta - omega_n) + i(1 + lambda_n)",
        "angular intensity integrand read as |E_s(k)|^2 r^2",
        "gaussian late-time coefficient is (Gamma/(Gamma + Gamma_sr))^2",
        "uniform large-n tail is 3 pi N / (8 n^2 (n!)^2) (sigma^2/4)^n",
    };
    return list;
}

std::vector<double> time_grid(double t_max, double dt) {
    require(std::isfinite(t_max) && t_max >= 0.0, "t_max must be finite and >= 0");
    require(std::isfinite(dt) && dt > 0.0, "dt must be finite and > 0");
    const double steps = std::round(t_max / dt);
    require(steps <= 1e7, "time grid has more than 1e7 points");
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(steps) + 1);
    for (long long k = 0; k <= static_cast<long long>(steps); ++k) out.push_back(static_cast<double>(k) * dt);
    return out;
}

ResolvedConfig resolve(const RunConfig& c) {
    const Experiment e = c.experiment;
    const auto p = preset(e);
    ProfileKind kind;
    double sigma, detuning;
    int n_atoms;
    double driven_t_max, driven_dt, free_t_max, free_dt;
    if (e == Experiment::custom) {
        kind = c.profile.value_or(p.profile);
        sigma = c.sigma.value_or(kPresetSigma);
        n_atoms = c.n_atoms.value_or(kPresetAtoms);
        detuning = c.detuning.value_or(p.detuning);
        free_t_max = c.t_max.value_or(kDecayTMax);
        free_dt = c.dt.value_or(kDecayDt);
        driven_t_max = c.driven_t_max.value_or(free_t_max);
        driven_dt = c.driven_dt.value_or(free_dt);
    } else {
        if (e == Experiment::fig2 && c.profile && *c.profile != ProfileKind::uniform) {
            throw std::invalid_argument("fig2 shows the uniform-sphere Lamb shifts; profile " +
                                        std::string(to_string(*c.profile)) + " is not supported");
        }
        kind = locked(c.profile, p.profile, e, "profile");
        sigma = locked(c.sigma, kPresetSigma, e, "sigma");
        n_atoms = locked(c.n_atoms, kPresetAtoms, e, "n_atoms");
        detuning = locked(c.detuning, p.detuning, e, "detuning");
        driven_t_max = c.driven_t_max.value_or(kBuildUpTMax);
        driven_dt = c.driven_dt.value_or(kBuildUpDt);
        free_t_max = c.t_max.value_or(kDecayTMax);
        free_dt = c.dt.value_or(kDecayDt);
    }
    require(std::isfinite(sigma) && sigma > 0.0, "sigma must be finite and > 0");
    require(n_atoms >= 1, "n_atoms must be >= 1");
    require(std::isfinite(detuning), "detuning must be finite");
    require(std::isfinite(c.rabi) && c.rabi >= 0.0, "rabi must be finite and >= 0");
    require(std::isfinite(c.r_min) && c.r_min >= 0.0, "r_min must be finite and >= 0");
    require(c.n_max >= meanfield::kAutoOrder, "n_max must be >= 0 (or -1 for automatic)");
    const int n_real = c.n_real.value_or(kDefaultRealizations);
    require(n_real >= 0, "n_real must be >= 0");
    if (e != Experiment::custom && needs_discrete(e)) {
        require(n_real >= 1, std::string(to_string(e)) + " compares against the discrete model; n_real must be >= 1");
    }
    // validates the grids
    time_grid(driven_t_max, driven_dt);
    time_grid(free_t_max, free_dt);

    return ResolvedConfig{e,
                          CloudProfile(kind, sigma, n_atoms),
                          DriveParams{detuning, c.rabi},
                          driven_t_max,
                          driven_dt,
                          free_t_max,
                          free_dt,
                          n_real,
                          c.seed,
                          c.r_min,
                          c.n_max,
                          c.lamb_shift,
                          c.workers,
                          c.out_dir};
}

RunResult run(const RunConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    const ResolvedConfig c = resolve(config);
    std::vector<std::string> warnings;
    Output out(c.out_dir);
    json manifest = base_manifest(c);
    {
        WarningCapture capture(warnings);
        warn_regime(c);
        const ModeSpectrum spectrum = meanfield::mode_spectrum(c.profile, c.n_max);
        manifest["spectrum"] = spectrum_json(spectrum);
        if (!needs_discrete(c.experiment)) {
            write_spectrum_figure(out, c, spectrum);
        } else {
            return run_dynamics(out, c, spectrum, std::move(manifest), warnings, start);
        }
    }
    return finish(out, std::move(manifest), std::move(warnings), start);
}

RunResult run_spectrum(const RunConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    RunConfig custom = config;
    custom.experiment = Experiment::custom;
    const ResolvedConfig c = resolve(custom);
    std::vector<std::string> warnings;
    Output out(c.out_dir);
    json manifest = base_manifest(c);
    manifest["command"] = "spectrum";
    {
        WarningCapture capture(warnings);
        const ModeSpectrum spectrum = meanfield::mode_spectrum(c.profile, c.n_max);
        manifest["spectrum"] = spectrum_json(spectrum);
        auto stream = out.open("spectrum.csv");
        meanfield::write_csv(stream, spectrum);
    }
    return finish(out, std::move(manifest), std::move(warnings), start);
}

}  // namespace coop::harness
