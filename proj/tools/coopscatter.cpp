// coopscatter: figure runs, mode spectra and the acceptance suite.
//
// Exit codes: 0 success, 1 acceptance failure, 2 bad arguments, 3 runtime error.

#include <CLI11.hpp>

#include <algorithm>
#include <exception>
#include <fstream>
#include <iostream>

#include "coopscatter/errors.hpp"
#include "coopscatter/harness.hpp"

namespace {

namespace h = coop::harness;

constexpr int kExitAcceptance = 1;
constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

struct Args {
    h::RunConfig config;
    std::string experiment = "custom";
    std::optional<std::string> profile;
    std::string lamb_shift = "neglect";
};

void add_cloud_options(CLI::App* app, Args& a) {
    app->add_option("--profile", a.profile, "uniform | parabolic | gaussian")
        ->check(CLI::IsMember({"uniform", "parabolic", "gaussian"}));
    app->add_option("--sigma", a.config.sigma, "k0 R (k0 sigma_R for the Gaussian)");
    app->add_option("--n-atoms", a.config.n_atoms, "number of atoms N");
    app->add_option("--n-max", a.config.n_max, "mode truncation (-1: automatic)")->default_val(-1);
}

void add_run_options(CLI::App* app, Args& a) {
    app->add_option("--delta", a.config.detuning, "detuning delta in units of Gamma");
    app->add_option("--rabi", a.config.rabi, "Omega0/Gamma")->default_val(1.0);
    app->add_option("--t-max", a.config.t_max, "free-decay window (custom: both phases)");
    app->add_option("--dt", a.config.dt, "free-decay step");
    app->add_option("--driven-t-max", a.config.driven_t_max, "build-up window");
    app->add_option("--driven-dt", a.config.driven_dt, "build-up step");
    app->add_option("--n-real", a.config.n_real, "disorder realizations (default 8; 0 skips the discrete model in custom runs)");
    app->add_option("--seed", a.config.seed, "base seed")->default_val(h::kDefaultSeed);
    app->add_option("--r-min", a.config.r_min, "minimum pair separation in 1/k0")->default_val(a.config.r_min);
    app->add_option("--lamb-shift", a.lamb_shift, "neglect | include")
        ->check(CLI::IsMember({"neglect", "include"}))
        ->default_val("neglect");
    app->add_option("--workers", a.config.workers, "worker threads for realizations (0: all cores)")->default_val(0);
}

void finalize(Args& a) {
    if (a.profile) a.config.profile = coop::parse_profile_kind(*a.profile);
    a.config.lamb_shift = coop::parse_lamb_shift(a.lamb_shift);
}

// Replaces "--config FILE" with the flags it contains, placed right after the
// subcommand so that explicit flags given later win.
std::vector<std::string> expand_config(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    for (std::size_t k = 0; k < args.size(); ++k) {
        std::string file;
        std::size_t erase = 0;
        if (args[k] == "--config" && k + 1 < args.size()) {
            file = args[k + 1];
            erase = 2;
        } else if (args[k].rfind("--config=", 0) == 0) {
            file = args[k].substr(9);
            erase = 1;
        } else {
            continue;
        }
        args.erase(args.begin() + static_cast<std::ptrdiff_t>(k), args.begin() + static_cast<std::ptrdiff_t>(k + erase));
        const std::string command = args.empty() ? "" : args.front();
        std::vector<std::string> flags;
        for (const auto& item : CLI::ConfigTOML().from_file(file)) {
            if (item.name == "++" || item.name == "--") continue;
            if (!item.parents.empty() && item.parents.front() != command) continue;
            std::string key = item.name;
            std::replace(key.begin(), key.end(), '_', '-');
            flags.push_back("--" + key);
            for (const auto& value : item.inputs) flags.push_back(value);
        }
        args.insert(args.begin() + (args.empty() ? 0 : 1), flags.begin(), flags.end());
        break;
    }
    std::reverse(args.begin(), args.end());  // CLI11 consumes a reversed vector
    return args;
}

void print_result(const h::RunResult& result) {
    for (const auto& f : result.files) std::cout << f.string() << '\n';
    std::cout << "done in " << result.wall_seconds << " s";
    if (!result.warnings.empty()) std::cout << " with " << result.warnings.size() << " warning(s)";
    std::cout << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cooperative scattering by cold atomic clouds: mean-field and coupled-dipole runs"};
    app.require_subcommand(1);
    app.set_version_flag("--version", h::version());

    Args run_args, spectrum_args;

    auto* run = app.add_subcommand("run", "reproduce a figure (fig1..fig9) or a custom configuration");
    run->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    run->add_option("--experiment", run_args.experiment, "fig1..fig9 | custom")->default_val("custom");
    run->add_option("--out", run_args.config.out_dir, "output directory")->required();
    add_cloud_options(run, run_args);
    add_run_options(run, run_args);

    auto* spectrum = app.add_subcommand("spectrum", "write lambda_n, omega_n for one cloud");
    spectrum->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    spectrum->add_option("--out", spectrum_args.config.out_dir, "output directory")->required();
    add_cloud_options(spectrum, spectrum_args);

    h::AcceptOptions accept_opts;
    std::filesystem::path accept_out;
    auto* accept = app.add_subcommand("accept", "run the acceptance suite and write acceptance.json");
    accept->add_option("--out", accept_out, "directory for acceptance.json")->required();
    accept->add_option("--seed", accept_opts.seed, "base seed")->default_val(h::kDefaultSeed);
    accept->add_option("--n-real", accept_opts.n_real, "disorder realizations")->default_val(h::kDefaultRealizations);
    accept->add_option("--workers", accept_opts.workers, "worker threads (0: all cores)")->default_val(0);
    accept->add_option("--only", accept_opts.only, "run only these criteria")->delimiter(',');

    app.footer("All subcommands accept --config FILE: a TOML/INI file whose keys are the flag names\n"
               "(top level, or in a section named after the subcommand). Later flags override it.");

    try {
        auto args = expand_config(argc, argv);
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*run) {
            finalize(run_args);
            run_args.config.experiment = h::parse_experiment(run_args.experiment);
            print_result(h::run(run_args.config));
        } else if (*spectrum) {
            finalize(spectrum_args);
            print_result(h::run_spectrum(spectrum_args.config));
        } else if (*accept) {
            for (const auto& name : accept_opts.only) {
                const auto& names = h::criterion_names();
                if (std::find(names.begin(), names.end(), name) == names.end()) {
                    throw std::invalid_argument("unknown criterion '" + name + "'");
                }
            }
            accept_opts.on_result = [](const h::Criterion& c) {
                std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << "  measured=" << c.measured
                          << " target=" << c.target << " tol=" << c.tolerance << "  (" << c.detail << ")"
                          << std::endl;
            };
            const auto report = h::accept(accept_opts);
            std::filesystem::create_directories(accept_out);
            const auto path = accept_out / "acceptance.json";
            std::ofstream out(path);
            out << report.to_json() << '\n';
            if (!out) throw std::runtime_error("cannot write " + path.string());
            std::cout << path.string() << '\n';
            return report.all_passed() ? 0 : kExitAcceptance;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "coopscatter: error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "coopscatter: error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return 0;
}
