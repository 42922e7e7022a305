#include "coopscatter/cloud.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>

#include "coopscatter/csv.hpp"
#include "coopscatter/errors.hpp"
#include "coopscatter/random.hpp"

namespace coop {

std::string_view to_string(ProfileKind kind) {
    switch (kind) {
        case ProfileKind::uniform: return "uniform";
        case ProfileKind::parabolic: return "parabolic";
        case ProfileKind::gaussian: return "gaussian";
    }
    return "unknown";
}

ProfileKind parse_profile_kind(std::string_view name) {
    if (name == "uniform") return ProfileKind::uniform;
    if (name == "parabolic") return ProfileKind::parabolic;
    if (name == "gaussian") return ProfileKind::gaussian;
    throw std::invalid_argument("unknown profile '" + std::string(name) +
                                "' (expected uniform, parabolic or gaussian)");
}

CloudProfile::CloudProfile(ProfileKind kind, double sigma, int n_atoms)
    : kind_(kind), sigma_(sigma), n_atoms_(n_atoms) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw std::invalid_argument("CloudProfile: sigma must be finite and > 0");
    }
    if (n_atoms < 1) {
        throw std::invalid_argument("CloudProfile: atom number must be >= 1");
    }
}

double CloudProfile::support_radius() const noexcept {
    return kind_ == ProfileKind::gaussian ? std::numeric_limits<double>::infinity() : sigma_;
}

namespace cloud {
namespace {

constexpr double kPi = std::numbers::pi;

// Radius that contains all but ~1e-30 of a Gaussian cloud's atoms.
double search_ceiling(const CloudProfile& p) {
    return p.kind() == ProfileKind::gaussian ? 13.0 * p.sigma() : p.sigma();
}

// Probability density of the radius, d/dr radial_cdf.
double radial_pdf(const CloudProfile& p, double r) {
    return 4.0 * kPi * r * r * density(p, r) / p.n_atoms();
}

}  // namespace

double density(const CloudProfile& p, double r) {
    if (r < 0.0) {
        throw std::invalid_argument("density: r must be >= 0");
    }
    const double s = p.sigma();
    const double n = p.n_atoms();
    switch (p.kind()) {
        case ProfileKind::uniform:
            return r <= s ? 3.0 * n / (4.0 * kPi * s * s * s) : 0.0;
        case ProfileKind::parabolic:
            return r < s ? 15.0 * n / (8.0 * kPi * s * s * s) * (1.0 - r * r / (s * s)) : 0.0;
        case ProfileKind::gaussian:
            return n / (std::pow(2.0 * kPi, 1.5) * s * s * s) * std::exp(-r * r / (2.0 * s * s));
    }
    return 0.0;
}

double radial_cdf(const CloudProfile& p, double r) {
    if (r <= 0.0) return 0.0;
    const double u = r / p.sigma();
    switch (p.kind()) {
        case ProfileKind::uniform:
            return u >= 1.0 ? 1.0 : u * u * u;
        case ProfileKind::parabolic:
            return u >= 1.0 ? 1.0 : 0.5 * u * u * u * (5.0 - 3.0 * u * u);
        case ProfileKind::gaussian: {
            // Maxwell distribution of |r| for an isotropic Gaussian
            const double v = u / std::numbers::sqrt2;
            return std::erf(v) - std::sqrt(2.0 / kPi) * u * std::exp(-0.5 * u * u);
        }
    }
    return 0.0;
}

double radial_quantile(const CloudProfile& p, double u) {
    if (!(u >= 0.0 && u < 1.0)) {
        throw std::invalid_argument("radial_quantile: u must lie in [0, 1)");
    }
    if (p.kind() == ProfileKind::uniform) {
        return p.sigma() * std::cbrt(u);
    }
    // Safeguarded Newton on the monotone closed-form CDF.
    double lo = 0.0;
    double hi = search_ceiling(p);
    double r = p.kind() == ProfileKind::gaussian ? p.sigma() * 1.5 : p.sigma() * std::cbrt(u);
    for (int iter = 0; iter < 200; ++iter) {
        const double f = radial_cdf(p, r) - u;
        if (f > 0.0) {
            hi = r;
        } else {
            lo = r;
        }
        const double slope = radial_pdf(p, r);
        double next = slope > 0.0 ? r - f / slope : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) {
            next = 0.5 * (lo + hi);
        }
        if (std::abs(next - r) <= 1e-15 * std::max(1.0, r) || hi - lo <= 1e-15 * hi) {
            return next;
        }
        r = next;
    }
    return r;
}

AtomEnsemble sample(const CloudProfile& profile, std::uint64_t seed, double r_min,
                    std::size_t retry_budget) {
    if (!(r_min >= 0.0)) {
        throw std::invalid_argument("sample: r_min must be >= 0");
    }
    Rng rng(seed);
    AtomEnsemble ensemble;
    ensemble.seed = seed;
    ensemble.r_min = r_min;
    const auto n = static_cast<std::size_t>(profile.n_atoms());
    ensemble.positions.reserve(n);
    const double r_min_sq = r_min * r_min;

    for (std::size_t i = 0; i < n; ++i) {
        std::size_t rejected = 0;
        while (true) {
            const double radius = radial_quantile(profile, uniform01(rng));
            const double cos_theta = 2.0 * uniform01(rng) - 1.0;
            const double phi = 2.0 * kPi * uniform01(rng);
            const double sin_theta = std::sqrt(std::max(0.0, 1.0 - cos_theta * cos_theta));
            const Vec3 candidate{radius * sin_theta * std::cos(phi), radius * sin_theta * std::sin(phi),
                                 radius * cos_theta};
            bool accepted = true;
            for (const Vec3& other : ensemble.positions) {
                const double dx = candidate.x - other.x;
                const double dy = candidate.y - other.y;
                const double dz = candidate.z - other.z;
                if (dx * dx + dy * dy + dz * dz < r_min_sq) {
                    accepted = false;
                    break;
                }
            }
            if (accepted) {
                ensemble.positions.push_back(candidate);
                break;
            }
            if (++rejected > retry_budget) {
                throw PackingInfeasible(i, rejected);
            }
        }
    }
    return ensemble;
}

double min_pair_separation(const AtomEnsemble& ensemble) {
    double best = std::numeric_limits<double>::infinity();
    const auto& pos = ensemble.positions;
    for (std::size_t i = 0; i < pos.size(); ++i) {
        for (std::size_t j = i + 1; j < pos.size(); ++j) {
            best = std::min(best, distance(pos[i], pos[j]));
        }
    }
    return best;
}

void write_csv(std::ostream& out, const AtomEnsemble& ensemble) {
    csv::Writer w(out, {"atom_index", "x", "y", "z"});
    for (std::size_t i = 0; i < ensemble.positions.size(); ++i) {
        const auto& p = ensemble.positions[i];
        w.cell(static_cast<long long>(i)).cell(p.x).cell(p.y).cell(p.z);
        w.end_row();
    }
}

}  // namespace cloud
}  // namespace coop
