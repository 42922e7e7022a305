#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <vector>

namespace coop {

enum class ProfileKind { uniform, parabolic, gaussian };

std::string_view to_string(ProfileKind kind);
/// Accepts "uniform", "parabolic", "gaussian"; throws std::invalid_argument otherwise.
ProfileKind parse_profile_kind(std::string_view name);

/// Spherical cloud. `sigma` is k0 R for the sharp-edged profiles and k0 sigma_R
/// for the Gaussian; every length in the library is measured in units of 1/k0.
class CloudProfile {
public:
    /// Throws std::invalid_argument unless sigma > 0 (finite) and n_atoms >= 1.
    CloudProfile(ProfileKind kind, double sigma, int n_atoms);

    ProfileKind kind() const noexcept { return kind_; }
    double sigma() const noexcept { return sigma_; }
    int n_atoms() const noexcept { return n_atoms_; }

    /// Radius beyond which the density vanishes (sigma), or +inf for the Gaussian.
    double support_radius() const noexcept;

    friend bool operator==(const CloudProfile&, const CloudProfile&) = default;

private:
    ProfileKind kind_;
    double sigma_;
    int n_atoms_;
};

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

inline double distance(const Vec3& a, const Vec3& b) {
    const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

/// One disorder realization: atom positions in units of 1/k0.
struct AtomEnsemble {
    std::vector<Vec3> positions;
    std::uint64_t seed = 0;
    double r_min = 1e-3;

    std::size_t size() const noexcept { return positions.size(); }
};

namespace cloud {

inline constexpr double kDefaultMinSeparation = 1e-3;
inline constexpr std::size_t kDefaultRetryBudget = 10000;

/// Number density n(r) at dimensionless radius r >= 0, normalized so that
/// 4 pi int r^2 n(r) dr = N.
double density(const CloudProfile& profile, double r);

/// Fraction of atoms inside radius r; closed forms for all three profiles.
double radial_cdf(const CloudProfile& profile, double r);

/// Inverse of radial_cdf for u in [0, 1).
double radial_quantile(const CloudProfile& profile, double u);

/// Draw N i.i.d. positions (inverse-CDF radius, isotropic direction). A
/// candidate closer than r_min to an already placed atom is redrawn; more than
/// `retry_budget` redraws for one atom throws PackingInfeasible. Deterministic
/// in `seed`.
AtomEnsemble sample(const CloudProfile& profile, std::uint64_t seed,
                    double r_min = kDefaultMinSeparation,
                    std::size_t retry_budget = kDefaultRetryBudget);

/// Smallest pairwise separation; +inf for fewer than two atoms.
double min_pair_separation(const AtomEnsemble& ensemble);

/// CSV with columns atom_index,x,y,z (units of 1/k0).
void write_csv(std::ostream& out, const AtomEnsemble& ensemble);

}  // namespace cloud
}  // namespace coop
