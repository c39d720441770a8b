// SPDX-License-Identifier: Apache-2.0

#ifndef COGBEAM_SCENARIO_HPP
#define COGBEAM_SCENARIO_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "core.hpp"

namespace cogbeam {

// ---------------------------------------------------------------------------
// Angle grid. Closed on both ends; when the step does not divide the range
// evenly the last sample is clamped to the stop angle.
// ---------------------------------------------------------------------------
struct GridSpec {
    double start_deg = -90.0;
    double stop_deg = 90.0;
    double step_deg = 1.0;

    std::vector<double> angles() const {
        if (step_deg <= 0.0) throw std::invalid_argument("grid step must be positive");
        if (stop_deg < start_deg) throw std::invalid_argument("grid stop < start");
        std::vector<double> out;
        const double span = stop_deg - start_deg;
        const auto count = static_cast<long>(std::floor(span / step_deg + 1e-9));
        out.reserve(static_cast<std::size_t>(count) + 2);
        for (long g = 0; g <= count; ++g) out.push_back(start_deg + step_deg * static_cast<double>(g));
        if (out.back() < stop_deg - 1e-9 * std::max(1.0, span)) out.push_back(stop_deg);
        return out;
    }
    Eigen::Index size() const { return static_cast<Eigen::Index>(angles().size()); }
};

/// How the per-target desired-pattern rows enter the MSE objective.
/// Union combines the target masks into one table over the grid (matched
/// patterns share one sum over angles); PerTarget keeps one residual sum
/// per target, so every grid angle is counted K times.
enum class MaskCombine { Union, PerTarget };

// ---------------------------------------------------------------------------
// Full experiment description. Angles are degrees at this interface;
// conversion to radians happens once, inside steering/covariance builders.
// ---------------------------------------------------------------------------
struct Scenario {
    int antennas = 10;  // M
    std::vector<double> target_angles_deg;
    std::vector<double> su_angles_deg;
    std::vector<double> pu_angles_deg;
    double beam_halfwidth_deg = 5.0;
    std::vector<double> sinr_targets;  // linear, one per SU
    std::vector<double> noise_var;     // linear, one per SU
    double power_budget = 1.0;
    double interference_threshold = 0.01;
    GridSpec grid;
    double antenna_spacing_ratio = 0.5;   // Delta / psi
    double angular_spread_std_deg = 2.0;  // delta_a
    std::uint64_t rng_seed = 1;

    // Formulation switches (see README): the per-antenna bound divisor can be
    // M (default) or 1, and the power constraint can be an equality (default,
    // full-power transmission) or an upper bound.
    int per_antenna_divisor = 0;  // 0 means "use antennas"
    bool per_antenna_equality = true;
    MaskCombine mask_combine = MaskCombine::Union;

    int num_antennas() const { return antennas; }
    int num_su() const { return static_cast<int>(su_angles_deg.size()); }
    int num_targets() const { return static_cast<int>(target_angles_deg.size()); }
    int num_pu() const { return static_cast<int>(pu_angles_deg.size()); }
    double antenna_power_bound() const {
        const int div = per_antenna_divisor > 0 ? per_antenna_divisor : antennas;
        return power_budget / static_cast<double>(div);
    }

    void validate() const {
        if (antennas < 2) throw std::invalid_argument("antennas must be >= 2");
        if (num_su() + num_targets() + num_pu() > antennas)
            throw std::invalid_argument("U + K + L must not exceed the antenna count");
        auto check_angles = [](const std::vector<double>& v, const char* what) {
            for (double a : v)
                if (a < -90.0 || a > 90.0)
                    throw std::invalid_argument(std::string(what) + " angle outside [-90, 90]");
        };
        check_angles(target_angles_deg, "target");
        check_angles(su_angles_deg, "su");
        check_angles(pu_angles_deg, "pu");
        if (sinr_targets.size() != su_angles_deg.size())
            throw std::invalid_argument("sinr_targets size must match su_angles");
        if (noise_var.size() != su_angles_deg.size())
            throw std::invalid_argument("noise_var size must match su_angles");
        for (double e : sinr_targets)
            if (e <= 0.0) throw std::invalid_argument("sinr targets must be positive");
        for (double s : noise_var)
            if (s <= 0.0) throw std::invalid_argument("noise variances must be positive");
        if (power_budget <= 0.0) throw std::invalid_argument("power budget must be positive");
        if (interference_threshold <= 0.0)
            throw std::invalid_argument("interference threshold must be positive");
        if (beam_halfwidth_deg < 0.0) throw std::invalid_argument("beam halfwidth must be >= 0");
        if (angular_spread_std_deg < 0.0) throw std::invalid_argument("angular spread must be >= 0");
        if (per_antenna_divisor != 0 && per_antenna_divisor != 1 && per_antenna_divisor != antennas)
            throw std::invalid_argument("per_antenna_divisor must be 1 or the antenna count");
        if (grid.size() < 1) throw std::invalid_argument("grid must contain at least one sample");
    }

    /// Two SUs at -30/20 deg, one PU at -40 deg, three targets at -60/0/40 deg,
    /// sigma^2 = 0.1, I_thres = 0.01, P_m = 1, 1-degree grid over [-90, 90].
    static Scenario reference(int M = 10, double sinr_target_db = 10.0) {
        Scenario s;
        s.antennas = M;
        s.target_angles_deg = {-60.0, 0.0, 40.0};
        s.su_angles_deg = {-30.0, 20.0};
        s.pu_angles_deg = {-40.0};
        const double eta = std::pow(10.0, sinr_target_db / 10.0);
        s.sinr_targets = {eta, eta};
        s.noise_var = {0.1, 0.1};
        s.power_budget = 1.0;
        s.interference_threshold = 0.01;
        s.rng_seed = 1;
        s.validate();
        return s;
    }
};

// ---------------------------------------------------------------------------
// Uniform-linear-array steering vector. The printed row vector in the array
// response definition is a^H; this returns the column a(theta), so entry m
// is exp(-j 2*pi*spacing*m*sin(theta)). With this orientation the statistical
// channel covariance below satisfies H(zeta) = a(zeta) a(zeta)^H at zero
// angular spread, which places beam peaks and nulls at the physical angles.
// ---------------------------------------------------------------------------
inline VectorXcd steering_vector(double theta_deg, int M, double spacing_ratio = 0.5) {
    if (M < 1) throw std::invalid_argument("steering_vector: M must be >= 1");
    VectorXcd a(M);
    const double phase_step = -2.0 * pi * spacing_ratio * std::sin(deg2rad(theta_deg));
    for (int m = 0; m < M; ++m) a(m) = std::polar(1.0, phase_step * static_cast<double>(m));
    return a;
}

/// Statistical channel covariance for a departure angle zeta:
/// H(m,n) = exp(j 2*pi*spacing*(n-m)*sin(zeta))
///        * exp(-2 [pi*spacing*delta_a*(n-m)*cos(zeta)]^2),
/// with delta_a in degrees converted to radians inside the Gaussian factor.
inline MatrixXcd covariance_matrix(double zeta_deg, int M, double spacing_ratio = 0.5,
                                   double delta_a_deg = 2.0) {
    if (M < 1) throw std::invalid_argument("covariance_matrix: M must be >= 1");
    if (delta_a_deg < 0.0) throw std::invalid_argument("covariance_matrix: delta_a must be >= 0");
    const double zeta = deg2rad(zeta_deg);
    const double delta = deg2rad(delta_a_deg);
    const double phase_coef = 2.0 * pi * spacing_ratio * std::sin(zeta);
    const double spread_coef = pi * spacing_ratio * delta * std::cos(zeta);
    MatrixXcd H(M, M);
    for (int m = 0; m < M; ++m)
        for (int n = 0; n < M; ++n) {
            const double k = static_cast<double>(n - m);
            H(m, n) = std::polar(std::exp(-2.0 * (spread_coef * k) * (spread_coef * k)),
                                 phase_coef * k);
        }
    return H;
}

struct ChannelSet {
    std::vector<MatrixXcd> H_s;  // one per SU
    std::vector<MatrixXcd> H_p;  // one per PU
};

inline ChannelSet build_channels(const Scenario& sc) {
    sc.validate();
    ChannelSet ch;
    ch.H_s.reserve(sc.su_angles_deg.size());
    ch.H_p.reserve(sc.pu_angles_deg.size());
    for (double a : sc.su_angles_deg)
        ch.H_s.push_back(covariance_matrix(a, sc.antennas, sc.antenna_spacing_ratio,
                                           sc.angular_spread_std_deg));
    for (double a : sc.pu_angles_deg)
        ch.H_p.push_back(covariance_matrix(a, sc.antennas, sc.antenna_spacing_ratio,
                                           sc.angular_spread_std_deg));
    return ch;
}

// ---------------------------------------------------------------------------
// Desired radar beam pattern, one binary row per target over the angle grid:
// D(theta, t) = 1 iff |theta - target_t| <= halfwidth. objective_table()
// yields the rows the MSE objective actually sums over -- the per-target rows,
// or their pointwise maximum when the masks are combined.
// ---------------------------------------------------------------------------
struct DesiredPattern {
    std::vector<double> grid_angles_deg;  // G
    MatrixXd values;                      // K x G
    MaskCombine combine = MaskCombine::Union;

    Eigen::Index grid_size() const { return static_cast<Eigen::Index>(grid_angles_deg.size()); }
    Eigen::Index num_targets() const { return values.rows(); }

    MatrixXd objective_table() const {
        if (combine == MaskCombine::PerTarget || values.rows() == 0) return values;
        MatrixXd t(1, values.cols());
        t.row(0) = values.colwise().maxCoeff();
        return t;
    }
};

inline DesiredPattern desired_pattern(const Scenario& sc) {
    sc.validate();
    DesiredPattern p;
    p.grid_angles_deg = sc.grid.angles();
    p.combine = sc.mask_combine;
    const auto G = static_cast<Eigen::Index>(p.grid_angles_deg.size());
    const auto K = static_cast<Eigen::Index>(sc.target_angles_deg.size());
    p.values = MatrixXd::Zero(K, G);
    for (Eigen::Index t = 0; t < K; ++t) {
        const double center = sc.target_angles_deg[static_cast<std::size_t>(t)];
        for (Eigen::Index g = 0; g < G; ++g) {
            const double th = p.grid_angles_deg[static_cast<std::size_t>(g)];
            if (th >= center - sc.beam_halfwidth_deg && th <= center + sc.beam_halfwidth_deg)
                p.values(t, g) = 1.0;
        }
    }
    return p;
}

/// Steering vectors cached over the scenario grid; row g holds a(theta_g)^H.
struct SteeringTable {
    MatrixXcd rows_adjoint;               // G x M
    std::vector<double> grid_angles_deg;  // G

    static SteeringTable build(const Scenario& sc) {
        SteeringTable t;
        t.grid_angles_deg = sc.grid.angles();
        const auto G = static_cast<Eigen::Index>(t.grid_angles_deg.size());
        t.rows_adjoint.resize(G, sc.antennas);
        for (Eigen::Index g = 0; g < G; ++g)
            t.rows_adjoint.row(g) =
                steering_vector(t.grid_angles_deg[static_cast<std::size_t>(g)], sc.antennas,
                                sc.antenna_spacing_ratio)
                    .adjoint();
        return t;
    }
    Eigen::Index grid_size() const { return rows_adjoint.rows(); }
};

}  // namespace cogbeam

#endif
