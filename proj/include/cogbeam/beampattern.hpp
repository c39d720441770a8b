// SPDX-License-Identifier: Apache-2.0

#ifndef COGBEAM_BEAMPATTERN_HPP
#define COGBEAM_BEAMPATTERN_HPP

#include <stdexcept>

#include "core.hpp"
#include "scenario.hpp"

namespace cogbeam {

// ---------------------------------------------------------------------------
// One candidate solution: communication beamformers W (M x U), radar
// beamformers V (M x M) and the non-negative desired-pattern scale omega.
// ---------------------------------------------------------------------------
struct BeamformerSet {
    MatrixXcd W;
    MatrixXcd V;
    double omega = 0.0;

    static BeamformerSet make(MatrixXcd W, MatrixXcd V, double omega) {
        if (W.size() > 0 && V.size() > 0 && W.rows() != V.rows())
            throw std::invalid_argument("BeamformerSet: W and V row counts differ");
        if (V.size() > 0 && V.rows() != V.cols())
            throw std::invalid_argument("BeamformerSet: V must be square");
        if (!std::isfinite(omega)) throw std::invalid_argument("BeamformerSet: omega not finite");
        BeamformerSet bf;
        bf.W = std::move(W);
        bf.V = std::move(V);
        bf.omega = std::max(0.0, omega);
        return bf;
    }
    static BeamformerSet zero(int M, int U) {
        return make(MatrixXcd::Zero(M, U), MatrixXcd::Zero(M, M), 0.0);
    }
    Eigen::Index antennas() const { return W.size() > 0 ? W.rows() : V.rows(); }
};

/// Signal covariance R = W W^H + V V^H (Hermitian PSD by construction).
inline MatrixXcd covariance_of(const BeamformerSet& bf) {
    const Eigen::Index M = bf.antennas();
    MatrixXcd R = MatrixXcd::Zero(M, M);
    if (bf.W.size() > 0) R += bf.W * bf.W.adjoint();
    if (bf.V.size() > 0) {
        if (bf.V.rows() != M) throw std::invalid_argument("covariance_of: dimension mismatch");
        R += bf.V * bf.V.adjoint();
    }
    return R;
}

/// Transmit power density a(theta)^H R a(theta).
inline double beam_pattern(const MatrixXcd& R, double theta_deg, double spacing_ratio = 0.5) {
    const VectorXcd a = steering_vector(theta_deg, static_cast<int>(R.rows()), spacing_ratio);
    const cplx q = a.dot(R * a);  // Eigen's dot conjugates the left argument
    return real_checked(q, R.cwiseAbs().maxCoeff() * static_cast<double>(R.rows()), 1e-10);
}

/// Pattern over a cached grid, evaluated as |a^H w|^2 sums: cost G*M*(U+M)
/// instead of the G*M^4 vec(R) route. This is the hot path of the FA loop.
inline VectorXd beam_pattern_grid(const SteeringTable& table, const BeamformerSet& bf) {
    VectorXd p = VectorXd::Zero(table.grid_size());
    if (bf.W.size() > 0) p += (table.rows_adjoint * bf.W).rowwise().squaredNorm();
    if (bf.V.size() > 0) p += (table.rows_adjoint * bf.V).rowwise().squaredNorm();
    return p;
}

inline VectorXd beam_pattern_grid(const SteeringTable& table, const MatrixXcd& R) {
    const auto G = table.grid_size();
    VectorXd p(G);
    for (Eigen::Index g = 0; g < G; ++g) {
        const VectorXcd row = table.rows_adjoint.row(g);
        p(g) = real_checked(row.transpose() * R * row.conjugate(),
                            R.cwiseAbs().maxCoeff() * static_cast<double>(R.rows()), 1e-8);
    }
    return p;
}

/// Mean squared mismatch (1/G) sum_g sum_rows |omega D - P|^2 between the
/// scaled desired table and an already-evaluated pattern.
inline double mse_from_pattern(const VectorXd& pattern, const DesiredPattern& desired,
                               double omega) {
    const MatrixXd table = desired.objective_table();
    if (pattern.size() != table.cols())
        throw std::invalid_argument("mse_from_pattern: grid size mismatch");
    double acc = 0.0;
    for (Eigen::Index r = 0; r < table.rows(); ++r)
        for (Eigen::Index g = 0; g < table.cols(); ++g) {
            const double e = omega * table(r, g) - pattern(g);
            acc += e * e;
        }
    return acc / static_cast<double>(pattern.size());
}

inline double mse_direct(const BeamformerSet& bf, const DesiredPattern& desired,
                         const SteeringTable& table) {
    return mse_from_pattern(beam_pattern_grid(table, bf), desired, bf.omega);
}

/// Least-squares optimal scale for a fixed covariance:
/// omega* = sum(D * P) / sum(D^2) over the objective table.
inline double optimal_omega(const MatrixXcd& R, const DesiredPattern& desired,
                            const SteeringTable& table) {
    const MatrixXd tab = desired.objective_table();
    const VectorXd p = beam_pattern_grid(table, R);
    double num = 0.0, den = 0.0;
    for (Eigen::Index r = 0; r < tab.rows(); ++r)
        for (Eigen::Index g = 0; g < tab.cols(); ++g) {
            num += tab(r, g) * p(g);
            den += tab(r, g) * tab(r, g);
        }
    if (den <= 0.0)
        throw std::invalid_argument("optimal_omega: all-zero desired pattern has no scale");
    return std::max(0.0, num / den);
}

// ---------------------------------------------------------------------------
// Quadratic-form representation of the MSE objective. With
// z = [omega; vec(R)] the objective equals z^H Omega z, where Omega
// accumulates (1/G) sum over table rows and grid angles of c c^H with
// c = [D; -a* kron a]. Kept as the oracle route; solvers use reduced forms.
// ---------------------------------------------------------------------------
struct OmegaMatrix {
    MatrixXcd Omega;  // (M^2+1) x (M^2+1), Hermitian PSD
    int antennas = 0;
    Eigen::Index grid_size = 0;
};

/// vec(a a^H) under column-major vec() equals conj(a) kron a.
inline VectorXcd conj_kron_self(const VectorXcd& a) {
    const Eigen::Index M = a.size();
    VectorXcd out(M * M);
    for (Eigen::Index j = 0; j < M; ++j)
        out.segment(j * M, M) = std::conj(a(j)) * a;
    return out;
}

inline OmegaMatrix build_omega(const DesiredPattern& desired, const Scenario& sc) {
    const int M = sc.antennas;
    const Eigen::Index dim = static_cast<Eigen::Index>(M) * M + 1;
    const MatrixXd table = desired.objective_table();
    const auto G = static_cast<Eigen::Index>(desired.grid_angles_deg.size());
    MatrixXcd omega = MatrixXcd::Zero(dim, dim);
    VectorXcd c(dim);
    for (Eigen::Index g = 0; g < G; ++g) {
        const VectorXcd a = steering_vector(desired.grid_angles_deg[static_cast<std::size_t>(g)],
                                            M, sc.antenna_spacing_ratio);
        c.tail(dim - 1) = -conj_kron_self(a);
        for (Eigen::Index r = 0; r < table.rows(); ++r) {
            c(0) = table(r, g);
            omega.noalias() += c * c.adjoint();
        }
    }
    OmegaMatrix out;
    out.Omega = omega / static_cast<double>(G);
    out.antennas = M;
    out.grid_size = G;
    return out;
}

inline double mse_quadratic(const BeamformerSet& bf, const OmegaMatrix& om) {
    const Eigen::Index M = bf.antennas();
    if (om.Omega.rows() != M * M + 1)
        throw std::invalid_argument("mse_quadratic: Omega dimension mismatch");
    const MatrixXcd R = covariance_of(bf);
    VectorXcd z(M * M + 1);
    z(0) = bf.omega;
    z.tail(M * M) = Eigen::Map<const VectorXcd>(R.data(), M * M);
    const cplx q = z.dot(om.Omega * z);
    return real_checked(q, std::abs(q), 1e-8);
}

}  // namespace cogbeam

#endif
