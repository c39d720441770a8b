// SPDX-License-Identifier: Apache-2.0

#ifndef COGBEAM_RESCALE_HPP
#define COGBEAM_RESCALE_HPP

#include <vector>

#include "beampattern.hpp"
#include "constraints.hpp"
#include "core.hpp"
#include "scenario.hpp"
#include "smallqp.hpp"
#include "variant.hpp"

namespace cogbeam {

// ---------------------------------------------------------------------------
// Per-column power rescale: with the column directions of W and V fixed,
// substitute w_i = sqrt(p_i) w_i, v_t = sqrt(q_t) v_t and solve for the
// non-negative scales (and the pattern scale omega). Every constraint of the
// design problem is linear in (p, q) and the beam-pattern MSE is a convex
// quadratic in (omega, p, q), so this is a small QP. It is the second step
// of the Gaussian-randomization recovery and doubles as the feasibility
// polish applied to solver outputs.
// ---------------------------------------------------------------------------
struct RescaleOutcome {
    bool feasible = false;
    BeamformerSet bf;
    double objective = 0.0;  // beam MSE or total power, per variant
    double worst_violation = std::numeric_limits<double>::infinity();
};

inline RescaleOutcome power_rescale(const MatrixXcd& Wdir, const MatrixXcd& Vdir,
                                    const Scenario& sc, const ChannelSet& ch,
                                    const DesiredPattern& pattern, const SteeringTable& table,
                                    const ProblemVariant& variant,
                                    double feas_tol = 1e-9) {
    const int M = sc.antennas;
    const auto Uc = Wdir.cols();
    const auto Vc = Vdir.cols();
    const bool with_omega = variant.objective == ObjectiveKind::BeamMse;
    const Eigen::Index n = (with_omega ? 1 : 0) + Uc + Vc;
    const Eigen::Index off_p = with_omega ? 1 : 0;
    const Eigen::Index off_q = off_p + Uc;

    // per-column responses over the grid
    const MatrixXd pat_w =
        Uc > 0 ? MatrixXd((table.rows_adjoint * Wdir).cwiseAbs2()) : MatrixXd(table.grid_size(), 0);
    const MatrixXd pat_v =
        Vc > 0 ? MatrixXd((table.rows_adjoint * Vdir).cwiseAbs2()) : MatrixXd(table.grid_size(), 0);

    SmallQp qp;
    qp.P = MatrixXd::Zero(n, n);
    qp.q = VectorXd::Zero(n);
    if (variant.objective == ObjectiveKind::BeamMse) {
        const MatrixXd tab = pattern.objective_table();
        const auto G = table.grid_size();
        VectorXd phi(n);
        for (Eigen::Index g = 0; g < G; ++g) {
            phi.setZero();
            for (Eigen::Index c = 0; c < Uc; ++c) phi(off_p + c) = -pat_w(g, c);
            for (Eigen::Index c = 0; c < Vc; ++c) phi(off_q + c) = -pat_v(g, c);
            for (Eigen::Index r = 0; r < tab.rows(); ++r) {
                phi(0) = tab(r, g);
                qp.P.noalias() += (2.0 / static_cast<double>(G)) * (phi * phi.transpose());
            }
        }
    } else {
        for (Eigen::Index c = 0; c < Uc; ++c) qp.q(off_p + c) = Wdir.col(c).squaredNorm();
        for (Eigen::Index c = 0; c < Vc; ++c) qp.q(off_q + c) = Vdir.col(c).squaredNorm();
    }

    std::vector<VectorXd> rows;
    std::vector<double> lows, highs;
    const double inf = qp_infinity();
    auto add_row = [&](const VectorXd& a, double lo, double hi) {
        rows.push_back(a);
        lows.push_back(lo);
        highs.push_back(hi);
    };

    if (variant.use_sinr) {
        for (int i = 0; i < sc.num_su(); ++i) {
            const MatrixXcd& H = ch.H_s[static_cast<std::size_t>(i)];
            const double eta = sc.sinr_targets[static_cast<std::size_t>(i)];
            VectorXd a = VectorXd::Zero(n);
            for (Eigen::Index c = 0; c < Uc; ++c) {
                const double quad = detail::quad_form(Wdir.col(c), H);
                a(off_p + c) = (c == i) ? -quad / eta : quad;
            }
            for (Eigen::Index c = 0; c < Vc; ++c) a(off_q + c) = detail::quad_form(Vdir.col(c), H);
            add_row(a, -inf, -sc.noise_var[static_cast<std::size_t>(i)]);
        }
    }
    if (variant.use_power) {
        const double bound = sc.antenna_power_bound();
        for (int ant = 0; ant < M; ++ant) {
            VectorXd a = VectorXd::Zero(n);
            for (Eigen::Index c = 0; c < Uc; ++c) a(off_p + c) = std::norm(Wdir(ant, c));
            for (Eigen::Index c = 0; c < Vc; ++c) a(off_q + c) = std::norm(Vdir(ant, c));
            add_row(a, sc.per_antenna_equality ? bound : -inf, bound);
        }
    }
    if (variant.use_interference) {
        for (int l = 0; l < sc.num_pu(); ++l) {
            const MatrixXcd& H = ch.H_p[static_cast<std::size_t>(l)];
            VectorXd a = VectorXd::Zero(n);
            for (Eigen::Index c = 0; c < Uc; ++c) a(off_p + c) = detail::quad_form(Wdir.col(c), H);
            for (Eigen::Index c = 0; c < Vc; ++c) a(off_q + c) = detail::quad_form(Vdir.col(c), H);
            add_row(a, -inf, sc.interference_threshold);
        }
    }
    for (Eigen::Index j = 0; j < n; ++j) {  // omega, p, q all non-negative
        VectorXd a = VectorXd::Zero(n);
        a(j) = 1.0;
        add_row(a, 0.0, inf);
    }

    qp.A.resize(static_cast<Eigen::Index>(rows.size()), n);
    qp.lower.resize(static_cast<Eigen::Index>(rows.size()));
    qp.upper.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t j = 0; j < rows.size(); ++j) {
        qp.A.row(static_cast<Eigen::Index>(j)) = rows[j];
        qp.lower(static_cast<Eigen::Index>(j)) = lows[j];
        qp.upper(static_cast<Eigen::Index>(j)) = highs[j];
    }

    const SmallQpResult sol = solve_small_qp(qp);

    RescaleOutcome out;
    VectorXd y = sol.y.cwiseMax(0.0);
    MatrixXcd W = Wdir;
    for (Eigen::Index c = 0; c < Uc; ++c) W.col(c) *= std::sqrt(y(off_p + c));
    MatrixXcd V(M, M);
    V.setZero();
    for (Eigen::Index c = 0; c < Vc && c < M; ++c) V.col(c) = Vdir.col(c) * std::sqrt(y(off_q + c));
    if (Uc == 0) W = MatrixXcd::Zero(M, sc.num_su());
    out.bf = BeamformerSet::make(std::move(W), std::move(V), with_omega ? y(0) : 0.0);
    out.worst_violation = sol.primal_residual;
    out.feasible = sol.primal_residual <= feas_tol;
    if (variant.objective == ObjectiveKind::BeamMse)
        out.objective = mse_direct(out.bf, pattern, table);
    else
        out.objective = covariance_of(out.bf).trace().real();
    return out;
}

}  // namespace cogbeam

#endif
