// SPDX-License-Identifier: Apache-2.0

#ifndef COGBEAM_SMALLQP_HPP
#define COGBEAM_SMALLQP_HPP

#include <limits>
#include <vector>

#include "core.hpp"

namespace cogbeam {

// ---------------------------------------------------------------------------
// Dense convex QP  min 1/2 y^T P y + q^T y  s.t.  l <= A y <= u,
// solved by operator splitting with a terminal active-set polish. Sized for
// the small programs that appear here (tens of variables and rows): the
// Gaussian-randomization power rescale and related feasibility restores.
// Equality rows are expressed as l == u.
// ---------------------------------------------------------------------------
struct SmallQp {
    MatrixXd P;
    VectorXd q;
    MatrixXd A;
    VectorXd lower, upper;
};

struct SmallQpResult {
    VectorXd y;
    VectorXd duals;
    bool converged = false;
    int iterations = 0;
    double primal_residual = 0.0;  // max violation of l <= Ay <= u
    double dual_residual = 0.0;    // || P y + q + A^T dual ||_inf
};

inline double qp_infinity() { return std::numeric_limits<double>::infinity(); }

namespace detail {

inline double box_violation(const VectorXd& v, const VectorXd& l, const VectorXd& u) {
    double worst = 0.0;
    for (Eigen::Index j = 0; j < v.size(); ++j)
        worst = std::max(worst, std::max(l(j) - v(j), v(j) - u(j)));
    return std::max(0.0, worst);
}

}  // namespace detail

inline SmallQpResult solve_small_qp(const SmallQp& qp, int max_iters = 40000,
                                    double eps = 1e-11) {
    const Eigen::Index n = qp.P.rows();
    const Eigen::Index m = qp.A.rows();
    const double sigma = 1e-6;
    const double alpha = 1.6;

    VectorXd rho(m);
    for (Eigen::Index j = 0; j < m; ++j)
        rho(j) = (qp.lower(j) == qp.upper(j)) ? 1e3 : 1.0;

    MatrixXd Kmat = qp.P + sigma * MatrixXd::Identity(n, n);
    for (Eigen::Index j = 0; j < m; ++j)
        Kmat.noalias() += rho(j) * (qp.A.row(j).transpose() * qp.A.row(j));
    Eigen::LLT<MatrixXd> llt(Kmat);

    VectorXd y = VectorXd::Zero(n), z = VectorXd::Zero(m), w = VectorXd::Zero(m);
    SmallQpResult res;
    int it = 0;
    for (; it < max_iters; ++it) {
        const VectorXd rhs =
            sigma * y - qp.q + qp.A.transpose() * (rho.cwiseProduct(z) - w);
        const VectorXd y_t = llt.solve(rhs);
        const VectorXd z_t = qp.A * y_t;
        y = alpha * y_t + (1.0 - alpha) * y;
        const VectorXd z_mix = alpha * z_t + (1.0 - alpha) * z;
        z = (z_mix + w.cwiseQuotient(rho)).cwiseMax(qp.lower).cwiseMin(qp.upper);
        w += rho.cwiseProduct(z_mix - z);

        if ((it + 1) % 25 == 0 || it + 1 == max_iters) {
            const VectorXd Ay = qp.A * y;
            res.primal_residual = detail::box_violation(Ay, qp.lower, qp.upper);
            res.dual_residual =
                (qp.P * y + qp.q + qp.A.transpose() * w).cwiseAbs().maxCoeff();
            const double scale =
                1.0 + std::max(y.cwiseAbs().maxCoeff(), w.cwiseAbs().maxCoeff());
            if (res.primal_residual <= eps * scale && res.dual_residual <= eps * scale) {
                res.converged = true;
                ++it;
                break;
            }
        }
    }
    res.iterations = it;

    // Active-set polish: lock rows pushed against a bound, solve the reduced
    // equality-constrained problem through its dual, keep when it improves.
    std::vector<Eigen::Index> active;
    std::vector<double> targets;
    const VectorXd Ay_now = qp.A * y;
    for (Eigen::Index j = 0; j < m; ++j) {
        const bool is_eq = qp.lower(j) == qp.upper(j);
        const bool low_viol = Ay_now(j) < qp.lower(j) - 1e-12;
        const bool up_viol = Ay_now(j) > qp.upper(j) + 1e-12;
        if (is_eq || std::abs(w(j)) > 1e-12 || low_viol || up_viol) {
            active.push_back(j);
            double target;
            if (is_eq) target = qp.lower(j);
            else if (up_viol) target = qp.upper(j);
            else if (low_viol) target = qp.lower(j);
            else target = w(j) > 0.0 ? qp.upper(j) : qp.lower(j);
            targets.push_back(target);
        }
    }
    if (!active.empty()) {
        const auto ma = static_cast<Eigen::Index>(active.size());
        MatrixXd Aa(ma, n);
        VectorXd ba(ma);
        for (Eigen::Index k = 0; k < ma; ++k) {
            Aa.row(k) = qp.A.row(active[static_cast<std::size_t>(k)]);
            ba(k) = targets[static_cast<std::size_t>(k)];
        }
        const double delta = 1e-9 * (1.0 + qp.P.trace() / std::max<Eigen::Index>(1, n));
        MatrixXd Preg = qp.P + delta * MatrixXd::Identity(n, n);
        Eigen::LLT<MatrixXd> pllt(Preg);
        const MatrixXd PiAt = pllt.solve(Aa.transpose());
        const VectorXd Piq = pllt.solve(qp.q);
        MatrixXd S = Aa * PiAt;
        S.diagonal().array() += delta;
        Eigen::LDLT<MatrixXd> sldlt(S);
        const VectorXd nu = sldlt.solve(-(Aa * Piq) - ba);
        const VectorXd y_pol = -(Piq + PiAt * nu);
        const double pol_prim = detail::box_violation(qp.A * y_pol, qp.lower, qp.upper);
        VectorXd w_pol = VectorXd::Zero(m);
        for (Eigen::Index k = 0; k < ma; ++k) w_pol(active[static_cast<std::size_t>(k)]) = nu(k);
        const double pol_dual =
            (qp.P * y_pol + qp.q + qp.A.transpose() * w_pol).cwiseAbs().maxCoeff();
        if (pol_prim <= std::max(res.primal_residual, 1e-12) &&
            pol_dual <= std::max(res.dual_residual, 1e-9)) {
            y = y_pol;
            w = w_pol;
            res.primal_residual = pol_prim;
            res.dual_residual = pol_dual;
            if (pol_prim <= 1e-9 && pol_dual <= 1e-7) res.converged = true;
        }
    }

    res.y = y;
    res.duals = w;
    return res;
}

}  // namespace cogbeam

#endif
