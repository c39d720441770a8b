// SPDX-License-Identifier: Apache-2.0

#ifndef COGBEAM_CONSTRAINTS_HPP
#define COGBEAM_CONSTRAINTS_HPP

#include <stdexcept>

#include "beampattern.hpp"
#include "core.hpp"
#include "scenario.hpp"

namespace cogbeam {

namespace detail {
/// w^H H w for Hermitian H, with the imaginary residue checked.
inline double quad_form(const VectorXcd& w, const MatrixXcd& H) {
    return real_checked(w.dot(H * w), w.squaredNorm() * H.cwiseAbs().maxCoeff(), 1e-8);
}
/// Sum of column quadratic forms sum_c X_c^H H X_c = Tr(H X X^H).
inline double columns_quad_sum(const MatrixXcd& X, const MatrixXcd& H) {
    if (X.size() == 0) return 0.0;
    double acc = 0.0;
    for (Eigen::Index c = 0; c < X.cols(); ++c) acc += quad_form(X.col(c), H);
    return acc;
}
}  // namespace detail

/// SINR at SU i: w_i^H H w_i / (sum_{j!=i} w_j^H H w_j + sum_t v_t^H H v_t + sigma^2).
inline double sinr(const BeamformerSet& bf, const ChannelSet& ch, int i, double sigma2) {
    if (i < 0 || i >= static_cast<int>(ch.H_s.size()))
        throw std::out_of_range("sinr: SU index out of range");
    const MatrixXcd& H = ch.H_s[static_cast<std::size_t>(i)];
    const double own = bf.W.size() > 0 ? detail::quad_form(bf.W.col(i), H) : 0.0;
    double denom = sigma2 + detail::columns_quad_sum(bf.V, H);
    if (bf.W.size() > 0)
        for (Eigen::Index j = 0; j < bf.W.cols(); ++j)
            if (j != i) denom += detail::quad_form(bf.W.col(j), H);
    return own / denom;
}

/// Diagonal of W W^H + V V^H.
inline VectorXd per_antenna_power(const BeamformerSet& bf) {
    const Eigen::Index M = bf.antennas();
    VectorXd p = VectorXd::Zero(M);
    if (bf.W.size() > 0) p += bf.W.rowwise().squaredNorm();
    if (bf.V.size() > 0) p += bf.V.rowwise().squaredNorm();
    return p;
}

/// Interference power received by PU l.
inline double interference(const BeamformerSet& bf, const ChannelSet& ch, int l) {
    if (l < 0 || l >= static_cast<int>(ch.H_p.size()))
        throw std::out_of_range("interference: PU index out of range");
    const MatrixXcd& H = ch.H_p[static_cast<std::size_t>(l)];
    return detail::columns_quad_sum(bf.W, H) + detail::columns_quad_sum(bf.V, H);
}

struct PenaltyTerms {
    VectorXd f;  // SINR constraints, one per SU; f_i <= 0 iff SINR_i >= eta_i
    VectorXd d;  // per-antenna power slack R_ii - P_m/M
    VectorXd g;  // PU interference slack I_l - I_thres
};

inline PenaltyTerms penalty_terms(const BeamformerSet& bf, const ChannelSet& ch,
                                  const Scenario& sc) {
    const auto U = static_cast<Eigen::Index>(ch.H_s.size());
    const auto L = static_cast<Eigen::Index>(ch.H_p.size());
    PenaltyTerms t;
    t.f.resize(U);
    for (Eigen::Index i = 0; i < U; ++i) {
        const MatrixXcd& H = ch.H_s[static_cast<std::size_t>(i)];
        const double eta = sc.sinr_targets[static_cast<std::size_t>(i)];
        const double sig2 = sc.noise_var[static_cast<std::size_t>(i)];
        const double own = bf.W.size() > 0
                               ? detail::quad_form(bf.W.col(static_cast<Eigen::Index>(i)), H)
                               : 0.0;
        const double w_all = detail::columns_quad_sum(bf.W, H);
        const double v_all = detail::columns_quad_sum(bf.V, H);
        t.f(i) = eta * w_all - (1.0 + eta) * own + eta * sig2 + eta * v_all;
    }
    t.d = per_antenna_power(bf).array() - sc.antenna_power_bound();
    t.g.resize(L);
    for (Eigen::Index l = 0; l < L; ++l)
        t.g(l) = interference(bf, ch, static_cast<int>(l)) - sc.interference_threshold;
    return t;
}

/// Quadratic penalty Q = sum lambda*max(0,f)^2 + sum rho*pen(d)^2
/// + sum zeta*max(0,g)^2. Under the equality power reading the d terms are
/// two-sided (any deviation from the bound is penalized).
inline double penalty(const BeamformerSet& bf, const ChannelSet& ch, const Scenario& sc,
                      double lambda, double rho, double zeta) {
    if (lambda < 0.0 || rho < 0.0 || zeta < 0.0)
        throw std::invalid_argument("penalty: constants must be >= 0");
    const PenaltyTerms t = penalty_terms(bf, ch, sc);
    double q = 0.0;
    for (Eigen::Index i = 0; i < t.f.size(); ++i) {
        const double v = std::max(0.0, t.f(i));
        q += lambda * v * v;
    }
    for (Eigen::Index i = 0; i < t.d.size(); ++i) {
        const double v = sc.per_antenna_equality ? std::abs(t.d(i)) : std::max(0.0, t.d(i));
        q += rho * v * v;
    }
    for (Eigen::Index l = 0; l < t.g.size(); ++l) {
        const double v = std::max(0.0, t.g(l));
        q += zeta * v * v;
    }
    return q;
}

struct ConstraintReport {
    VectorXd sinr_values;
    VectorXd per_antenna;
    VectorXd interference_values;
    VectorXd f, d, g;
    bool feasible = false;
    double worst_violation = 0.0;
    double power_equality_gap = 0.0;  // max |d_i|, informative under equality mode
    double tolerance = 1e-8;
};

inline ConstraintReport evaluate_constraints(const BeamformerSet& bf, const ChannelSet& ch,
                                             const Scenario& sc, double tol = 1e-8) {
    ConstraintReport r;
    r.tolerance = tol;
    const auto U = static_cast<Eigen::Index>(ch.H_s.size());
    const auto L = static_cast<Eigen::Index>(ch.H_p.size());
    r.sinr_values.resize(U);
    for (Eigen::Index i = 0; i < U; ++i)
        r.sinr_values(i) = sinr(bf, ch, static_cast<int>(i),
                                sc.noise_var[static_cast<std::size_t>(i)]);
    r.per_antenna = per_antenna_power(bf);
    r.interference_values.resize(L);
    for (Eigen::Index l = 0; l < L; ++l)
        r.interference_values(l) = interference(bf, ch, static_cast<int>(l));
    const PenaltyTerms t = penalty_terms(bf, ch, sc);
    r.f = t.f;
    r.d = t.d;
    r.g = t.g;
    double worst = 0.0;
    if (t.f.size() > 0) worst = std::max(worst, t.f.maxCoeff());
    if (t.d.size() > 0) worst = std::max(worst, t.d.maxCoeff());
    if (t.g.size() > 0) worst = std::max(worst, t.g.maxCoeff());
    r.worst_violation = worst;
    r.power_equality_gap = t.d.size() > 0 ? t.d.cwiseAbs().maxCoeff() : 0.0;
    r.feasible = worst <= tol;
    return r;
}

}  // namespace cogbeam

#endif
