// SPDX-License-Identifier: Apache-2.0

#ifndef COGBEAM_SDR_HPP
#define COGBEAM_SDR_HPP

#include <memory>
#include <string>
#include <vector>

#include "beampattern.hpp"
#include "constraints.hpp"
#include "core.hpp"
#include "rescale.hpp"
#include "scenario.hpp"
#include "variant.hpp"

namespace cogbeam {

struct SolverSettings {
    int max_iters = 200000;
    double abs_tol = 2e-9;
    double rel_tol = 1e-9;
    double lin_tol = 1e-8;   // constraint violation of the reported point, original units
    double sigma = 1.0;      // ADMM penalty parameter (adapted when adaptive_sigma)
    bool adaptive_sigma = true;
    double over_relax = 1.6;
    double rank_tol = 1e-4;  // eigenvalue ratio below which a block counts as rank one
    int randomization_draws = 100;
    std::uint64_t rng_seed = 1;
    int check_every = 25;
    // The split of R between the F blocks and the radar aggregate is not
    // unique at the optimum; a tiny trace charge on the F blocks selects the
    // power-minimal split, which is the rank-one-friendly one. Reported
    // objectives never include this term.
    double f_trace_tiebreak = 1e-4;
};

// ---------------------------------------------------------------------------
// Relaxed problem description: PSD blocks F_1..F_U and V_1..V_M plus the
// scale omega, a trace-inequality per SU and PU, and one power row per
// antenna. Rows are stored as a coefficient applied to R (hence to every
// block) plus an optional extra coefficient on a single F block.
// ---------------------------------------------------------------------------
struct TraceRow {
    MatrixXcd on_R;
    int special_block = -1;  // F-block index receiving on_special in addition
    MatrixXcd on_special;
    double rhs = 0.0;
    bool equality = false;
    std::string label;
};

struct SdpProblem {
    Scenario scenario;
    ChannelSet channels;
    ProblemVariant variant;
    DesiredPattern pattern;
    SteeringTable table;
    int num_f_blocks = 0;
    int num_v_blocks = 0;
    bool has_omega = true;
    std::vector<TraceRow> rows;
    std::vector<std::string> warnings;

    int block_size() const { return scenario.antennas; }
    int num_blocks() const { return num_f_blocks + num_v_blocks; }
};

inline SdpProblem build_sdp(const Scenario& sc, const ChannelSet& ch,
                            const ProblemVariant& variant = ProblemVariant::cognitive_dfrc()) {
    sc.validate();
    SdpProblem p;
    p.scenario = sc;
    p.channels = ch;
    p.variant = variant;
    p.pattern = desired_pattern(sc);
    p.table = SteeringTable::build(sc);
    const int M = sc.antennas;
    p.num_f_blocks = variant.has_comm ? sc.num_su() : 0;
    p.num_v_blocks = variant.has_radar ? M : 0;
    p.has_omega = variant.objective == ObjectiveKind::BeamMse;

    if (variant.use_sinr) {
        for (int i = 0; i < sc.num_su(); ++i) {
            const MatrixXcd& H = ch.H_s[static_cast<std::size_t>(i)];
            const double eta = sc.sinr_targets[static_cast<std::size_t>(i)];
            TraceRow row;
            row.on_R = H;  // interference part: + <H, R>
            row.special_block = i;
            row.on_special = -(1.0 + 1.0 / eta) * H;  // net -1/eta on the own block
            row.rhs = -sc.noise_var[static_cast<std::size_t>(i)];
            row.label = "sinr_" + std::to_string(i);
            p.rows.push_back(std::move(row));

            const double best = sc.power_budget *
                                Eigen::SelfAdjointEigenSolver<MatrixXcd>(H).eigenvalues().maxCoeff() /
                                sc.noise_var[static_cast<std::size_t>(i)];
            if (eta > best)
                p.warnings.push_back("sinr target for SU " + std::to_string(i) +
                                     " exceeds the matched-filter bound " + std::to_string(best));
        }
    }
    if (variant.use_power) {
        for (int a = 0; a < M; ++a) {
            TraceRow row;
            row.on_R = MatrixXcd::Zero(M, M);
            row.on_R(a, a) = 1.0;
            row.rhs = sc.antenna_power_bound();
            row.equality = sc.per_antenna_equality;
            row.label = "power_" + std::to_string(a);
            p.rows.push_back(std::move(row));
        }
    }
    if (variant.use_interference) {
        for (int l = 0; l < sc.num_pu(); ++l) {
            TraceRow row;
            row.on_R = ch.H_p[static_cast<std::size_t>(l)];
            row.rhs = sc.interference_threshold;
            row.label = "interference_" + std::to_string(l);
            p.rows.push_back(std::move(row));
        }
    }
    return p;
}

struct SdpSolution {
    std::vector<MatrixXcd> F;
    std::vector<MatrixXcd> Vt;
    MatrixXcd R;
    double omega = 0.0;
    double objective = 0.0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double gap = 0.0;
    double worst_linear_violation = 0.0;
    double min_eigenvalue = 0.0;
    bool converged = false;
    bool infeasible = false;
    int iterations = 0;
    std::vector<double> rank_ratios;  // F blocks then V blocks
    std::vector<std::string> warnings;
};

namespace detail {

/// Collapsed real-coordinate model: one svec slot per F block plus a single
/// slot for the aggregate radar covariance (the V blocks only ever appear
/// through their sum, so solving with the aggregate is exact; it is split
/// back into rank-one blocks afterward).
struct AdmmCore {
    int M = 0;
    Eigen::Index d = 0;        // M^2
    int blocks = 0;            // F blocks (+1 aggregate radar block)
    bool has_omega = false;
    Eigen::Index n = 0;        // total real dimension

    // objective: q(x) = 1/2 x^T Hess x + c^T x with the block structure
    // Hess = [ha, hb^T x 1_B ; 1_B hb, 1_B 1_B^T kron HG]
    double ha = 0.0;
    VectorXd hb;      // d (zero when no omega)
    MatrixXd HG;      // d x d PSD
    VectorXd cvec;    // n linear term
    bool quadratic = false;

    // constraint rows in collapsed coordinates, rows normalized to unit norm
    MatrixXd A;                  // m x n
    VectorXd b;                  // m
    std::vector<bool> equality;  // m
    VectorXd row_scale;          // original row norms (violations map back)

    Eigen::Index omega_index() const { return 0; }
    Eigen::Index block_offset(int blk) const { return (has_omega ? 1 : 0) + static_cast<Eigen::Index>(blk) * d; }
};

inline AdmmCore build_core(const SdpProblem& p) {
    AdmmCore core;
    core.M = p.block_size();
    core.d = static_cast<Eigen::Index>(core.M) * core.M;
    core.blocks = p.num_f_blocks + (p.num_v_blocks > 0 ? 1 : 0);
    core.has_omega = p.has_omega;
    core.n = (core.has_omega ? 1 : 0) + static_cast<Eigen::Index>(core.blocks) * core.d;

    const MatrixXd tab = p.pattern.objective_table();
    core.cvec = VectorXd::Zero(core.n);
    if (p.variant.objective == ObjectiveKind::BeamMse) {
        core.quadratic = true;
        const Eigen::Index G = p.table.grid_size();
        MatrixXd Mg(G, core.d);
        for (Eigen::Index g = 0; g < G; ++g) {
            const VectorXcd a = p.table.rows_adjoint.row(g).adjoint();  // a(theta_g)
            Mg.row(g) = svec(a * a.adjoint()).transpose();
        }
        VectorXd s = VectorXd::Zero(G), dsq = VectorXd::Zero(G);
        for (Eigen::Index r = 0; r < tab.rows(); ++r)
            for (Eigen::Index g = 0; g < G; ++g) {
                s(g) += tab(r, g);
                dsq(g) += tab(r, g) * tab(r, g);
            }
        const double Krows = static_cast<double>(tab.rows());
        const double invG = 1.0 / static_cast<double>(G);
        core.HG = (2.0 * Krows * invG) * (Mg.transpose() * Mg);
        core.hb = (-2.0 * invG) * (Mg.transpose() * s);
        core.ha = 2.0 * invG * dsq.sum();
    } else {
        core.HG = MatrixXd::Zero(core.d, core.d);
        core.hb = VectorXd::Zero(core.d);
        const VectorXd sI = svec(MatrixXcd::Identity(core.M, core.M));
        for (int bl = 0; bl < p.num_f_blocks; ++bl)
            core.cvec.segment(core.block_offset(bl), core.d) = sI;
    }

    const auto m = static_cast<Eigen::Index>(p.rows.size());
    core.A = MatrixXd::Zero(m, core.n);
    core.b.resize(m);
    core.row_scale.resize(m);
    core.equality.resize(static_cast<std::size_t>(m));
    for (Eigen::Index j = 0; j < m; ++j) {
        const TraceRow& row = p.rows[static_cast<std::size_t>(j)];
        const VectorXd base = svec(row.on_R);
        for (int bl = 0; bl < core.blocks; ++bl)
            core.A.row(j).segment(core.block_offset(bl), core.d) = base;
        if (row.special_block >= 0) {
            if (row.special_block >= p.num_f_blocks)
                throw std::logic_error("special block index out of range");
            core.A.row(j).segment(core.block_offset(row.special_block), core.d) +=
                svec(row.on_special);
        }
        const double norm = core.A.row(j).norm();
        const double scale = norm > 0.0 ? norm : 1.0;
        core.A.row(j) /= scale;
        core.b(j) = row.rhs / scale;
        core.row_scale(j) = scale;
        core.equality[static_cast<std::size_t>(j)] = row.equality;
    }
    return core;
}

/// sigma-dependent factorization caches for the regularized Newton solves.
struct SigmaCache {
    double sigma = 0.0;
    VectorXd inv_diag;    // 1 / (sigma + B*lam_i) in HG's eigenbasis
    VectorXd S_hb;        // (sigma I + B HG)^{-1} hb
    double schur_den = 1.0;
    MatrixXd W_A;         // n x m columns (Hess+sigma I)^{-1} A^T
    MatrixXd Gd;          // m x m dual Gram
};

struct AdmmWorkspace {
    const AdmmCore* core = nullptr;
    Eigen::SelfAdjointEigenSolver<MatrixXd> hg_eig;  // of HG (d x d), computed once
    SigmaCache cache;

    explicit AdmmWorkspace(const AdmmCore& c) : core(&c) {
        hg_eig.compute(c.HG);
    }

    VectorXd apply_S(const VectorXd& v) const {  // (sigma I + B HG)^{-1} v
        const MatrixXd& Q = hg_eig.eigenvectors();
        return Q * (cache.inv_diag.asDiagonal() * (Q.transpose() * v));
    }
    VectorXd apply_HG(const VectorXd& v) const { return core->HG * v; }

    /// p = (Hess + sigma I)^{-1} y using the shared-coupling structure.
    VectorXd inverse_apply(const VectorXd& y) const {
        const AdmmCore& c = *core;
        const double sigma = cache.sigma;
        VectorXd out(c.n);
        VectorXd Y = VectorXd::Zero(c.d);
        for (int bl = 0; bl < c.blocks; ++bl) Y += y.segment(c.block_offset(bl), c.d);
        double p_omega = 0.0;
        VectorXd s;
        if (c.has_omega) {
            const VectorXd SY = apply_S(Y);
            p_omega = (y(0) - c.hb.dot(SY)) / cache.schur_den;
            s = SY - static_cast<double>(c.blocks) * cache.S_hb * p_omega;
            out(0) = p_omega;
        } else {
            s = apply_S(Y);
        }
        const VectorXd HGs = apply_HG(s);
        for (int bl = 0; bl < c.blocks; ++bl) {
            const Eigen::Index off = c.block_offset(bl);
            out.segment(off, c.d) = (y.segment(off, c.d) - HGs) / sigma;
            if (c.has_omega)
                out.segment(off, c.d) -= (p_omega / sigma) * c.hb;
        }
        return out;
    }

    void refresh(double sigma) {
        const AdmmCore& c = *core;
        cache.sigma = sigma;
        const double B = static_cast<double>(c.blocks);
        cache.inv_diag =
            (VectorXd::Constant(c.d, sigma) + B * hg_eig.eigenvalues().cwiseMax(0.0)).cwiseInverse();
        cache.S_hb = apply_S(c.hb);
        cache.schur_den = c.ha + sigma - B * c.hb.dot(cache.S_hb);
        if (cache.schur_den <= 0.0) throw std::runtime_error("sdr: lost positive definiteness");
        const Eigen::Index m = c.A.rows();
        cache.W_A.resize(c.n, m);
        for (Eigen::Index j = 0; j < m; ++j)
            cache.W_A.col(j) = inverse_apply(c.A.row(j).transpose());
        cache.Gd = c.A * cache.W_A;
    }
};

inline double objective_value(const AdmmCore& c, const VectorXd& x) {
    double q = c.cvec.dot(x);
    if (c.quadratic) {
        VectorXd u = VectorXd::Zero(c.d);
        for (int bl = 0; bl < c.blocks; ++bl) u += x.segment(c.block_offset(bl), c.d);
        const double om = c.has_omega ? x(0) : 0.0;
        q += 0.5 * (c.ha * om * om) + om * c.hb.dot(u) + 0.5 * u.dot(c.HG * u);
    }
    return q;
}

/// Projection onto the cone: each block to the PSD cone, omega to >= 0.
inline void project_cone(const AdmmCore& c, VectorXd& v) {
    if (c.has_omega) v(0) = std::max(0.0, v(0));
    for (int bl = 0; bl < c.blocks; ++bl) {
        const Eigen::Index off = c.block_offset(bl);
        const MatrixXcd mat = unsvec(v.segment(off, c.d), c.M);
        v.segment(off, c.d) = svec(project_psd(mat));
    }
}

inline double worst_violation(const AdmmCore& c, const VectorXd& v) {
    double worst = 0.0;
    const VectorXd slack = c.A * v - c.b;
    for (Eigen::Index j = 0; j < slack.size(); ++j) {
        const double raw = slack(j) * c.row_scale(j);
        worst = std::max(worst, c.equality[static_cast<std::size_t>(j)] ? std::abs(raw) : raw);
    }
    return worst;
}

}  // namespace detail

inline SdpSolution solve_sdp(const SdpProblem& problem, const SolverSettings& settings = {}) {
    using namespace detail;
    const AdmmCore core = build_core(problem);
    AdmmWorkspace ws(core);
    double sigma = settings.sigma;
    ws.refresh(sigma);

    VectorXd c_solve = core.cvec;
    if (settings.f_trace_tiebreak > 0.0 && problem.num_v_blocks > 0) {
        const VectorXd sI = svec(MatrixXcd::Identity(core.M, core.M));
        for (int bl = 0; bl < problem.num_f_blocks; ++bl)
            c_solve.segment(core.block_offset(bl), core.d) += settings.f_trace_tiebreak * sI;
    }

    const Eigen::Index n = core.n;
    const Eigen::Index m = core.A.rows();
    VectorXd x = VectorXd::Zero(n), z = VectorXd::Zero(n), u = VectorXd::Zero(n);
    VectorXd mu = VectorXd::Zero(m);
    VectorXd z_prev = z;

    const double sqrt_n = std::sqrt(static_cast<double>(n));
    double r_prim = 0.0, r_dual = 0.0;
    bool converged = false;
    int it = 0;
    const double alpha = settings.over_relax;

    for (it = 0; it < settings.max_iters; ++it) {
        // x-update: quadratic objective + linear rows, solved via the dual
        const VectorXd v = z - u;
        const VectorXd x_u = ws.inverse_apply(sigma * v - c_solve);
        if (m > 0) {
            VectorXd grad = ws.cache.Gd * mu + (core.b - core.A * x_u);
            for (int sweep = 0; sweep < 400; ++sweep) {
                double max_change = 0.0;
                for (Eigen::Index j = 0; j < m; ++j) {
                    const double kjj = ws.cache.Gd(j, j);
                    if (kjj <= 1e-300) continue;
                    double nj = mu(j) - grad(j) / kjj;
                    if (!core.equality[static_cast<std::size_t>(j)]) nj = std::max(0.0, nj);
                    const double delta = nj - mu(j);
                    if (delta != 0.0) {
                        grad += delta * ws.cache.Gd.col(j);
                        mu(j) = nj;
                        max_change = std::max(max_change, std::abs(delta));
                    }
                }
                if (max_change <= 1e-12 * (1.0 + mu.cwiseAbs().maxCoeff())) break;
            }
            x = x_u - ws.cache.W_A * mu;
        } else {
            x = x_u;
        }

        // over-relaxed cone projection and dual ascent
        z_prev = z;
        const VectorXd xh = alpha * x + (1.0 - alpha) * z;
        z = xh + u;
        project_cone(core, z);
        u += xh - z;

        if ((it + 1) % settings.check_every == 0 || it + 1 == settings.max_iters) {
            r_prim = (x - z).norm();
            r_dual = sigma * (z - z_prev).norm();
            const double eps_pri =
                sqrt_n * settings.abs_tol + settings.rel_tol * std::max(x.norm(), z.norm());
            const double eps_dua =
                sqrt_n * settings.abs_tol + settings.rel_tol * sigma * u.norm();
            if (r_prim <= eps_pri && r_dual <= eps_dua &&
                worst_violation(core, z) <= settings.lin_tol) {
                converged = true;
                ++it;
                break;
            }
            if (settings.adaptive_sigma && (it + 1) % (settings.check_every * 4) == 0) {
                const double ratio = (r_prim / std::max(eps_pri, 1e-300)) /
                                     std::max(r_dual / std::max(eps_dua, 1e-300), 1e-300);
                double new_sigma = sigma;
                if (ratio > 10.0) new_sigma = std::min(sigma * 2.0, 1e8);
                else if (ratio < 0.1) new_sigma = std::max(sigma * 0.5, 1e-6);
                if (new_sigma != sigma) {
                    u *= sigma / new_sigma;
                    sigma = new_sigma;
                    ws.refresh(sigma);
                }
            }
        }
    }

    SdpSolution sol;
    sol.iterations = it;
    sol.converged = converged;
    sol.primal_residual = r_prim;
    sol.dual_residual = r_dual;
    sol.warnings = problem.warnings;
    sol.worst_linear_violation = worst_violation(core, z);
    if (!converged && sol.worst_linear_violation > 1e3 * settings.lin_tol &&
        sigma * u.norm() > 1e6 * (1.0 + x.norm()))
        sol.infeasible = true;

    const int M = core.M;
    sol.omega = core.has_omega ? z(0) : 0.0;
    sol.R = MatrixXcd::Zero(M, M);
    double min_eig = 0.0;
    for (int bl = 0; bl < problem.num_f_blocks; ++bl) {
        MatrixXcd Fb = unsvec(z.segment(core.block_offset(bl), core.d), M);
        Fb = hermitian_part(Fb);
        sol.R += Fb;
        Eigen::SelfAdjointEigenSolver<MatrixXcd> es(Fb);
        min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
        const double lam1 = es.eigenvalues()(M - 1);
        const double lam2 = M > 1 ? std::max(0.0, es.eigenvalues()(M - 2)) : 0.0;
        sol.rank_ratios.push_back(lam1 > 0.0 ? lam2 / lam1 : 0.0);
        sol.F.push_back(std::move(Fb));
    }
    if (problem.num_v_blocks > 0) {
        const MatrixXcd RV =
            hermitian_part(unsvec(z.segment(core.block_offset(problem.num_f_blocks), core.d), M));
        sol.R += RV;
        Eigen::SelfAdjointEigenSolver<MatrixXcd> es(RV);
        min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
        // exact split of the aggregate radar covariance into rank-one blocks
        for (int t = 0; t < M; ++t) {
            const double lam = std::max(0.0, es.eigenvalues()(M - 1 - t));
            const VectorXcd q = es.eigenvectors().col(M - 1 - t);
            sol.Vt.push_back(lam * q * q.adjoint());
            sol.rank_ratios.push_back(0.0);
        }
    }
    sol.min_eigenvalue = min_eig;
    sol.objective = objective_value(core, z);
    sol.gap = std::abs(objective_value(core, x) - sol.objective);
    return sol;
}

// ---------------------------------------------------------------------------
// Rank-one extraction: a block passes when its second eigenvalue is at most
// rank_tol times the first; the corresponding beamformer column is
// sqrt(lambda_1) times the leading eigenvector. Zero blocks yield zero
// columns. The aggregate-split V blocks are rank one by construction.
// ---------------------------------------------------------------------------
struct ExtractionReport {
    bool ok = false;
    std::vector<int> failed_blocks;
    std::vector<double> ratios;
    BeamformerSet bf;
};

inline ExtractionReport extract_rank_one(const SdpSolution& sol, const SdpProblem& problem,
                                         const SolverSettings& settings = {}) {
    const int M = problem.block_size();
    ExtractionReport rep;
    MatrixXcd W = MatrixXcd::Zero(M, problem.scenario.num_su());
    MatrixXcd V = MatrixXcd::Zero(M, M);
    int block_index = 0;
    for (std::size_t i = 0; i < sol.F.size(); ++i, ++block_index) {
        Eigen::SelfAdjointEigenSolver<MatrixXcd> es(sol.F[i]);
        const double lam1 = es.eigenvalues()(M - 1);
        const double lam2 = M > 1 ? std::max(0.0, es.eigenvalues()(M - 2)) : 0.0;
        const double ratio = lam1 > 0.0 ? lam2 / lam1 : 0.0;
        rep.ratios.push_back(ratio);
        if (lam1 <= 0.0) continue;  // zero block -> zero column
        if (ratio > settings.rank_tol) {
            rep.failed_blocks.push_back(block_index);
            continue;
        }
        W.col(static_cast<Eigen::Index>(i)) =
            normalize_phase(std::sqrt(lam1) * es.eigenvectors().col(M - 1));
    }
    for (std::size_t t = 0; t < sol.Vt.size(); ++t, ++block_index) {
        Eigen::SelfAdjointEigenSolver<MatrixXcd> es(sol.Vt[t]);
        const double lam1 = es.eigenvalues()(M - 1);
        const double lam2 = M > 1 ? std::max(0.0, es.eigenvalues()(M - 2)) : 0.0;
        rep.ratios.push_back(lam1 > 0.0 ? lam2 / lam1 : 0.0);
        if (lam1 <= 0.0) continue;
        if (lam1 > 0.0 && lam2 / lam1 > settings.rank_tol) {
            rep.failed_blocks.push_back(block_index);
            continue;
        }
        V.col(static_cast<Eigen::Index>(t)) =
            normalize_phase(std::sqrt(lam1) * es.eigenvectors().col(M - 1));
    }
    rep.ok = rep.failed_blocks.empty();
    rep.bf = BeamformerSet::make(std::move(W), std::move(V), sol.omega);
    return rep;
}

// ---------------------------------------------------------------------------
// Gaussian randomization. Communication candidates are sampled from the
// lifted blocks, w_i ~ CN(0, F_i), and given the tight-SINR power against the
// solved covariance. The radar columns are then re-derived as a factor of the
// PSD remainder R - sum_i w_i w_i^H, so the candidate reproduces the solved
// covariance (and with it the pattern, power and interference values) almost
// exactly; rank-deficient remainders are what makes independently drawn radar
// columns unable to meet the per-antenna rows. A final (p, q, omega) rescale
// polishes each candidate. Draw index -1 is the deterministic candidate built
// from the leading eigenvectors of the F blocks.
// ---------------------------------------------------------------------------
struct RandomizeResult {
    BeamformerSet bf;
    bool feasible = false;
    double objective = 0.0;
    double worst_violation = 0.0;
    int best_draw = -2;  // -1 denotes the deterministic leading-eigenvector candidate
};

namespace detail {

/// Columns of a factor of the PSD part of `rem` (rem ~= V V^H after clipping).
/// Returns false when rem is too indefinite to represent a covariance.
inline bool remainder_factor(const MatrixXcd& rem, MatrixXcd& V, double clip_fraction = 0.05) {
    const Eigen::Index M = rem.rows();
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(hermitian_part(rem));
    const double top = es.eigenvalues().maxCoeff();
    if (top <= 0.0) return false;
    if (es.eigenvalues().minCoeff() < -clip_fraction * top) return false;
    V.resize(M, M);
    for (Eigen::Index t = 0; t < M; ++t) {
        const double lam = std::max(0.0, es.eigenvalues()(M - 1 - t));
        V.col(t) = std::sqrt(lam) * es.eigenvectors().col(M - 1 - t);
    }
    return true;
}

}  // namespace detail

inline RandomizeResult randomize(const SdpSolution& sol, const SdpProblem& problem,
                                 const SolverSettings& settings = {},
                                 const SdpProblem* rescale_against = nullptr) {
    const Scenario& sc = problem.scenario;
    const SdpProblem& target = rescale_against ? *rescale_against : problem;
    const int M = problem.block_size();
    const auto Uc = static_cast<Eigen::Index>(sol.F.size());
    Rng rng(settings.rng_seed);

    std::vector<MatrixXcd> f_factors;
    std::vector<VectorXcd> f_leads;
    f_factors.reserve(static_cast<std::size_t>(Uc));
    for (const auto& F : sol.F) {
        Eigen::SelfAdjointEigenSolver<MatrixXcd> es(F);
        const VectorXd lam = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
        f_factors.push_back(es.eigenvectors() * lam.asDiagonal());
        f_leads.push_back(lam(M - 1) * es.eigenvectors().col(M - 1));
    }

    RandomizeResult best;
    double best_infeas_violation = std::numeric_limits<double>::infinity();
    RandomizeResult best_infeas;

    auto try_candidate = [&](const MatrixXcd& Wraw, int draw_index) {
        // tight-SINR power per communication column, interference taken from
        // the solved covariance which the candidate reproduces
        MatrixXcd Wd = Wraw;
        if (problem.variant.use_sinr) {
            for (Eigen::Index i = 0; i < Uc; ++i) {
                const MatrixXcd& H = problem.channels.H_s[static_cast<std::size_t>(i)];
                // tight scale against the constraints being restored, so a
                // margin carried by the solved covariance stays available
                const double eta = target.scenario.sinr_targets[static_cast<std::size_t>(i)];
                const double kappa = target.scenario.noise_var[static_cast<std::size_t>(i)] +
                                     (H * sol.R).trace().real();
                const double gain = detail::quad_form(Wd.col(i), H);
                if (gain <= 0.0) return;
                Wd.col(i) *= std::sqrt(kappa / ((1.0 + 1.0 / eta) * gain));
            }
        }
        MatrixXcd Vd(M, 0);
        if (problem.variant.has_radar) {
            MatrixXcd rem = sol.R;
            for (Eigen::Index i = 0; i < Uc; ++i)
                rem -= Wd.col(i) * Wd.col(i).adjoint();
            if (!detail::remainder_factor(rem, Vd)) return;
        }
        const RescaleOutcome out = power_rescale(Wd, Vd, target.scenario, target.channels,
                                                 target.pattern, target.table, target.variant);
        if (out.feasible && (!best.feasible || out.objective < best.objective)) {
            best.bf = out.bf;
            best.feasible = true;
            best.objective = out.objective;
            best.worst_violation = out.worst_violation;
            best.best_draw = draw_index;
        } else if (!out.feasible && out.worst_violation < best_infeas_violation) {
            best_infeas_violation = out.worst_violation;
            best_infeas.bf = out.bf;
            best_infeas.objective = out.objective;
            best_infeas.worst_violation = out.worst_violation;
            best_infeas.best_draw = draw_index;
        }
    };

    if (Uc > 0) {
        MatrixXcd W0(M, Uc);
        for (Eigen::Index i = 0; i < Uc; ++i) W0.col(i) = f_leads[static_cast<std::size_t>(i)];
        try_candidate(W0, -1);
        // channel-matched directions within the solved covariance: maximize
        // w^H H_i w over w w^H <= R via the top eigenpair of R^1/2 H_i R^1/2
        Eigen::SelfAdjointEigenSolver<MatrixXcd> er(hermitian_part(sol.R));
        const MatrixXcd Rh = er.eigenvectors() *
                             er.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                             er.eigenvectors().adjoint();
        MatrixXcd Wm(M, Uc);
        for (Eigen::Index i = 0; i < Uc; ++i) {
            const MatrixXcd& H = problem.channels.H_s[static_cast<std::size_t>(i)];
            Eigen::SelfAdjointEigenSolver<MatrixXcd> em(hermitian_part(Rh * H * Rh));
            Wm.col(i) = Rh * em.eigenvectors().col(M - 1);
        }
        try_candidate(Wm, -1);
    }
    for (int draw = 0; draw < std::max(1, settings.randomization_draws); ++draw) {
        MatrixXcd Wd(M, Uc);
        for (Eigen::Index i = 0; i < Uc; ++i)
            Wd.col(i) = f_factors[static_cast<std::size_t>(i)] * rng.cnormal_matrix(M, 1);
        if (Uc > 0) try_candidate(Wd, draw);
    }
    if (Uc == 0) try_candidate(MatrixXcd::Zero(M, 0), -1);
    return best.feasible ? best : best_infeas;
}

// ---------------------------------------------------------------------------
// Full relaxation pipeline: solve, try rank-one extraction, otherwise fall
// back to Gaussian randomization. Either way the candidate's column powers
// are re-solved once with the rescale program, which restores solver-grade
// feasibility (down to ~1e-9) after the eigenvalue truncation.
// ---------------------------------------------------------------------------
struct SdrRunResult {
    SdpSolution solution;  // relaxation at the stated targets; objective is the lower bound
    BeamformerSet bf;
    bool used_randomization = false;
    bool feasible = false;
    double objective = 0.0;      // beam MSE or total power of the returned beamformers
    double worst_violation = 0.0;
    double sinr_margin = 0.0;    // target inflation needed for rank-one recovery
};

// With statistical CSI the lifted blocks generally cannot be truncated to
// rank one without losing part of the signal trace, so beamformers recovered
// at the exact targets can come out a few percent short on SINR. The pipeline
// therefore retries the relaxation with slightly inflated SINR targets until
// a candidate passes the original constraints; the reported relaxation bound
// is always the margin-free solve.
inline SdrRunResult sdr_pipeline(const SdpProblem& problem, const SolverSettings& settings = {}) {
    SdrRunResult run;
    run.solution = solve_sdp(problem, settings);

    auto attempt = [&](const SdpSolution& sol, const SdpProblem& solved_problem,
                       RescaleOutcome& cand, bool& randomized) {
        bool have = false;
        const ExtractionReport ext = extract_rank_one(sol, solved_problem, settings);
        if (ext.ok) {
            cand = power_rescale(ext.bf.W, ext.bf.V, problem.scenario, problem.channels,
                                 problem.pattern, problem.table, problem.variant);
            have = true;
            if (cand.feasible) {
                randomized = false;
                return true;
            }
        }
        const RandomizeResult rnd = randomize(sol, solved_problem, settings, &problem);
        if (rnd.best_draw > -2) {
            const bool better = !have || (rnd.feasible && !cand.feasible) ||
                                (rnd.feasible == cand.feasible &&
                                 (rnd.feasible ? rnd.objective < cand.objective
                                               : rnd.worst_violation < cand.worst_violation));
            if (better) {
                cand.bf = rnd.bf;
                cand.objective = rnd.objective;
                cand.worst_violation = rnd.worst_violation;
                cand.feasible = rnd.feasible;
                randomized = true;
            }
        }
        return cand.feasible;
    };

    RescaleOutcome candidate;
    candidate.bf = BeamformerSet::zero(problem.block_size(), problem.scenario.num_su());
    candidate.worst_violation = std::numeric_limits<double>::infinity();
    bool randomized = false;
    bool ok = attempt(run.solution, problem, candidate, randomized);
    if (!ok && problem.variant.use_sinr) {
        for (double margin : {0.02, 0.05, 0.10, 0.20}) {
            SdpProblem inflated = problem;
            for (double& eta : inflated.scenario.sinr_targets) eta *= 1.0 + margin;
            for (TraceRow& row : inflated.rows) {
                // rebuild SINR specials against the inflated targets
                if (row.special_block >= 0) {
                    const auto i = static_cast<std::size_t>(row.special_block);
                    const double eta = inflated.scenario.sinr_targets[i];
                    row.on_special = -(1.0 + 1.0 / eta) * inflated.channels.H_s[i];
                }
            }
            const SdpSolution sol_m = solve_sdp(inflated, settings);
            if (sol_m.infeasible) break;
            RescaleOutcome cand_m;
            bool randomized_m = false;
            if (attempt(sol_m, inflated, cand_m, randomized_m)) {
                candidate = cand_m;
                randomized = randomized_m;
                run.sinr_margin = margin;
                ok = true;
                break;
            }
            if (!candidate.feasible && cand_m.worst_violation < candidate.worst_violation) {
                candidate = cand_m;
                randomized = randomized_m;
                run.sinr_margin = margin;
            }
        }
    }
    run.bf = candidate.bf;
    run.objective = candidate.objective;
    run.worst_violation = candidate.worst_violation;
    run.feasible = candidate.feasible;
    run.used_randomization = randomized;
    return run;
}

}  // namespace cogbeam

#endif
