// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include "cogbeam/beampattern.hpp"
#include "cogbeam/scenario.hpp"

using namespace cogbeam;

namespace {

BeamformerSet random_bf(const Scenario& sc, Rng& rng) {
    const int M = sc.antennas;
    const int U = sc.num_su();
    const double scale = std::sqrt(sc.power_budget / (M * (U + M)));
    MatrixXcd W = scale * rng.cnormal_matrix(M, U);
    MatrixXcd V = scale * rng.cnormal_matrix(M, M);
    return BeamformerSet::make(std::move(W), std::move(V), rng.uniform() * 2.0 * M);
}

}  // namespace

TEST_CASE("covariance of a beamformer set", "[beampattern]") {
    SECTION("zero input") {
        const BeamformerSet bf = BeamformerSet::zero(4, 2);
        CHECK(covariance_of(bf).cwiseAbs().maxCoeff() == 0.0);
    }
    SECTION("identity radar matrix") {
        BeamformerSet bf = BeamformerSet::zero(4, 2);
        bf.V = MatrixXcd::Identity(4, 4);
        CHECK((covariance_of(bf) - MatrixXcd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-15);
    }
    SECTION("matches column-wise outer-product sum") {
        const Scenario sc = Scenario::reference(6);
        Rng rng(7);
        const BeamformerSet bf = random_bf(sc, rng);
        MatrixXcd ref = MatrixXcd::Zero(6, 6);
        for (Eigen::Index c = 0; c < bf.W.cols(); ++c)
            ref += bf.W.col(c) * bf.W.col(c).adjoint();
        for (Eigen::Index c = 0; c < bf.V.cols(); ++c)
            ref += bf.V.col(c) * bf.V.col(c).adjoint();
        CHECK((covariance_of(bf) - ref).cwiseAbs().maxCoeff() < 1e-13);
    }
}

TEST_CASE("beam pattern evaluation", "[beampattern]") {
    SECTION("identity covariance radiates M everywhere") {
        const MatrixXcd R = MatrixXcd::Identity(10, 10);
        for (double th : {-72.0, -10.0, 0.0, 33.0, 90.0})
            CHECK(beam_pattern(R, th) == Catch::Approx(10.0).epsilon(1e-12));
    }
    SECTION("aligned rank-one covariance peaks at M^2") {
        const VectorXcd a = steering_vector(17.0, 10);
        const MatrixXcd R = a * a.adjoint();
        CHECK(beam_pattern(R, 17.0) == Catch::Approx(100.0).epsilon(1e-12));
    }
    SECTION("matches the Kronecker-vectorization identity") {
        const Scenario sc = Scenario::reference(6);
        Rng rng(21);
        const BeamformerSet bf = random_bf(sc, rng);
        const MatrixXcd R = covariance_of(bf);
        const VectorXcd vecR = Eigen::Map<const VectorXcd>(R.data(), 36);
        for (double th : {-55.0, 3.0, 41.0}) {
            const VectorXcd a = steering_vector(th, 6);
            // row vector a^T kron a^H applied to vec(R)
            const VectorXcd ck = conj_kron_self(a);
            const double via_kron = real_checked(ck.dot(vecR), 1.0, 1e-8);
            CHECK(beam_pattern(R, th) == Catch::Approx(via_kron).epsilon(1e-10));
        }
    }
    SECTION("additive in the covariance") {
        Rng rng(3);
        const Scenario sc = Scenario::reference(6);
        const MatrixXcd R1 = covariance_of(random_bf(sc, rng));
        const MatrixXcd R2 = covariance_of(random_bf(sc, rng));
        for (double th : {-40.0, 12.0}) {
            const double lhs = beam_pattern(R1 + R2, th);
            const double rhs = beam_pattern(R1, th) + beam_pattern(R2, th);
            CHECK(lhs == Catch::Approx(rhs).epsilon(1e-12));
        }
    }
    SECTION("grid path agrees with pointwise evaluation") {
        const Scenario sc = Scenario::reference(8);
        const SteeringTable table = SteeringTable::build(sc);
        Rng rng(11);
        const BeamformerSet bf = random_bf(sc, rng);
        const MatrixXcd R = covariance_of(bf);
        const VectorXd fast = beam_pattern_grid(table, bf);
        for (Eigen::Index g = 0; g < table.grid_size(); g += 17)
            CHECK(fast(g) ==
                  Catch::Approx(beam_pattern(R, table.grid_angles_deg[g])).epsilon(1e-10));
    }
}

TEST_CASE("mse representations agree", "[beampattern]") {
    const Scenario sc = Scenario::reference(10);
    const DesiredPattern pat = desired_pattern(sc);
    const SteeringTable table = SteeringTable::build(sc);

    SECTION("all-zero beamformer with omega 0") {
        const BeamformerSet bf = BeamformerSet::zero(10, 2);
        CHECK(mse_direct(bf, pat, table) == 0.0);
    }
    SECTION("all-zero beamformer with omega 1 integrates the mask") {
        BeamformerSet bf = BeamformerSet::zero(10, 2);
        bf.omega = 1.0;
        CHECK(mse_direct(bf, pat, table) == Catch::Approx(33.0 / 181.0).epsilon(1e-14));
    }
    SECTION("direct equals quadratic on seeded random sets") {
        const OmegaMatrix om = build_omega(pat, sc);
        Rng rng(1234);
        for (int trial = 0; trial < 25; ++trial) {
            const BeamformerSet bf = random_bf(sc, rng);
            const double a = mse_direct(bf, pat, table);
            const double b = mse_quadratic(bf, om);
            CHECK(a == Catch::Approx(b).epsilon(1e-9));
        }
    }
    SECTION("quadratic form scales quadratically") {
        const OmegaMatrix om = build_omega(pat, sc);
        Rng rng(5);
        BeamformerSet bf = random_bf(sc, rng);
        const double base = mse_quadratic(bf, om);
        BeamformerSet scaled = bf;
        scaled.W *= std::sqrt(3.0);
        scaled.V *= std::sqrt(3.0);
        scaled.omega *= 3.0;  // z -> 3 z
        CHECK(mse_quadratic(scaled, om) == Catch::Approx(9.0 * base).epsilon(1e-9));
    }
}

TEST_CASE("omega matrix properties", "[beampattern]") {
    for (int M : {4, 10}) {
        Scenario sc = Scenario::reference(10);
        sc.antennas = M;
        if (M == 4) {
            sc.su_angles_deg.clear();
            sc.pu_angles_deg.clear();
            sc.sinr_targets.clear();
            sc.noise_var.clear();
        }
        const DesiredPattern pat = desired_pattern(sc);
        const OmegaMatrix om = build_omega(pat, sc);
        REQUIRE(om.Omega.rows() == M * M + 1);
        CHECK(max_hermitian_defect(om.Omega) < 1e-12);
        CHECK(om.Omega(0, 0).real() == 33.0 / 181.0);  // exact accumulation
        Eigen::SelfAdjointEigenSolver<MatrixXcd> es(om.Omega);
        CHECK(es.eigenvalues().minCoeff() >= -1e-9);
    }
}

TEST_CASE("single-term omega matrix decouples the scale slot", "[beampattern]") {
    Scenario sc = Scenario::reference(10);
    sc.antennas = 4;
    sc.su_angles_deg.clear();
    sc.pu_angles_deg.clear();
    sc.sinr_targets.clear();
    sc.noise_var.clear();
    sc.target_angles_deg = {10.0};
    sc.beam_halfwidth_deg = 0.0;
    sc.grid = GridSpec{30.0, 30.0, 1.0};  // single angle, outside the mask
    const DesiredPattern pat = desired_pattern(sc);
    REQUIRE(pat.values.sum() == 0.0);
    const OmegaMatrix om = build_omega(pat, sc);
    const VectorXcd a = steering_vector(30.0, 4);
    const VectorXcd ck = conj_kron_self(a);
    const MatrixXcd expect = ck * ck.adjoint();
    CHECK(om.Omega.row(0).cwiseAbs().maxCoeff() == 0.0);
    CHECK(om.Omega.col(0).cwiseAbs().maxCoeff() == 0.0);
    CHECK((om.Omega.bottomRightCorner(16, 16) - expect).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("optimal omega", "[beampattern]") {
    const Scenario sc = Scenario::reference(10);
    const DesiredPattern pat = desired_pattern(sc);
    const SteeringTable table = SteeringTable::build(sc);

    SECTION("zero covariance gives zero scale") {
        CHECK(optimal_omega(MatrixXcd::Zero(10, 10), pat, table) == 0.0);
    }
    SECTION("identity covariance gives M") {
        CHECK(optimal_omega(MatrixXcd::Identity(10, 10), pat, table) ==
              Catch::Approx(10.0).epsilon(1e-12));
    }
    SECTION("all-zero mask is an error") {
        Scenario empty = sc;
        empty.target_angles_deg.clear();
        const DesiredPattern none = desired_pattern(empty);
        CHECK_THROWS_AS(optimal_omega(MatrixXcd::Identity(10, 10), none, table),
                        std::invalid_argument);
    }
    SECTION("agrees with a golden-section search and is a minimizer") {
        Rng rng(77);
        const BeamformerSet bf = random_bf(sc, rng);
        const MatrixXcd R = covariance_of(bf);
        const double w_star = optimal_omega(R, pat, table);
        const VectorXd pattern = beam_pattern_grid(table, bf);

        auto objective = [&](double w) { return mse_from_pattern(pattern, pat, w); };
        // golden-section search over [0, 4M]
        double lo = 0.0, hi = 40.0;
        const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
        double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
        for (int it = 0; it < 200; ++it) {
            if (objective(c) < objective(d)) hi = d; else lo = c;
            c = hi - gr * (hi - lo);
            d = lo + gr * (hi - lo);
        }
        const double w_search = 0.5 * (lo + hi);
        CHECK(w_star == Catch::Approx(w_search).margin(1e-6));

        const double best = objective(w_star);
        for (int i = 0; i < 20; ++i) {
            const double w_other = std::max(0.0, w_star + (rng.uniform() - 0.5) * 4.0);
            CHECK(best <= objective(w_other) + 1e-12);
        }
    }
}
