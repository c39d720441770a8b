// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include "cogbeam/constraints.hpp"

using namespace cogbeam;

namespace {

BeamformerSet random_bf(const Scenario& sc, Rng& rng, double power_scale = 1.0) {
    const int M = sc.antennas;
    const int U = sc.num_su();
    const double scale = power_scale * std::sqrt(sc.power_budget / (M * (U + M)));
    return BeamformerSet::make(scale * rng.cnormal_matrix(M, U), scale * rng.cnormal_matrix(M, M),
                               rng.uniform() * 2.0 * M);
}

}  // namespace

TEST_CASE("sinr closed form", "[constraints]") {
    const Scenario sc = Scenario::reference(10);
    const ChannelSet ch = build_channels(sc);

    SECTION("zero numerator for zero communication beams") {
        const BeamformerSet bf = BeamformerSet::zero(10, 2);
        CHECK(sinr(bf, ch, 0, 0.1) == 0.0);
    }
    SECTION("matched filter on a rank-one channel") {
        // single SU, no radar beams, channel h h^H
        Scenario one = sc;
        one.su_angles_deg = {20.0};
        one.sinr_targets = {10.0};
        one.noise_var = {0.1};
        ChannelSet chan;
        const VectorXcd h = steering_vector(20.0, 10);
        chan.H_s = {h * h.adjoint()};
        const double p = 0.35;
        BeamformerSet bf = BeamformerSet::zero(10, 1);
        bf.W.col(0) = std::sqrt(p) * h / h.norm();
        const double expect = p * h.squaredNorm() / 0.1;
        CHECK(sinr(bf, chan, 0, 0.1) == Catch::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("per-antenna power", "[constraints]") {
    SECTION("zeros and identity") {
        CHECK(per_antenna_power(BeamformerSet::zero(5, 2)).maxCoeff() == 0.0);
        BeamformerSet bf = BeamformerSet::zero(5, 2);
        bf.V = MatrixXcd::Identity(5, 5);
        CHECK((per_antenna_power(bf) - VectorXd::Ones(5)).cwiseAbs().maxCoeff() < 1e-15);
    }
    SECTION("sums to the covariance trace") {
        const Scenario sc = Scenario::reference(10);
        Rng rng(9);
        const BeamformerSet bf = random_bf(sc, rng);
        const double tr = covariance_of(bf).trace().real();
        CHECK(per_antenna_power(bf).sum() == Catch::Approx(tr).epsilon(1e-12));
    }
}

TEST_CASE("interference forms", "[constraints]") {
    const Scenario sc = Scenario::reference(10);
    const ChannelSet ch = build_channels(sc);
    SECTION("zero beamformer radiates nothing") {
        CHECK(interference(BeamformerSet::zero(10, 2), ch, 0) == 0.0);
    }
    SECTION("identity channel measures total transmit power") {
        ChannelSet eye = ch;
        eye.H_p[0] = MatrixXcd::Identity(10, 10);
        Rng rng(31);
        const BeamformerSet bf = random_bf(sc, rng);
        const double total = covariance_of(bf).trace().real();
        CHECK(interference(bf, eye, 0) == Catch::Approx(total).epsilon(1e-12));
    }
    SECTION("equals the lifted trace form") {
        Rng rng(13);
        for (int trial = 0; trial < 20; ++trial) {
            const BeamformerSet bf = random_bf(sc, rng);
            const double lifted = (ch.H_p[0] * covariance_of(bf)).trace().real();
            CHECK(interference(bf, ch, 0) == Catch::Approx(lifted).epsilon(1e-10));
        }
    }
}

TEST_CASE("penalty terms", "[constraints]") {
    const Scenario sc = Scenario::reference(10);
    const ChannelSet ch = build_channels(sc);

    SECTION("zero beamformer violates SINR only") {
        const BeamformerSet bf = BeamformerSet::zero(10, 2);
        const PenaltyTerms t = penalty_terms(bf, ch, sc);
        for (int i = 0; i < 2; ++i) CHECK(t.f(i) == Catch::Approx(10.0 * 0.1).epsilon(1e-12));
        for (int i = 0; i < 10; ++i) CHECK(t.d(i) == Catch::Approx(-0.1).epsilon(1e-12));
        CHECK(t.g(0) == Catch::Approx(-0.01).epsilon(1e-12));
    }

    SECTION("sign equivalence with the SINR definition over 200 seeds") {
        Rng rng(4242);
        int boundary_skips = 0;
        for (int trial = 0; trial < 200; ++trial) {
            const BeamformerSet bf = random_bf(sc, rng, rng.uniform() * 2.0);
            const PenaltyTerms t = penalty_terms(bf, ch, sc);
            for (int i = 0; i < 2; ++i) {
                const double s = sinr(bf, ch, i, sc.noise_var[i]);
                const double eta = sc.sinr_targets[i];
                if (std::abs(s - eta) < 1e-9 * eta) { ++boundary_skips; continue; }
                CHECK((t.f(i) <= 0.0) == (s >= eta));
            }
        }
        CHECK(boundary_skips < 10);
    }

    SECTION("lifted trace-form equivalence over 200 seeds") {
        Rng rng(777);
        for (int trial = 0; trial < 200; ++trial) {
            const BeamformerSet bf = random_bf(sc, rng, rng.uniform() * 2.0);
            const PenaltyTerms t = penalty_terms(bf, ch, sc);
            for (int i = 0; i < 2; ++i) {
                const MatrixXcd& H = ch.H_s[i];
                const double eta = sc.sinr_targets[i];
                const MatrixXcd Fi = bf.W.col(i) * bf.W.col(i).adjoint();
                double lhs = (1.0 + 1.0 / eta) * (H * Fi).trace().real();
                for (int j = 0; j < 2; ++j) {
                    const MatrixXcd Fj = bf.W.col(j) * bf.W.col(j).adjoint();
                    lhs -= (H * Fj).trace().real();
                }
                for (int v = 0; v < 10; ++v) {
                    const MatrixXcd Vt = bf.V.col(v) * bf.V.col(v).adjoint();
                    lhs -= (H * Vt).trace().real();
                }
                lhs -= sc.noise_var[i];
                // lhs >= 0 iff f_i <= 0 (they differ by the factor -eta)
                CHECK(lhs * (-eta) == Catch::Approx(t.f(i)).margin(1e-10));
            }
        }
    }
}

TEST_CASE("penalty function", "[constraints]") {
    Scenario sc = Scenario::reference(10);
    const ChannelSet ch = build_channels(sc);

    SECTION("zero beamformer pays only the SINR terms") {
        sc.per_antenna_equality = false;
        const BeamformerSet bf = BeamformerSet::zero(10, 2);
        const double q = penalty(bf, ch, sc, 1.0, 1.0, 1.0);
        CHECK(q == Catch::Approx(2.0 * std::pow(10.0 * 0.1, 2)).epsilon(1e-12));
    }
    SECTION("doubling the constants doubles the penalty") {
        Rng rng(55);
        const BeamformerSet bf = random_bf(sc, rng, 2.0);
        const double q1 = penalty(bf, ch, sc, 1.0, 1.0, 1.0);
        REQUIRE(q1 > 0.0);
        CHECK(penalty(bf, ch, sc, 2.0, 2.0, 2.0) == Catch::Approx(2.0 * q1).epsilon(1e-12));
    }
    SECTION("equality mode penalizes under-used power") {
        const BeamformerSet bf = BeamformerSet::zero(10, 2);
        sc.per_antenna_equality = true;
        CHECK(penalty(bf, ch, sc, 0.0, 1.0, 0.0) == Catch::Approx(10.0 * 0.01).epsilon(1e-12));
        sc.per_antenna_equality = false;
        CHECK(penalty(bf, ch, sc, 0.0, 1.0, 0.0) == 0.0);
    }
    SECTION("continuous near constraint boundaries") {
        Rng rng(99);
        for (int pt = 0; pt < 10; ++pt) {
            BeamformerSet bf = random_bf(sc, rng);
            // scale so that the first SINR constraint is near-active
            const PenaltyTerms t0 = penalty_terms(bf, ch, sc);
            (void)t0;
            const double q0 = penalty(bf, ch, sc, 1.0, 1.0, 1.0);
            BeamformerSet pert = bf;
            const double eps = 1e-6;
            pert.W(0, 0) += eps;
            pert.omega += eps;
            const double q1 = penalty(pert, ch, sc, 1.0, 1.0, 1.0);
            // O(eps) continuity with a generous Lipschitz budget
            CHECK(std::abs(q1 - q0) <= 1e3 * eps);
        }
    }
}

TEST_CASE("constraint report", "[constraints]") {
    Scenario sc = Scenario::reference(10);
    sc.per_antenna_equality = false;
    const ChannelSet ch = build_channels(sc);
    const BeamformerSet bf = BeamformerSet::zero(10, 2);
    const ConstraintReport rep = evaluate_constraints(bf, ch, sc);
    CHECK_FALSE(rep.feasible);  // SINR unmet
    CHECK(rep.worst_violation == Catch::Approx(1.0).epsilon(1e-12));
    CHECK(rep.sinr_values.size() == 2);
    CHECK(rep.per_antenna.size() == 10);
    CHECK(rep.interference_values.size() == 1);
    CHECK(rep.power_equality_gap == Catch::Approx(0.1).epsilon(1e-12));
}
