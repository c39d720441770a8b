// SPDX-License-Identifier: Apache-2.0
//
// cogbeam: beamforming design toolkit for cognitive dual-function
// radar-communication systems.

#ifndef COGBEAM_CORE_HPP
#define COGBEAM_CORE_HPP

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace cogbeam {

using cplx = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

inline constexpr double pi = 3.14159265358979323846;

inline double deg2rad(double deg) { return deg * (pi / 180.0); }

/// Extracts the real part of a numerically-real quantity; throws if the
/// imaginary residue exceeds tolerance relative to the magnitude scale.
inline double real_checked(cplx z, double scale = 1.0, double tol = 1e-8) {
    const double bound = tol * std::max(1.0, std::max(scale, std::abs(z)));
    if (std::abs(z.imag()) > bound)
        throw std::runtime_error("real_checked: imaginary residue " +
                                 std::to_string(z.imag()) + " exceeds tolerance");
    return z.real();
}

inline double max_hermitian_defect(const MatrixXcd& A) {
    return (A - A.adjoint()).cwiseAbs().maxCoeff();
}

/// Symmetrizes in place; cheap guard before eigendecompositions.
inline MatrixXcd hermitian_part(const MatrixXcd& A) { return 0.5 * (A + A.adjoint()); }

// ---------------------------------------------------------------------------
// Deterministic random number generator.
//
// splitmix64-seeded xoshiro256++ with explicit Box-Muller normals, so streams
// are reproducible independent of the standard library implementation.
// ---------------------------------------------------------------------------
class Rng {
  public:
    explicit Rng(std::uint64_t seed = 1) { reseed(seed); }

    void reseed(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& word : state_) {
            x += 0x9e3779b97f4a7c15ULL;
            std::uint64_t z = x;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            word = z ^ (z >> 31);
        }
        have_spare_ = false;
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in (0, 1]; safe as a log() argument.
    double uniform_pos() { return 1.0 - uniform(); }

    /// Standard normal via Box-Muller.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u = uniform_pos();
        const double v = uniform();
        const double r = std::sqrt(-2.0 * std::log(u));
        spare_ = r * std::sin(2.0 * pi * v);
        have_spare_ = true;
        return r * std::cos(2.0 * pi * v);
    }

    /// Circularly-symmetric complex normal with E[|z|^2] = 1.
    cplx cnormal() {
        const double s = 1.0 / std::sqrt(2.0);
        const double re = normal();
        const double im = normal();
        return {s * re, s * im};
    }

    MatrixXcd cnormal_matrix(Eigen::Index rows, Eigen::Index cols) {
        MatrixXcd out(rows, cols);
        for (Eigen::Index c = 0; c < cols; ++c)
            for (Eigen::Index r = 0; r < rows; ++r) out(r, c) = cnormal();
        return out;
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t state_[4] = {};
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// ---------------------------------------------------------------------------
// Real svec coordinates for Hermitian matrices.
//
// An M x M Hermitian matrix has M^2 real degrees of freedom. Layout:
// first the M real diagonal entries, then for each column j and row i < j
// the pair (sqrt(2) Re A_ij, sqrt(2) Im A_ij). The scaling makes the map an
// isometry: <A, B> = Tr(A B) = svec(A) . svec(B).
// ---------------------------------------------------------------------------
inline Eigen::Index svec_dim(Eigen::Index m) { return m * m; }

inline VectorXd svec(const MatrixXcd& A) {
    const Eigen::Index m = A.rows();
    VectorXd out(svec_dim(m));
    for (Eigen::Index i = 0; i < m; ++i) out(i) = A(i, i).real();
    const double rt2 = std::sqrt(2.0);
    Eigen::Index k = m;
    for (Eigen::Index j = 1; j < m; ++j)
        for (Eigen::Index i = 0; i < j; ++i) {
            out(k++) = rt2 * A(i, j).real();
            out(k++) = rt2 * A(i, j).imag();
        }
    return out;
}

inline MatrixXcd unsvec(const VectorXd& v, Eigen::Index m) {
    MatrixXcd A(m, m);
    for (Eigen::Index i = 0; i < m; ++i) A(i, i) = v(i);
    const double inv_rt2 = 1.0 / std::sqrt(2.0);
    Eigen::Index k = m;
    for (Eigen::Index j = 1; j < m; ++j)
        for (Eigen::Index i = 0; i < j; ++i) {
            const cplx z(inv_rt2 * v(k), inv_rt2 * v(k + 1));
            k += 2;
            A(i, j) = z;
            A(j, i) = std::conj(z);
        }
    return A;
}

/// Nearest PSD matrix in Frobenius norm (negative eigenvalues clipped).
inline MatrixXcd project_psd(const MatrixXcd& A) {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(hermitian_part(A));
    VectorXd lam = es.eigenvalues().cwiseMax(0.0);
    return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint();
}

/// Rotates v so its first entry of non-negligible magnitude is real >= 0.
inline VectorXcd normalize_phase(VectorXcd v) {
    const double scale = v.norm();
    if (scale == 0.0) return v;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::abs(v(i)) > 1e-12 * scale) {
            v *= std::conj(v(i)) / std::abs(v(i));
            break;
        }
    }
    return v;
}

}  // namespace cogbeam

#endif
