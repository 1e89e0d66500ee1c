#pragma once

#include "linalg.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace steinflow {

/// Spectrum of a linearized system x' = -B x and the explicit Euler quantities derived from it.
/// condition_number is max|lambda| / min|lambda|, optimal_step 2 / (max|lambda| + min|lambda|) and
/// contraction (kappa - 1) / (kappa + 1); euler_radius is max |1 - h* lambda| over the spectrum,
/// which equals `contraction` only for a real spectrum.
template <typename Scalar = double> struct SpectralReport {
    std::vector<std::complex<Scalar>> eigenvalues;
    Scalar spectral_abscissa = Scalar(0);
    Scalar condition_number = Scalar(1);
    Scalar optimal_step = Scalar(0);
    Scalar contraction = Scalar(0);
    Scalar euler_radius = Scalar(0);
    Scalar verification_error = Scalar(0);
};

template <typename Scalar>
SpectralReport<Scalar> make_report(std::vector<std::complex<Scalar>> eigenvalues)
{
    require(!eigenvalues.empty(), "spectral report: empty spectrum");
    SpectralReport<Scalar> rep;
    Scalar amin = std::numeric_limits<Scalar>::infinity();
    Scalar amax = Scalar(0);
    Scalar rmin = std::numeric_limits<Scalar>::infinity();
    for (const auto& l : eigenvalues) {
        amin = std::min(amin, std::abs(l));
        amax = std::max(amax, std::abs(l));
        rmin = std::min(rmin, l.real());
    }
    rep.spectral_abscissa = rmin;
    rep.condition_number = amin > Scalar(0) ? amax / amin : std::numeric_limits<Scalar>::infinity();
    rep.optimal_step = Scalar(2) / (amax + amin);
    rep.contraction = (rep.condition_number - Scalar(1)) / (rep.condition_number + Scalar(1));
    Scalar rad = Scalar(0);
    for (const auto& l : eigenvalues)
        rad = std::max(rad, std::abs(Scalar(1) - rep.optimal_step * l));
    rep.euler_radius = rad;
    rep.eigenvalues = std::move(eigenvalues);
    return rep;
}

/// Greedy nearest pairing; returns the largest |a_i - b_pi(i)| / (1 + |a_i|).
template <typename Scalar>
Scalar match_spectra(const std::vector<std::complex<Scalar>>& a, const std::vector<std::complex<Scalar>>& b)
{
    require(a.size() == b.size(), "match_spectra: spectra have different sizes");
    std::vector<bool> used(b.size(), false);
    Scalar worst = Scalar(0);
    for (const auto& x : a) {
        std::size_t best = b.size();
        Scalar dist = std::numeric_limits<Scalar>::infinity();
        for (std::size_t j = 0; j < b.size(); ++j) {
            if (used[j])
                continue;
            const Scalar dj = std::abs(x - b[j]);
            if (dj < dist) {
                dist = dj;
                best = j;
            }
        }
        used[best] = true;
        worst = std::max(worst, dist / (Scalar(1) + std::abs(x)));
    }
    return worst;
}

/// B_A = [[K(b,b) Q^{-1}, (b^T A) kron Q^{-1}], [(QAb) (+) Q^{-1}, Q^{-1} (+) (QA)]] with
/// M (+) N = M kron N + N kron M.
template <typename Scalar>
MatX<Scalar> svgd_linearized_matrix(const MatX<Scalar>& A, const VecX<Scalar>& b, const MatX<Scalar>& Q)
{
    require(A.rows() == Q.rows() && b.size() == Q.rows(), "svgd_linearized_matrix: dimension mismatch");
    require_spd(A, "A");
    require_spd(Q, "Q");
    const Index d = b.size();
    const MatX<Scalar> Qi = spd_inverse<Scalar>(Q);
    const MatX<Scalar> bA = b.transpose() * A;
    const MatX<Scalar> QAb = Q * A * b;
    MatX<Scalar> B(d + d * d, d + d * d);
    B.topLeftCorner(d, d) = (b.dot(A * b) + Scalar(1)) * Qi;
    B.topRightCorner(d, d * d) = kron(bA, Qi);
    B.bottomLeftCorner(d * d, d) = kron_sum(QAb, Qi);
    B.bottomRightCorner(d * d, d * d) = kron_sum(Qi, MatX<Scalar>(Q * A));
    return B;
}

/// Closed-form eigenvalues (lambda_-, lambda_+) of the scalar B_A.
template <typename Scalar> std::pair<Scalar, Scalar> eigs_1d(Scalar A, Scalar Q, Scalar b)
{
    require(A > Scalar(0) && Q > Scalar(0), "eigs_1d: A and Q must be positive");
    const Scalar p = Scalar(2) * A * Q + A * b * b + Scalar(1);
    const Scalar disc = std::sqrt(std::max(Scalar(0), p * p - Scalar(8) * A * Q));
    return {(p - disc) / (Scalar(2) * Q), (p + disc) / (Scalar(2) * Q)};
}

template <typename Scalar> Scalar svgd_condition_1d(Scalar A, Scalar Q, Scalar b)
{
    const auto [lo, hi] = eigs_1d(A, Q, b);
    return hi / lo;
}

enum class OptimalAMode { Scalar1D, Commuting };

template <typename Scalar> struct OptimalA {
    MatX<Scalar> A;
    // step size paired with A in the scalar case, NaN otherwise
    Scalar h_star = std::numeric_limits<Scalar>::quiet_NaN();
};

template <typename Scalar>
OptimalA<Scalar> optimal_A_svgd(const VecX<Scalar>& b, const MatX<Scalar>& Q, OptimalAMode mode)
{
    require(Q.rows() == Q.cols() && b.size() == Q.rows(), "optimal_A_svgd: dimension mismatch");
    require_spd(Q, "Q");
    OptimalA<Scalar> res;
    if (mode == OptimalAMode::Scalar1D) {
        require(b.size() == 1, "optimal_A_svgd: scalar-1d mode requires d = 1");
        res.A = MatX<Scalar>::Constant(1, 1, Scalar(1) / (Scalar(2) * Q(0, 0) + b(0) * b(0)));
        res.h_star = Q(0, 0);
        return res;
    }
    require(b.isZero(0), "optimal_A_svgd: commuting mode requires b = 0");
    res.A = Scalar(0.5) * spd_inverse<Scalar>(Q);
    return res;
}

/// Accelerated linearization at a centered equilibrium:
/// [[0, -2 (QAQ (+) I)], [Q^{-1} kron Q^{-1} / 2, alpha I]], size 2d^2.
template <typename Scalar>
MatX<Scalar> asvgd_linearized_matrix(const MatX<Scalar>& A, const MatX<Scalar>& Q, Scalar alpha)
{
    require(A.rows() == Q.rows() && A.cols() == Q.cols(), "asvgd_linearized_matrix: dimension mismatch");
    require(alpha >= Scalar(0), "asvgd_linearized_matrix: alpha must be nonnegative");
    const Index d = Q.rows();
    const Index m = d * d;
    const MatX<Scalar> I = MatX<Scalar>::Identity(d, d);
    const MatX<Scalar> Qi = spd_inverse<Scalar>(Q);
    MatX<Scalar> B = MatX<Scalar>::Zero(2 * m, 2 * m);
    B.topRightCorner(m, m) = Scalar(-2) * kron_sum(MatX<Scalar>(Q * A * Q), I);
    B.bottomLeftCorner(m, m) = Scalar(0.5) * kron(Qi, Qi);
    B.bottomRightCorner(m, m) = alpha * MatX<Scalar>::Identity(m, m);
    return B;
}

/// Eigenvalue pairs (a_i, q_i) of commuting symmetric A, Q in a shared eigenbasis.
template <typename Scalar>
std::pair<VecX<Scalar>, VecX<Scalar>> joint_eigenvalues(const MatX<Scalar>& A, const MatX<Scalar>& Q)
{
    require_spd(A, "A");
    require_spd(Q, "Q");
    if (!commute(A, Q))
        throw ContractError("A and Q must commute");
    // a generic combination separates the joint eigenspaces
    const MatX<Scalar> M = Q / Q.norm() + Scalar(0.7071067811865476) * A / A.norm();
    Eigen::SelfAdjointEigenSolver<MatX<Scalar>> es(sym(M));
    const MatX<Scalar>& V = es.eigenvectors();
    const MatX<Scalar> DA = V.transpose() * A * V;
    const MatX<Scalar> DQ = V.transpose() * Q * V;
    const Scalar off = std::max((DA - MatX<Scalar>(DA.diagonal().asDiagonal())).norm() / A.norm(),
                                (DQ - MatX<Scalar>(DQ.diagonal().asDiagonal())).norm() / Q.norm());
    if (off > Scalar(1e-8))
        throw NumericalError("joint_eigenvalues: failed to diagonalize A and Q simultaneously");
    return {DA.diagonal(), DQ.diagonal()};
}

/// mu_ij = (q_i / q_j) a_i + (q_j / q_i) a_j, ordered with j fastest.
template <typename Scalar> std::vector<Scalar> mode_frequencies(const MatX<Scalar>& A, const MatX<Scalar>& Q)
{
    const auto [a, q] = joint_eigenvalues(A, Q);
    std::vector<Scalar> mu;
    for (Index i = 0; i < a.size(); ++i)
        for (Index j = 0; j < a.size(); ++j)
            mu.push_back(q(i) / q(j) * a(i) + q(j) / q(i) * a(j));
    return mu;
}

/// lambda = alpha/2 +- sqrt(alpha^2 - 4 mu_ij) / 2 for every mode. A discriminant within rounding
/// of zero is taken as an exact double root; otherwise the square root turns 1e-16 into 1e-8.
template <typename Scalar>
std::vector<std::complex<Scalar>> asvgd_spectrum_closed_form(const MatX<Scalar>& A, const MatX<Scalar>& Q, Scalar alpha)
{
    std::vector<std::complex<Scalar>> out;
    const Scalar eps = std::numeric_limits<Scalar>::epsilon();
    for (Scalar mu : mode_frequencies(A, Q)) {
        Scalar disc = alpha * alpha - Scalar(4) * mu;
        if (std::abs(disc) <= Scalar(16) * eps * std::max(alpha * alpha, Scalar(4) * mu))
            disc = Scalar(0);
        const std::complex<Scalar> root = std::sqrt(std::complex<Scalar>(disc, Scalar(0)));
        out.push_back(Scalar(0.5) * (alpha - root));
        out.push_back(Scalar(0.5) * (alpha + root));
    }
    return out;
}

template <typename Scalar> Scalar asvgd_abscissa(const MatX<Scalar>& A, const MatX<Scalar>& Q, Scalar alpha)
{
    Scalar m = std::numeric_limits<Scalar>::infinity();
    for (const auto& l : asvgd_spectrum_closed_form(A, Q, alpha))
        m = std::min(m, l.real());
    return m;
}

/// Closed-form spectrum, checked against an eigensolve of the assembled matrix in long double
/// (critical damping produces Jordan blocks, which double precision resolves only to ~1e-8).
template <typename Scalar>
SpectralReport<Scalar> asvgd_linearized_spectrum(const MatX<Scalar>& A, const MatX<Scalar>& Q, Scalar alpha,
                                                 Scalar tol = Scalar(1e-8))
{
    auto closed = asvgd_spectrum_closed_form(A, Q, alpha);
    using LD = long double;
    const MatX<LD> B = asvgd_linearized_matrix<LD>(A.template cast<LD>(), Q.template cast<LD>(), LD(alpha));
    const auto numeric = eigenvalues<LD>(B);
    std::vector<std::complex<LD>> closed_ld;
    for (const auto& l : closed)
        closed_ld.emplace_back(LD(l.real()), LD(l.imag()));
    const Scalar err = Scalar(match_spectra<LD>(closed_ld, numeric));
    if (!(err <= tol))
        throw NumericalError(detail::concat("asvgd_linearized_spectrum: closed form and eigensolver differ by ",
                                            static_cast<double>(err)));
    auto rep = make_report<Scalar>(std::move(closed));
    rep.verification_error = err;
    return rep;
}

template <typename Scalar> Scalar optimal_damping(const MatX<Scalar>& A)
{
    require_spd(A, "A");
    return std::sqrt(Scalar(8) * lambda_min<Scalar>(A));
}

template <typename Scalar> struct AsvgdRates {
    Scalar kappa_Q;
    Scalar kappa_tilde;
    Scalar rho;
    Scalar h_star;
    Scalar alpha_star;
    Scalar mu_max;
    // (sqrt(kappa) - 1) / (sqrt(kappa) + 1), the heavy-ball reference rate
    Scalar reference_rate;
};

/// Rates for A = theta I at alpha* = sqrt(8 theta).
template <typename Scalar> AsvgdRates<Scalar> asvgd_rates(const MatX<Scalar>& Q, Scalar theta)
{
    require_spd(Q, "Q");
    require(theta > Scalar(0), "asvgd_rates: theta must be positive");
    AsvgdRates<Scalar> r;
    r.kappa_Q = lambda_max<Scalar>(Q) / lambda_min<Scalar>(Q);
    r.kappa_tilde = std::sqrt(Scalar(0.5) * (r.kappa_Q + Scalar(1) / r.kappa_Q));
    r.rho = (r.kappa_tilde - Scalar(1)) / (r.kappa_tilde + Scalar(1));
    r.mu_max = theta * (r.kappa_Q + Scalar(1) / r.kappa_Q);
    r.h_star = Scalar(2) / (std::sqrt(r.mu_max) + std::sqrt(Scalar(2) * theta));
    r.alpha_star = std::sqrt(Scalar(8) * theta);
    const Scalar sk = std::sqrt(r.kappa_Q);
    r.reference_rate = (sk - Scalar(1)) / (sk + Scalar(1));
    const Scalar slack = Scalar(1e-12);
    if (r.kappa_Q > Scalar(1) + slack && !(r.rho < r.reference_rate))
        throw NumericalError("asvgd_rates: rho is not below the heavy-ball rate");
    return r;
}

template <typename Scalar> struct EulerContraction {
    Scalar measured;
    // max |1 - h lambda| over the spectrum of B
    Scalar predicted;
    bool stable;
};

/// Iterates x <- (I - hB) x from random unit vectors and fits the asymptotic per-step rate
/// from the second half of the run (renormalizing to avoid underflow).
template <typename Scalar>
EulerContraction<Scalar> euler_contraction_check(const MatX<Scalar>& B, Scalar h, Index k, std::uint64_t seed = 7,
                                                 int trials = 3)
{
    require(B.rows() == B.cols(), "euler_contraction_check: B must be square");
    require(h > Scalar(0) && k >= 2, "euler_contraction_check: need h > 0 and k >= 2");
    const Index n = B.rows();
    const MatX<Scalar> M = MatX<Scalar>::Identity(n, n) - h * B;
    Scalar predicted = Scalar(0);
    for (const auto& l : eigenvalues<Scalar>(B))
        predicted = std::max(predicted, std::abs(Scalar(1) - h * l));

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Scalar measured = Scalar(0);
    const Index half = k / 2;
    for (int t = 0; t < trials; ++t) {
        VecX<Scalar> x(n);
        for (Index i = 0; i < n; ++i)
            x(i) = Scalar(normal(rng));
        x.normalize();
        Scalar log_norm = Scalar(0);
        Scalar log_at_half = Scalar(0);
        bool vanished = false;
        for (Index s = 1; s <= k; ++s) {
            x = M * x;
            const Scalar nx = x.norm();
            if (!(nx > Scalar(0))) {
                vanished = true;
                break;
            }
            log_norm += std::log(nx);
            x /= nx;
            if (s == half)
                log_at_half = log_norm;
        }
        const Scalar rate = vanished ? Scalar(0) : std::exp((log_norm - log_at_half) / Scalar(k - half));
        measured = std::max(measured, rate);
    }
    return {measured, predicted, predicted < Scalar(1)};
}

} // namespace steinflow
