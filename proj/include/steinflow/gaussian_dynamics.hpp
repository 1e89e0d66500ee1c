#pragma once

#include "linalg.hpp"

#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <ostream>
#include <utility>
#include <vector>

namespace steinflow {

template <typename Scalar = double> struct GaussianState {
    VecX<Scalar> mu;
    MatX<Scalar> Sigma;

    Index dim() const { return mu.size(); }
};

/// (mu, Sigma) with cotangent coordinates (nu, S).
template <typename Scalar = double> struct AcceleratedGaussianState {
    VecX<Scalar> mu;
    MatX<Scalar> Sigma;
    VecX<Scalar> nu;
    MatX<Scalar> S;

    Index dim() const { return mu.size(); }

    /// Cold start nu = 0, S = 0.
    static AcceleratedGaussianState at_rest(const VecX<Scalar>& mu, const MatX<Scalar>& Sigma)
    {
        const Index d = mu.size();
        return {mu, Sigma, VecX<Scalar>::Zero(d), MatX<Scalar>::Zero(d, d)};
    }

    GaussianState<Scalar> position() const { return {mu, Sigma}; }
};

namespace detail {

template <typename Scalar> void check_problem(const MatX<Scalar>& A, const VecX<Scalar>& b, const MatX<Scalar>& Q)
{
    require(A.rows() == A.cols() && Q.rows() == Q.cols() && A.rows() == Q.rows() && b.size() == Q.rows(),
            "Gaussian dynamics: A, b, Q dimensions differ");
}

template <typename Scalar> void check_state_dim(Index d, const VecX<Scalar>& mu, const MatX<Scalar>& Sigma)
{
    require(mu.size() == d && Sigma.rows() == d && Sigma.cols() == d, "Gaussian state: dimension mismatch");
}

template <typename Scalar> Scalar kernel_value(const MatX<Scalar>& A, const VecX<Scalar>& x)
{
    return x.dot(A * x) + Scalar(1);
}

} // namespace detail

/// Stein gradient flow of KL restricted to N(mu, Sigma) for the bilinear kernel.
template <typename Scalar>
GaussianState<Scalar> svgd_gaussian_rhs(const GaussianState<Scalar>& s, const MatX<Scalar>& A, const VecX<Scalar>& b,
                                        const MatX<Scalar>& Q)
{
    detail::check_problem(A, b, Q);
    detail::check_state_dim(b.size(), s.mu, s.Sigma);
    const Index d = b.size();
    const MatX<Scalar> Qi = spd_inverse<Scalar>(Q);
    const MatX<Scalar> I = MatX<Scalar>::Identity(d, d);
    const VecX<Scalar> r = s.mu - b;
    GaussianState<Scalar> out;
    out.mu = (I - Qi * s.Sigma) * A * s.mu - detail::kernel_value(A, s.mu) * (Qi * r);
    const MatX<Scalar> SA = s.Sigma * A;
    const MatX<Scalar> inner = SA * (s.Sigma + s.mu * r.transpose()) * Qi;
    out.Sigma = Scalar(2) * sym(SA) - Scalar(2) * sym(inner);
    return out;
}

/// Wasserstein gradient flow of KL for centered Gaussians: dSigma = 2 I - 2 Sym(Sigma Q^{-1}).
template <typename Scalar> MatX<Scalar> wasserstein_centered_rhs(const MatX<Scalar>& Sigma, const MatX<Scalar>& Q)
{
    const MatX<Scalar> I = MatX<Scalar>::Identity(Sigma.rows(), Sigma.cols());
    return Scalar(2) * I - Scalar(2) * sym(MatX<Scalar>(Sigma * spd_inverse<Scalar>(Q)));
}

/// Inverse Gaussian-Stein metric applied to a cotangent (nu, S).
template <typename Scalar>
GaussianState<Scalar> stein_gaussian_metric_inverse(const GaussianState<Scalar>& theta, const VecX<Scalar>& nu,
                                                    const MatX<Scalar>& S, const MatX<Scalar>& A)
{
    const Index d = theta.dim();
    detail::check_state_dim(d, theta.mu, theta.Sigma);
    require(nu.size() == d && S.rows() == d && S.cols() == d && A.rows() == d && A.cols() == d,
            "metric inverse: dimension mismatch");
    const MatX<Scalar> SA = theta.Sigma * A;
    GaussianState<Scalar> out;
    out.mu = Scalar(2) * S * SA * theta.mu + detail::kernel_value(A, theta.mu) * nu;
    out.Sigma = Scalar(2) * sym(MatX<Scalar>(SA * (Scalar(2) * theta.Sigma * S + theta.mu * nu.transpose())));
    return out;
}

/// Euclidean gradient of KL(N(mu, Sigma) | N(b, Q)) in (mu, Sigma).
template <typename Scalar>
std::pair<VecX<Scalar>, MatX<Scalar>> kl_gradient(const GaussianState<Scalar>& theta, const VecX<Scalar>& b,
                                                  const MatX<Scalar>& Q)
{
    const MatX<Scalar> Qi = spd_inverse<Scalar>(Q);
    return {Qi * (theta.mu - b), Scalar(0.5) * (Qi - spd_inverse<Scalar>(theta.Sigma))};
}

template <typename Scalar>
Scalar kl_gaussians(const VecX<Scalar>& mu, const MatX<Scalar>& Sigma, const VecX<Scalar>& nu, const MatX<Scalar>& Q)
{
    const Index d = mu.size();
    require(nu.size() == d && Sigma.rows() == d && Q.rows() == d, "kl_gaussians: dimension mismatch");
    Eigen::LLT<MatX<Scalar>> lq(sym(Q));
    Eigen::LLT<MatX<Scalar>> ls(sym(Sigma));
    if (lq.info() != Eigen::Success || !is_symmetric(Q, 1e-10))
        throw ContractError("kl_gaussians: Q must be symmetric positive definite");
    if (ls.info() != Eigen::Success || !is_symmetric(Sigma, 1e-10))
        throw ContractError("kl_gaussians: Sigma must be symmetric positive definite");
    const VecX<Scalar> r = nu - mu;
    const Scalar trace = lq.solve(Sigma).trace();
    const Scalar quad = r.dot(lq.solve(r));
    const MatX<Scalar> Lq = lq.matrixL();
    const MatX<Scalar> Ls = ls.matrixL();
    const Scalar logdet = Scalar(2) * (Lq.diagonal().array().log().sum() - Ls.diagonal().array().log().sum());
    return Scalar(0.5) * (trace - Scalar(d) + quad + logdet);
}

/// Damped Hamiltonian flow on the Gaussian family. The Sigma and S lines are symmetrized:
/// the unsymmetrized forms carry the non-symmetric terms nu mu^T A Sigma and 2 S nu mu^T A.
template <typename Scalar>
AcceleratedGaussianState<Scalar> asvgd_gaussian_rhs(const AcceleratedGaussianState<Scalar>& s,
                                                    const MatX<Scalar>& A, const VecX<Scalar>& b,
                                                    const MatX<Scalar>& Q, Scalar alpha)
{
    detail::check_problem(A, b, Q);
    detail::check_state_dim(b.size(), s.mu, s.Sigma);
    require(s.nu.size() == b.size() && s.S.rows() == b.size() && s.S.cols() == b.size(),
            "accelerated state: dimension mismatch");
    require(alpha >= Scalar(0), "damping alpha must be nonnegative");
    const MatX<Scalar> Qi = spd_inverse<Scalar>(Q);
    const MatX<Scalar> Si = spd_inverse<Scalar>(s.Sigma);
    const MatX<Scalar> SA = s.Sigma * A;
    AcceleratedGaussianState<Scalar> out;
    out.mu = Scalar(2) * s.S * SA * s.mu + detail::kernel_value(A, s.mu) * s.nu;
    const MatX<Scalar> dSigma = s.nu * s.mu.transpose() * A * s.Sigma +
                                sym(MatX<Scalar>(SA * (Scalar(2) * s.Sigma * s.S + s.mu * s.nu.transpose()))) +
                                Scalar(2) * sym(MatX<Scalar>(SA * s.Sigma * s.S));
    out.Sigma = sym(dSigma);
    out.nu = -alpha * s.nu - Scalar(2) * A * s.Sigma * s.S * s.nu - A * s.mu * s.nu.squaredNorm() - Qi * (s.mu - b);
    const MatX<Scalar> dS = -alpha * s.S - Scalar(2) * s.S * s.nu * s.mu.transpose() * A -
                            Scalar(4) * sym(MatX<Scalar>(s.S * s.S * SA)) - Scalar(0.5) * (Qi - Si);
    out.S = sym(dS);
    return out;
}

/// H = 1/2 <(nu, S), G^{-1}(nu, S)> + KL.
template <typename Scalar>
Scalar hamiltonian(const AcceleratedGaussianState<Scalar>& s, const MatX<Scalar>& A, const VecX<Scalar>& b,
                   const MatX<Scalar>& Q)
{
    detail::check_problem(A, b, Q);
    const auto g = stein_gaussian_metric_inverse<Scalar>(s.position(), s.nu, s.S, A);
    const Scalar kinetic = Scalar(0.5) * (s.nu.dot(g.mu) + (s.S.array() * g.Sigma.array()).sum());
    return kinetic + kl_gaussians<Scalar>(s.mu, s.Sigma, b, Q);
}

/// Sigma_t = (Q^{-1} + e^{-2tA}(Sigma0^{-1} - Q^{-1}))^{-1} for pairwise commuting Sigma0, Q, A.
template <typename Scalar>
MatX<Scalar> closed_form_sigma(Scalar t, const MatX<Scalar>& Sigma0, const MatX<Scalar>& Q, const MatX<Scalar>& A)
{
    require(Sigma0.rows() == Q.rows() && A.rows() == Q.rows(), "closed_form_sigma: dimension mismatch");
    require_spd(Sigma0, "Sigma0");
    require_spd(Q, "Q");
    require(commute(Sigma0, Q) && commute(A, Q) && commute(A, Sigma0),
            "closed_form_sigma: Sigma0, Q and A must commute pairwise");
    const MatX<Scalar> Qi = spd_inverse<Scalar>(Q);
    const MatX<Scalar> E = spectral_map<Scalar>(A, [t](Scalar a) { return std::exp(-Scalar(2) * t * a); });
    const MatX<Scalar> M = Qi + E * (spd_inverse<Scalar>(Sigma0) - Qi);
    return spd_inverse<Scalar>(MatX<Scalar>(sym(M)));
}

template <typename Scalar> struct GammaRate {
    Scalar gamma;
    // 1 / (K(b,b) + 2 lmin(A) lmax(Q)), the closed-form bound
    Scalar lower_bound;
    // lmin(A) / (K(b,b) + 2 lmin(A) lmax(Q)), which does hold
    Scalar corrected_bound;
    MatX<Scalar> block;
};

/// Smallest eigenvalue of [[A kron I, (Ab) kron Q^{-1/2} / sqrt2], [., K(b,b) Q^{-1} / 2]].
template <typename Scalar>
GammaRate<Scalar> gamma_rate(const MatX<Scalar>& A, const VecX<Scalar>& b, const MatX<Scalar>& Q)
{
    detail::check_problem(A, b, Q);
    require_spd(A, "A");
    require_spd(Q, "Q");
    const Index d = b.size();
    const MatX<Scalar> I = MatX<Scalar>::Identity(d, d);
    const MatX<Scalar> Qmh = spectral_map<Scalar>(Q, [](Scalar q) { return Scalar(1) / std::sqrt(q); });
    const MatX<Scalar> Qi = spd_inverse<Scalar>(Q);
    const MatX<Scalar> Ab = A * b;
    const Scalar r2 = std::sqrt(Scalar(2));
    MatX<Scalar> B(d * d + d, d * d + d);
    B.topLeftCorner(d * d, d * d) = kron(A, I);
    B.topRightCorner(d * d, d) = kron(Ab, Qmh) / r2;
    B.bottomLeftCorner(d, d * d) = kron(MatX<Scalar>(Ab.transpose()), Qmh) / r2;
    B.bottomRightCorner(d, d) = Scalar(0.5) * detail::kernel_value(A, b) * Qi;
    GammaRate<Scalar> res;
    res.block = B;
    res.gamma = lambda_min<Scalar>(B);
    const Scalar la = lambda_min<Scalar>(A);
    const Scalar denom = detail::kernel_value(A, b) + Scalar(2) * la * lambda_max<Scalar>(Q);
    res.lower_bound = Scalar(1) / denom;
    res.corrected_bound = la / denom;
    const Scalar slack = Scalar(1e-10) * std::max(Scalar(1), std::abs(res.gamma));
    if (res.gamma < res.corrected_bound - slack)
        throw NumericalError(detail::concat("gamma_rate: gamma ", static_cast<double>(res.gamma),
                                            " below the bound ", static_cast<double>(res.corrected_bound)));
    return res;
}

/// alpha(t) schedules for the accelerated flow.
template <typename Scalar = double> using DampingFn = std::function<Scalar(Scalar)>;

template <typename Scalar> DampingFn<Scalar> constant_damping(Scalar alpha)
{
    require(alpha >= Scalar(0), "damping alpha must be nonnegative");
    return [alpha](Scalar) { return alpha; };
}

/// r / t, clamped to r / max(t, dt) near the origin.
template <typename Scalar> DampingFn<Scalar> nesterov_damping(Scalar r, Scalar dt)
{
    require(r > Scalar(0) && dt > Scalar(0), "nesterov damping: r and dt must be positive");
    return [r, dt](Scalar t) { return r / std::max(t, dt); };
}

namespace detail {

template <typename Scalar> VecX<Scalar> pack(const GaussianState<Scalar>& s)
{
    const Index d = s.dim();
    VecX<Scalar> v(d + d * d);
    v << s.mu, vec(s.Sigma);
    return v;
}

template <typename Scalar> VecX<Scalar> pack(const AcceleratedGaussianState<Scalar>& s)
{
    const Index d = s.dim();
    VecX<Scalar> v(2 * (d + d * d));
    v << s.mu, vec(s.Sigma), s.nu, vec(s.S);
    return v;
}

template <typename Scalar> void unpack(const VecX<Scalar>& v, GaussianState<Scalar>& s)
{
    const Index d = s.dim();
    s.mu = v.head(d);
    s.Sigma = sym(unvec<Scalar>(v.segment(d, d * d), d, d));
}

template <typename Scalar> void unpack(const VecX<Scalar>& v, AcceleratedGaussianState<Scalar>& s)
{
    const Index d = s.dim();
    const Index m = d + d * d;
    s.mu = v.head(d);
    s.Sigma = sym(unvec<Scalar>(v.segment(d, d * d), d, d));
    s.nu = v.segment(m, d);
    s.S = sym(unvec<Scalar>(v.segment(m + d, d * d), d, d));
}

} // namespace detail

template <typename State> struct OdeTrajectory {
    using Scalar = typename decltype(State::mu)::Scalar;
    std::vector<Scalar> t;
    std::vector<State> states;
};

/// Classical RK4 with fixed step. The step is dt adjusted to t_end / round(t_end / dt).
/// Sigma (and S) are re-symmetrized after each stage; positive definiteness of Sigma is
/// checked by Cholesky after every step.
template <typename State, typename Rhs>
OdeTrajectory<State> integrate_rk4(Rhs&& rhs, const State& state0, typename OdeTrajectory<State>::Scalar t_end,
                                   typename OdeTrajectory<State>::Scalar dt, Index record_every = 1)
{
    using Scalar = typename OdeTrajectory<State>::Scalar;
    require(dt > Scalar(0), "integrate_rk4: dt must be positive");
    require(t_end >= Scalar(0), "integrate_rk4: t_end must be nonnegative");
    require(record_every >= 1, "integrate_rk4: record_every must be positive");
    const auto steps = static_cast<Index>(std::llround(static_cast<double>(t_end / dt)));
    const Scalar h = steps > 0 ? t_end / Scalar(steps) : dt;

    State cur = state0;
    detail::unpack(detail::pack(cur), cur);
    require_spd(cur.Sigma, "initial Sigma");

    OdeTrajectory<State> traj;
    traj.t.push_back(Scalar(0));
    traj.states.push_back(cur);

    State tmp = cur;
    auto eval = [&](Scalar t, const VecX<Scalar>& y) {
        detail::unpack(y, tmp);
        return detail::pack(rhs(t, tmp));
    };
    for (Index k = 0; k < steps; ++k) {
        const Scalar t = h * Scalar(k);
        const VecX<Scalar> y = detail::pack(cur);
        const VecX<Scalar> k1 = eval(t, y);
        const VecX<Scalar> k2 = eval(t + h / 2, y + (h / 2) * k1);
        const VecX<Scalar> k3 = eval(t + h / 2, y + (h / 2) * k2);
        const VecX<Scalar> k4 = eval(t + h, y + h * k3);
        const VecX<Scalar> next = y + (h / 6) * (k1 + Scalar(2) * k2 + Scalar(2) * k3 + k4);
        const Scalar tn = h * Scalar(k + 1);
        if (!next.allFinite())
            throw NumericalError(detail::concat("integrate_rk4: non-finite state at t = ", static_cast<double>(tn)));
        detail::unpack(next, cur);
        Eigen::LLT<MatX<Scalar>> llt(cur.Sigma);
        if (llt.info() != Eigen::Success)
            throw NumericalError(
                detail::concat("integrate_rk4: Sigma lost positive definiteness at t = ", static_cast<double>(tn)));
        if ((k + 1) % record_every == 0 || k + 1 == steps) {
            traj.t.push_back(tn);
            traj.states.push_back(cur);
        }
    }
    return traj;
}

template <typename Scalar>
auto make_svgd_rhs(const MatX<Scalar>& A, const VecX<Scalar>& b, const MatX<Scalar>& Q)
{
    detail::check_problem(A, b, Q);
    return [A, b, Q](Scalar, const GaussianState<Scalar>& s) { return svgd_gaussian_rhs<Scalar>(s, A, b, Q); };
}

template <typename Scalar>
auto make_asvgd_rhs(const MatX<Scalar>& A, const VecX<Scalar>& b, const MatX<Scalar>& Q, DampingFn<Scalar> alpha)
{
    detail::check_problem(A, b, Q);
    return [A, b, Q, alpha = std::move(alpha)](Scalar t, const AcceleratedGaussianState<Scalar>& s) {
        return asvgd_gaussian_rhs<Scalar>(s, A, b, Q, alpha(t));
    };
}

/// CSV with columns t, mu..., vec(Sigma)..., nu..., vec(S)..., KL, H.
template <typename Scalar>
void write_trajectory_csv(std::ostream& os, const OdeTrajectory<AcceleratedGaussianState<Scalar>>& traj,
                          const MatX<Scalar>& A, const VecX<Scalar>& b, const MatX<Scalar>& Q)
{
    const Index d = b.size();
    os << "t";
    for (Index i = 0; i < d; ++i)
        os << ",mu" << i;
    for (Index j = 0; j < d; ++j)
        for (Index i = 0; i < d; ++i)
            os << ",Sigma" << i << j;
    for (Index i = 0; i < d; ++i)
        os << ",nu" << i;
    for (Index j = 0; j < d; ++j)
        for (Index i = 0; i < d; ++i)
            os << ",S" << i << j;
    os << ",KL,H\n";
    os << std::setprecision(17);
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
        const auto& s = traj.states[k];
        os << static_cast<double>(traj.t[k]);
        const VecX<Scalar> v = detail::pack(s);
        for (Index i = 0; i < v.size(); ++i)
            os << ',' << static_cast<double>(v(i));
        os << ',' << static_cast<double>(kl_gaussians<Scalar>(s.mu, s.Sigma, b, Q)) << ','
           << static_cast<double>(hamiltonian<Scalar>(s, A, b, Q)) << '\n';
    }
}

} // namespace steinflow
