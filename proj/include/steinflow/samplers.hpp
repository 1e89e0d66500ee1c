#pragma once

#include "kernels.hpp"
#include "targets.hpp"

#include <cmath>
#include <cstdint>
#include <algorithm>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace steinflow {

/// Particle state. Y holds the particle momenta dX/dt, V the density-space momenta
/// (row i approximates grad Phi at X_i).
template <typename Scalar = double> struct ParticleEnsemble {
    MatX<Scalar> X;
    MatX<Scalar> Y;
    MatX<Scalar> V;
    std::vector<long> restart_count;
    VecX<Scalar> prev_step_norms;
    bool has_history = false;
    Index iteration = 0;

    static ParticleEnsemble initialize(const MatX<Scalar>& X0)
    {
        require(X0.rows() >= 1 && X0.cols() >= 1, "ensemble: need at least one particle of positive dimension");
        require(X0.allFinite(), "ensemble: initial positions must be finite");
        ParticleEnsemble e;
        e.X = X0;
        e.Y = MatX<Scalar>::Zero(X0.rows(), X0.cols());
        e.V = MatX<Scalar>::Zero(X0.rows(), X0.cols());
        e.restart_count.assign(static_cast<std::size_t>(X0.rows()), 1);
        e.prev_step_norms = VecX<Scalar>::Zero(X0.rows());
        return e;
    }

    Index size() const { return X.rows(); }
    Index dim() const { return X.cols(); }

    void validate() const
    {
        const Index n = X.rows(), d = X.cols();
        require(Y.rows() == n && Y.cols() == d && V.rows() == n && V.cols() == d,
                "ensemble: X, Y, V must share N and d");
        require(static_cast<Index>(restart_count.size()) == n && prev_step_norms.size() == n,
                "ensemble: per-particle arrays must have length N");
        for (long c : restart_count)
            require(c >= 1, "ensemble: restart counts must be >= 1");
    }
};

template <typename Scalar = double> struct DampingSchedule {
    enum class Kind { RestartNesterov, Constant };

    Kind kind = Kind::RestartNesterov;
    bool use_speed = true;
    bool use_gradient = true;
    Scalar beta = Scalar(0);
    // alpha = (c - 1) / (c - 1 + r); r = 3 gives (k - 1) / (k + 2)
    Scalar r = Scalar(3);

    static DampingSchedule restart(bool speed, bool gradient, Scalar offset = Scalar(3))
    {
        require(offset > Scalar(0), "damping offset r must be positive");
        DampingSchedule s;
        s.kind = Kind::RestartNesterov;
        s.use_speed = speed;
        s.use_gradient = gradient;
        s.r = offset;
        return s;
    }

    static DampingSchedule constant(Scalar beta)
    {
        require(beta > Scalar(0) && beta < Scalar(1), "constant damping beta must lie in (0,1)");
        DampingSchedule s;
        s.kind = Kind::Constant;
        s.beta = beta;
        s.use_speed = false;
        s.use_gradient = false;
        return s;
    }

    Scalar nesterov(long count) const
    {
        const Scalar c = Scalar(count - 1);
        return c / (c + r);
    }
};

enum class SamplerKind { ASVGD, SVGD, ULA, MALA, ULD };

inline SamplerKind parse_sampler_kind(const std::string& name)
{
    if (name == "asvgd")
        return SamplerKind::ASVGD;
    if (name == "svgd")
        return SamplerKind::SVGD;
    if (name == "ula")
        return SamplerKind::ULA;
    if (name == "mala")
        return SamplerKind::MALA;
    if (name == "uld")
        return SamplerKind::ULD;
    throw ContractError("unknown sampler '" + name + "'; valid names: asvgd, svgd, ula, mala, uld");
}

inline std::string to_string(SamplerKind kind)
{
    switch (kind) {
    case SamplerKind::ASVGD:
        return "asvgd";
    case SamplerKind::SVGD:
        return "svgd";
    case SamplerKind::ULA:
        return "ula";
    case SamplerKind::MALA:
        return "mala";
    case SamplerKind::ULD:
        return "uld";
    }
    return "?";
}

template <typename Scalar = double> struct SamplerConfig {
    KernelSpec<Scalar> kernel;
    TargetSpec<Scalar> target;
    Scalar tau = Scalar(0.1);
    Scalar eps = Scalar(0.1);
    DampingSchedule<Scalar> damping{};
    std::uint64_t seed = 0;
    Index n_steps = 1000;
    // Gaussian SVGD with 1/sigma^2 on the gradient term instead of the repulsion term.
    bool alg2_literal = false;
    // Literal gradient restart: no 1/sigma^2 on the repulsion term and a reset
    // when the statistic is negative. The default resets when it is positive (energy rising).
    bool restart_literal = false;

    SamplerConfig(KernelSpec<Scalar> k, TargetSpec<Scalar> t) : kernel(std::move(k)), target(std::move(t)) {}

    void validate() const
    {
        require(std::isfinite(static_cast<double>(tau)) && tau > Scalar(0), "tau must be positive");
        require(std::isfinite(static_cast<double>(eps)) && eps >= Scalar(0), "eps must be nonnegative");
        require(n_steps >= 0, "n_steps must be nonnegative");
        if (kernel.is_bilinear())
            require(kernel.dim() == target.dim(), "bilinear kernel dimension does not match the target");
    }
};

/// Knobs for oracle tests; production runs use the defaults.
template <typename Scalar = double> struct StepOptions {
    // false: positions and momenta advance with tau instead of sqrt(tau)
    bool sqrt_tau = true;
    // false: drop the V-dependent interaction terms from the momentum update
    bool interaction = true;
    // replaces every alpha_i when set (allows beta = 0)
    std::optional<Scalar> damping_override;
};

namespace detail {

template <typename Scalar> void check_finite(const MatX<Scalar>& M, const char* what, Index iteration)
{
    if (!M.allFinite())
        throw NumericalError(concat(what, ": non-finite value at iteration ", iteration));
}

template <typename Scalar> void check_ensemble(const ParticleEnsemble<Scalar>& ens, const SamplerConfig<Scalar>& cfg)
{
    ens.validate();
    cfg.validate();
    require(ens.dim() == cfg.target.dim(), concat("particle dimension ", ens.dim(), " does not match target dimension ",
                                                  cfg.target.dim()));
}

} // namespace detail

/// (1/N^2) sum_ij <V_j, K_ij grad f(x_i) - grad_2 K(x_j, x_i)>, the particle estimate of dE/dt
/// along the velocity field (1/N) K V. `literal` drops the 1/sigma^2 on the Gaussian repulsion
/// part, which then matches the double sum only when sigma^2 = 1.
template <typename Scalar>
Scalar gradient_restart_stat(const MatX<Scalar>& X, const MatX<Scalar>& V, const MatX<Scalar>& K,
                             const MatX<Scalar>& gradF, const KernelSpec<Scalar>& kernel, bool literal = false)
{
    const Index n = X.rows();
    require(V.rows() == n && K.rows() == n && K.cols() == n && gradF.rows() == n,
            "gradient_restart_stat: shape mismatch");
    const Scalar nn = Scalar(n) * Scalar(n);
    if (kernel.is_gaussian()) {
        const Scalar inv = literal ? Scalar(1) : Scalar(1) / kernel.bandwidth();
        const VecX<Scalar> k1 = K.rowwise().sum();
        const MatX<Scalar> M = K * gradF + inv * (K * X - k1.asDiagonal() * X);
        return (V.array() * M.array()).sum() / nn;
    }
    const MatX<Scalar> M = K * gradF - Scalar(n) * X * kernel.matrix();
    return (V.array() * M.array()).sum() / nn;
}

template <typename Scalar>
Scalar gradient_restart_stat(const ParticleEnsemble<Scalar>& ens, const KernelSpec<Scalar>& kernel,
                             const TargetSpec<Scalar>& target, bool literal = false)
{
    const MatX<Scalar> K = kernel_matrix(kernel, ens.X);
    return gradient_restart_stat<Scalar>(ens.X, ens.V, K, target.grad_rows(ens.X), kernel, literal);
}

template <typename Scalar = double> struct StepDiagnostics {
    Scalar grad_restart_stat = std::numeric_limits<Scalar>::quiet_NaN();
    Scalar mean_speed = Scalar(0);
    Scalar acceptance_rate = std::numeric_limits<Scalar>::quiet_NaN();
    bool gradient_restart = false;
};

namespace detail {

/// Gaussian-kernel momentum forces: -(1/N) K G + (1/(N^2 sigma^2)) (diag(W 1) - W) X with
/// W = N K + K((V V^T) o K) - K o (K V V^T), evaluated column by column in O(N^2 d^2).
template <typename Scalar>
MatX<Scalar> gaussian_forces(const MatX<Scalar>& X, const MatX<Scalar>& V, const MatX<Scalar>& K,
                             const MatX<Scalar>& G, Scalar sigma2, bool interaction)
{
    const Index n = X.rows(), d = X.cols();
    const Scalar N = Scalar(n);
    VecX<Scalar> w1 = N * K.rowwise().sum();
    MatX<Scalar> WX = N * (K * X);
    if (interaction) {
        const MatX<Scalar> KV = K * V;
        VecX<Scalar> c = (V.array() * KV.array()).rowwise().sum().matrix();
        MatX<Scalar> inner = MatX<Scalar>::Zero(n, d);
        MatX<Scalar> outer = MatX<Scalar>::Zero(n, d);
        for (Index k = 0; k < d; ++k) {
            const MatX<Scalar> T = K * (V.col(k).asDiagonal() * X);
            inner.noalias() += V.col(k).asDiagonal() * T;
            outer.noalias() += KV.col(k).asDiagonal() * T;
        }
        w1 += K * c - KV.array().square().rowwise().sum().matrix();
        WX += K * inner - outer;
    }
    const MatX<Scalar> L = w1.asDiagonal() * X - WX;
    return -(K * G) / N + L / (N * N * sigma2);
}

/// Bilinear-kernel momentum forces -(1/N) K G + (1 + tr(V^T K V)/N^2) X A, using K = U U^T.
template <typename Scalar>
MatX<Scalar> bilinear_forces(const MatX<Scalar>& X, const MatX<Scalar>& V, const MatX<Scalar>& U,
                             const MatX<Scalar>& G, const MatX<Scalar>& A, bool interaction)
{
    const Scalar N = Scalar(X.rows());
    const MatX<Scalar> KG = U * (U.transpose() * G);
    Scalar coupling = Scalar(1);
    if (interaction)
        coupling += (U.transpose() * V).squaredNorm() / (N * N);
    return -KG / N + coupling * (X * A);
}

} // namespace detail

/// One ASVGD iteration: position update, V solve, per-particle damping with restarts,
/// kernel-specific momentum update.
template <typename Scalar>
ParticleEnsemble<Scalar> asvgd_step(const ParticleEnsemble<Scalar>& ens, const SamplerConfig<Scalar>& cfg,
                                    const StepOptions<Scalar>& opt = {}, StepDiagnostics<Scalar>* diag = nullptr)
{
    detail::check_ensemble(ens, cfg);
    const Index n = ens.size();
    const Scalar h = opt.sqrt_tau ? std::sqrt(cfg.tau) : cfg.tau;
    ParticleEnsemble<Scalar> out = ens;
    out.iteration = ens.iteration + 1;

    // (1)
    const MatX<Scalar> dX = h * ens.Y;
    out.X = ens.X + dX;
    const VecX<Scalar> step_norms = dX.rowwise().norm();

    // (2)
    const MatX<Scalar> G = cfg.target.grad_rows(out.X);
    MatX<Scalar> K;
    MatX<Scalar> U;
    if (cfg.kernel.is_bilinear() && cfg.eps > Scalar(0)) {
        U = bilinear_factor(cfg.kernel, out.X);
        out.V = Scalar(n) * woodbury_inverse_apply(U, cfg.eps, ens.Y);
    } else {
        K = kernel_matrix(cfg.kernel, out.X);
        out.V = Scalar(n) * dense_inverse_apply(K, cfg.eps, ens.Y);
        if (cfg.kernel.is_bilinear())
            U = bilinear_factor(cfg.kernel, out.X);
    }
    detail::check_finite(out.V, "asvgd_step V", out.iteration);

    // (3)
    VecX<Scalar> alpha(n);
    bool grad_reset = false;
    Scalar stat = std::numeric_limits<Scalar>::quiet_NaN();
    if (cfg.damping.kind == DampingSchedule<Scalar>::Kind::Constant) {
        alpha.setConstant(cfg.damping.beta);
    } else {
        for (Index i = 0; i < n; ++i) {
            auto& c = out.restart_count[static_cast<std::size_t>(i)];
            if (cfg.damping.use_speed && ens.has_history && step_norms(i) < ens.prev_step_norms(i))
                c = 1;
            else
                ++c;
        }
        if (cfg.kernel.is_gaussian() && cfg.damping.use_gradient) {
            stat = gradient_restart_stat<Scalar>(out.X, out.V, K, G, cfg.kernel, cfg.restart_literal);
            // the statistic estimates dE/dt; momentum is dropped when the energy increases
            if (cfg.restart_literal ? stat < Scalar(0) : stat > Scalar(0)) {
                grad_reset = true;
                std::fill(out.restart_count.begin(), out.restart_count.end(), 1L);
            }
        }
        for (Index i = 0; i < n; ++i)
            alpha(i) = cfg.damping.nesterov(out.restart_count[static_cast<std::size_t>(i)]);
    }
    if (opt.damping_override)
        alpha.setConstant(*opt.damping_override);
    out.prev_step_norms = step_norms;
    out.has_history = true;

    // (4)
    const MatX<Scalar> forces =
        cfg.kernel.is_gaussian()
            ? detail::gaussian_forces<Scalar>(out.X, out.V, K, G, cfg.kernel.bandwidth(), opt.interaction)
            : detail::bilinear_forces<Scalar>(out.X, out.V, U, G, cfg.kernel.matrix(), opt.interaction);
    out.Y = alpha.asDiagonal() * ens.Y + h * forces;
    detail::check_finite(out.Y, "asvgd_step Y", out.iteration);
    detail::check_finite(out.X, "asvgd_step X", out.iteration);

    if (diag) {
        diag->grad_restart_stat = stat;
        diag->gradient_restart = grad_reset;
        diag->mean_speed = step_norms.mean();
    }
    return out;
}

/// SVGD direction for the Gaussian kernel, (1/N)[(1/sigma^2)(diag(K1) - K) X - K grad f].
template <typename Scalar>
MatX<Scalar> svgd_direction_gaussian(const MatX<Scalar>& X, const KernelSpec<Scalar>& kernel,
                                     const TargetSpec<Scalar>& target, bool alg2_literal = false)
{
    require(kernel.is_gaussian(), "svgd_direction_gaussian: Gaussian kernel required");
    const MatX<Scalar> K = kernel_matrix(kernel, X);
    const MatX<Scalar> G = target.grad_rows(X);
    const VecX<Scalar> k1 = K.rowwise().sum();
    const MatX<Scalar> L = k1.asDiagonal() * X - K * X;
    const Scalar N = Scalar(X.rows());
    const Scalar s2 = kernel.bandwidth();
    if (alg2_literal)
        return (L - (K * G) / s2) / N;
    return (L / s2 - K * G) / N;
}

/// SVGD direction for the bilinear kernel, (1/N)(N X A - K grad f).
template <typename Scalar>
MatX<Scalar> svgd_direction_bilinear(const MatX<Scalar>& X, const KernelSpec<Scalar>& kernel,
                                     const TargetSpec<Scalar>& target)
{
    require(kernel.is_bilinear(), "svgd_direction_bilinear: bilinear kernel required");
    const MatX<Scalar> U = bilinear_factor(kernel, X);
    const MatX<Scalar> G = target.grad_rows(X);
    const Scalar N = Scalar(X.rows());
    return (N * X * kernel.matrix() - U * (U.transpose() * G)) / N;
}

template <typename Scalar>
ParticleEnsemble<Scalar> svgd_step_gaussian(const ParticleEnsemble<Scalar>& ens, const SamplerConfig<Scalar>& cfg,
                                            StepDiagnostics<Scalar>* diag = nullptr)
{
    detail::check_ensemble(ens, cfg);
    ParticleEnsemble<Scalar> out = ens;
    out.iteration = ens.iteration + 1;
    const MatX<Scalar> dX = cfg.tau * svgd_direction_gaussian(ens.X, cfg.kernel, cfg.target, cfg.alg2_literal);
    out.X = ens.X + dX;
    out.Y = dX / cfg.tau;
    detail::check_finite(out.X, "svgd_step_gaussian", out.iteration);
    if (diag)
        diag->mean_speed = dX.rowwise().norm().mean();
    return out;
}

template <typename Scalar>
ParticleEnsemble<Scalar> svgd_step_bilinear(const ParticleEnsemble<Scalar>& ens, const SamplerConfig<Scalar>& cfg,
                                            StepDiagnostics<Scalar>* diag = nullptr)
{
    detail::check_ensemble(ens, cfg);
    ParticleEnsemble<Scalar> out = ens;
    out.iteration = ens.iteration + 1;
    const MatX<Scalar> dX = cfg.tau * svgd_direction_bilinear(ens.X, cfg.kernel, cfg.target);
    out.X = ens.X + dX;
    out.Y = dX / cfg.tau;
    detail::check_finite(out.X, "svgd_step_bilinear", out.iteration);
    if (diag)
        diag->mean_speed = dX.rowwise().norm().mean();
    return out;
}

template <typename Scalar, typename Rng> MatX<Scalar> standard_normal(Index rows, Index cols, Rng& rng)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    MatX<Scalar> Z(rows, cols);
    // row-major fill so that the draw order follows particles
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j)
            Z(i, j) = Scalar(normal(rng));
    return Z;
}

/// N i.i.d. rows from N(mu, Sigma).
template <typename Scalar, typename Rng>
MatX<Scalar> sample_gaussian(Index n, const VecX<Scalar>& mu, const MatX<Scalar>& Sigma, Rng& rng)
{
    require(Sigma.rows() == mu.size() && Sigma.cols() == mu.size(), "sample_gaussian: shape mismatch");
    require_spd(Sigma, "initial covariance");
    const Eigen::LLT<MatX<Scalar>> llt(sym(Sigma));
    const MatX<Scalar> L = llt.matrixL();
    MatX<Scalar> Z = standard_normal<Scalar>(n, mu.size(), rng);
    return (Z * L.transpose()).rowwise() + mu.transpose();
}

template <typename Scalar, typename Rng>
MatX<Scalar> ula_step(const MatX<Scalar>& X, const SamplerConfig<Scalar>& cfg, Rng& rng)
{
    const MatX<Scalar> xi = standard_normal<Scalar>(X.rows(), X.cols(), rng);
    return X - cfg.tau * cfg.target.grad_rows(X) + std::sqrt(Scalar(2) * cfg.tau) * xi;
}

template <typename Scalar> struct MalaResult {
    MatX<Scalar> X;
    std::vector<bool> accepted;

    Scalar acceptance_rate() const
    {
        if (accepted.empty())
            return Scalar(0);
        return Scalar(std::count(accepted.begin(), accepted.end(), true)) / Scalar(accepted.size());
    }
};

template <typename Scalar, typename Rng>
MalaResult<Scalar> mala_step(const MatX<Scalar>& X, const SamplerConfig<Scalar>& cfg, Rng& rng)
{
    const Scalar tau = cfg.tau;
    const MatX<Scalar> xi = standard_normal<Scalar>(X.rows(), X.cols(), rng);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    MalaResult<Scalar> res{X, std::vector<bool>(static_cast<std::size_t>(X.rows()), false)};
    for (Index i = 0; i < X.rows(); ++i) {
        const VecX<Scalar> x = X.row(i).transpose();
        const VecX<Scalar> gx = cfg.target.grad_potential(x);
        const VecX<Scalar> y = x - tau * gx + std::sqrt(Scalar(2) * tau) * xi.row(i).transpose();
        const VecX<Scalar> gy = cfg.target.grad_potential(y);
        const Scalar log_fwd = -(y - x + tau * gx).squaredNorm() / (Scalar(4) * tau);
        const Scalar log_bwd = -(x - y + tau * gy).squaredNorm() / (Scalar(4) * tau);
        const Scalar log_ratio = -cfg.target.potential(y) + cfg.target.potential(x) + log_bwd - log_fwd;
        const double u = unif(rng);
        if (std::isfinite(static_cast<double>(log_ratio)) && std::log(u) < static_cast<double>(log_ratio)) {
            res.X.row(i) = y.transpose();
            res.accepted[static_cast<std::size_t>(i)] = true;
        }
    }
    return res;
}

/// Euler-Maruyama for underdamped Langevin with unit mass and friction.
template <typename Scalar, typename Rng>
std::pair<MatX<Scalar>, MatX<Scalar>> uld_step(const MatX<Scalar>& X, const MatX<Scalar>& P,
                                               const SamplerConfig<Scalar>& cfg, Rng& rng)
{
    require(P.rows() == X.rows() && P.cols() == X.cols(), "uld_step: momentum shape must match positions");
    const MatX<Scalar> xi = standard_normal<Scalar>(X.rows(), X.cols(), rng);
    MatX<Scalar> Pn = P - cfg.tau * (cfg.target.grad_rows(X) + P) + std::sqrt(Scalar(2) * cfg.tau) * xi;
    MatX<Scalar> Xn = X + cfg.tau * Pn;
    return {std::move(Xn), std::move(Pn)};
}

template <typename Scalar = double> struct Trajectory {
    std::vector<Index> iterations;
    std::vector<MatX<Scalar>> states;
};

template <typename Scalar = double>
using Recorder = std::function<void(Index, const MatX<Scalar>&, const StepDiagnostics<Scalar>&)>;

/// Iterates the chosen sampler from initial_X. The recorder sees iteration 0 and every step;
/// states are stored every `keep_every` iterations (and at the end). Noise comes from a single
/// mt19937_64 stream seeded with cfg.seed.
template <typename Scalar>
Trajectory<Scalar> run(const SamplerConfig<Scalar>& cfg, SamplerKind kind, const MatX<Scalar>& initial_X,
                       Index n_steps, const Recorder<Scalar>& recorder = {}, Index keep_every = 1)
{
    cfg.validate();
    require(n_steps >= 0, "run: n_steps must be nonnegative");
    require(keep_every >= 1, "run: keep_every must be positive");
    require(initial_X.cols() == cfg.target.dim(), "run: initial particles do not match the target dimension");
    if (kind == SamplerKind::SVGD || kind == SamplerKind::ASVGD)
        require(initial_X.rows() >= 1, "run: need at least one particle");

    std::mt19937_64 rng(cfg.seed);
    auto ens = ParticleEnsemble<Scalar>::initialize(initial_X);
    MatX<Scalar> P = MatX<Scalar>::Zero(initial_X.rows(), initial_X.cols());

    Trajectory<Scalar> traj;
    traj.iterations.push_back(0);
    traj.states.push_back(ens.X);
    if (recorder)
        recorder(0, ens.X, StepDiagnostics<Scalar>{});

    for (Index k = 1; k <= n_steps; ++k) {
        StepDiagnostics<Scalar> d;
        try {
            switch (kind) {
            case SamplerKind::ASVGD:
                ens = asvgd_step(ens, cfg, StepOptions<Scalar>{}, &d);
                break;
            case SamplerKind::SVGD:
                ens = cfg.kernel.is_gaussian() ? svgd_step_gaussian(ens, cfg, &d) : svgd_step_bilinear(ens, cfg, &d);
                break;
            case SamplerKind::ULA: {
                MatX<Scalar> Xn = ula_step(ens.X, cfg, rng);
                d.mean_speed = (Xn - ens.X).rowwise().norm().mean();
                ens.X = std::move(Xn);
                break;
            }
            case SamplerKind::MALA: {
                auto res = mala_step(ens.X, cfg, rng);
                d.mean_speed = (res.X - ens.X).rowwise().norm().mean();
                d.acceptance_rate = res.acceptance_rate();
                ens.X = std::move(res.X);
                break;
            }
            case SamplerKind::ULD: {
                auto [Xn, Pn] = uld_step(ens.X, P, cfg, rng);
                d.mean_speed = (Xn - ens.X).rowwise().norm().mean();
                ens.X = std::move(Xn);
                P = std::move(Pn);
                break;
            }
            }
            detail::check_finite(ens.X, to_string(kind).c_str(), k);
        } catch (const NumericalError& e) {
            const std::string msg = e.what();
            if (msg.find("iteration") != std::string::npos)
                throw;
            throw NumericalError(detail::concat(msg, " (iteration ", k, ")"));
        }
        if (recorder)
            recorder(k, ens.X, d);
        if (k % keep_every == 0 || k == n_steps) {
            traj.iterations.push_back(k);
            traj.states.push_back(ens.X);
        }
    }
    return traj;
}

} // namespace steinflow
