#pragma once

#include "gaussian_dynamics.hpp"
#include "kernels.hpp"
#include "targets.hpp"

#include <cmath>
#include <cstdint>
#include <iomanip>
#include <ostream>
#include <random>
#include <string>
#include <vector>

namespace steinflow {

template <typename Scalar = double> struct Moments {
    VecX<Scalar> mean;
    MatX<Scalar> cov;
};

/// Sample mean and unbiased (N - 1) sample covariance.
template <typename Scalar> Moments<Scalar> empirical_moments(const MatX<Scalar>& X)
{
    require(X.rows() >= 2, "empirical_moments: need at least two particles for a covariance");
    Moments<Scalar> m;
    m.mean = X.colwise().mean().transpose();
    const MatX<Scalar> C = X.rowwise() - m.mean.transpose();
    m.cov = sym(MatX<Scalar>(C.transpose() * C / Scalar(X.rows() - 1)));
    return m;
}

enum class KlMethod { GaussianFit, Kde };

inline KlMethod parse_kl_method(const std::string& name)
{
    if (name == "gaussian-fit")
        return KlMethod::GaussianFit;
    if (name == "kde")
        return KlMethod::Kde;
    throw ContractError("unknown KL method '" + name + "'; valid names: gaussian-fit, kde");
}

template <typename Scalar = double> struct KlEstimate {
    Scalar value;
    // the fitted covariance needed +1e-8 I to be positive definite
    bool regularized = false;
};

namespace detail {

template <typename Scalar> Scalar log_sum_exp(const VecX<Scalar>& v)
{
    const Scalar m = v.maxCoeff();
    if (!std::isfinite(static_cast<double>(m)))
        return m;
    return m + std::log((v.array() - m).exp().sum());
}

/// log of the isotropic Gaussian KDE with variance h2 over the rows of X, at y.
template <typename Scalar> Scalar log_kde(const MatX<Scalar>& X, Scalar h2, const VecX<Scalar>& y)
{
    const Index n = X.rows(), d = X.cols();
    VecX<Scalar> e(n);
    for (Index j = 0; j < n; ++j)
        e(j) = -(X.row(j).transpose() - y).squaredNorm() / (Scalar(2) * h2);
    const Scalar lognorm = Scalar(0.5) * Scalar(d) * std::log(Scalar(2) * Scalar(M_PI) * h2) + std::log(Scalar(n));
    return log_sum_exp(e) - lognorm;
}

} // namespace detail

template <typename Scalar> KlEstimate<Scalar> kl_gaussian_fit(const MatX<Scalar>& X, const TargetSpec<Scalar>& target)
{
    require(target.is_gaussian(), "gaussian-fit KL requires a Gaussian target");
    require(X.cols() == target.dim(), "kl_estimate: dimension mismatch");
    Moments<Scalar> m = empirical_moments(X);
    KlEstimate<Scalar> out{Scalar(0), false};
    Eigen::LLT<MatX<Scalar>> llt(m.cov);
    if (llt.info() != Eigen::Success) {
        m.cov.diagonal().array() += Scalar(1e-8);
        out.regularized = true;
    }
    out.value = kl_gaussians<Scalar>(m.mean, m.cov, target.mean(), target.covariance());
    return out;
}

/// log of the normalizing constant of exp(-f). Analytic for Gaussian targets, otherwise an
/// importance-sampling estimate with the KDE as proposal.
template <typename Scalar>
Scalar log_normalizer(const TargetSpec<Scalar>& target, const MatX<Scalar>& X, Scalar h2, Index draws,
                      std::uint64_t seed)
{
    const Index d = target.dim();
    if (target.is_gaussian())
        return Scalar(0.5) * (Scalar(d) * std::log(Scalar(2) * Scalar(M_PI)) + target.log_det_covariance());
    require(draws >= 1, "log_normalizer: need at least one draw");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<Index> pick(0, X.rows() - 1);
    std::normal_distribution<double> normal(0.0, 1.0);
    const Scalar h = std::sqrt(h2);
    VecX<Scalar> logw(draws);
    VecX<Scalar> y(d);
    for (Index m = 0; m < draws; ++m) {
        const Index j = pick(rng);
        for (Index k = 0; k < d; ++k)
            y(k) = X(j, k) + h * Scalar(normal(rng));
        logw(m) = -target.potential(y) - detail::log_kde(X, h2, y);
    }
    return detail::log_sum_exp(logw) - std::log(Scalar(draws));
}

/// (1/N) sum_i [log rho_hat(X_i) - log pi(X_i)] with rho_hat a Gaussian KDE whose variance is the
/// median-heuristic bandwidth of X.
template <typename Scalar>
KlEstimate<Scalar> kl_kde(const MatX<Scalar>& X, const TargetSpec<Scalar>& target, Index is_draws = 10000,
                          std::uint64_t seed = 0)
{
    require(X.cols() == target.dim(), "kl_estimate: dimension mismatch");
    const Scalar h2 = median_bandwidth(X);
    Scalar acc = Scalar(0);
    for (Index i = 0; i < X.rows(); ++i) {
        const VecX<Scalar> x = X.row(i).transpose();
        acc += detail::log_kde(X, h2, x) + target.potential(x);
    }
    return {acc / Scalar(X.rows()) + log_normalizer(target, X, h2, is_draws, seed), false};
}

template <typename Scalar>
KlEstimate<Scalar> kl_estimate(const MatX<Scalar>& X, const TargetSpec<Scalar>& target, KlMethod method,
                               std::uint64_t seed = 0)
{
    return method == KlMethod::GaussianFit ? kl_gaussian_fit(X, target) : kl_kde(X, target, Index(10000), seed);
}

template <typename Scalar = double> struct MetricRecord {
    Index iteration = 0;
    Scalar kl_estimate = std::numeric_limits<Scalar>::quiet_NaN();
    VecX<Scalar> mean;
    MatX<Scalar> cov;
    Scalar grad_restart_stat = std::numeric_limits<Scalar>::quiet_NaN();
    Scalar mean_speed = Scalar(0);
    Scalar acceptance_rate = std::numeric_limits<Scalar>::quiet_NaN();
    bool regularized = false;
};

inline constexpr const char* kMetricsSchema = "# steinflow metrics v1";

/// Schema comment line plus the column header for dimension d.
inline void write_metrics_header(std::ostream& os, Index d)
{
    os << kMetricsSchema << '\n' << "iteration,kl_estimate";
    for (Index i = 0; i < d; ++i)
        os << ",mean_" << i;
    for (Index i = 0; i < d; ++i)
        for (Index j = 0; j < d; ++j)
            os << ",cov_" << i << j;
    os << ",grad_restart_stat,mean_speed,acceptance_rate,regularized\n";
}

namespace detail {

template <typename Scalar> void write_number(std::ostream& os, Scalar v)
{
    const double x = static_cast<double>(v);
    if (std::isnan(x))
        os << "nan";
    else if (std::isinf(x))
        os << (x > 0 ? "inf" : "-inf");
    else
        os << std::setprecision(17) << x;
}

} // namespace detail

template <typename Scalar> void write_metrics_row(std::ostream& os, const MetricRecord<Scalar>& r)
{
    os << r.iteration << ',';
    detail::write_number(os, r.kl_estimate);
    for (Index i = 0; i < r.mean.size(); ++i) {
        os << ',';
        detail::write_number(os, r.mean(i));
    }
    for (Index i = 0; i < r.cov.rows(); ++i)
        for (Index j = 0; j < r.cov.cols(); ++j) {
            os << ',';
            detail::write_number(os, r.cov(i, j));
        }
    os << ',';
    detail::write_number(os, r.grad_restart_stat);
    os << ',';
    detail::write_number(os, r.mean_speed);
    os << ',';
    detail::write_number(os, r.acceptance_rate);
    os << ',' << (r.regularized ? 1 : 0) << '\n';
}

} // namespace steinflow
