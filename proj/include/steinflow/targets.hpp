#pragma once

#include "linalg.hpp"

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace steinflow {

/// Target density pi ∝ exp(-f), described by its potential f and gradient.
template <typename Scalar = double> class TargetSpec {
public:
    enum class Kind { Gaussian, Quartic, DoubleBananas, Custom };

    using Potential = std::function<Scalar(const VecX<Scalar>&)>;
    using Gradient = std::function<VecX<Scalar>(const VecX<Scalar>&)>;

    /// Constants of f(x) = -log(exp(-F(x)) + exp(-F(Rx))), F(x) = (a - x1)^2 / c1 + c2 (x2 - x1^2)^2,
    /// R = diag(1, -1).
    struct BananaParams {
        Scalar a = Scalar(1);
        Scalar c1 = Scalar(0.5);
        Scalar c2 = Scalar(5);
    };

    /// N(mean, covariance); the potential is 1/2 (x - b)^T Q^{-1} (x - b).
    static TargetSpec gaussian(const VecX<Scalar>& mean, const MatX<Scalar>& covariance)
    {
        require(covariance.rows() == covariance.cols() && covariance.rows() == mean.size(),
                "Gaussian target: mean and covariance dimensions differ");
        require_spd(covariance, "Gaussian target covariance Q");
        TargetSpec t;
        t.kind_ = Kind::Gaussian;
        t.dim_ = mean.size();
        t.mean_ = mean;
        t.cov_ = sym(covariance);
        Eigen::LLT<MatX<Scalar>> llt(t.cov_);
        t.precision_ = sym(MatX<Scalar>(llt.solve(MatX<Scalar>::Identity(t.dim_, t.dim_))));
        t.logdet_ = Scalar(2) * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
        return t;
    }

    static TargetSpec quartic()
    {
        TargetSpec t;
        t.kind_ = Kind::Quartic;
        t.dim_ = 2;
        return t;
    }

    static TargetSpec double_bananas(BananaParams params = {})
    {
        require(params.c1 > Scalar(0) && params.c2 > Scalar(0), "double bananas: c1, c2 must be positive");
        TargetSpec t;
        t.kind_ = Kind::DoubleBananas;
        t.dim_ = 2;
        t.banana_ = params;
        return t;
    }

    static TargetSpec custom(Index dim, Potential f, Gradient grad)
    {
        require(dim > 0 && f && grad, "custom target needs a dimension, potential and gradient");
        TargetSpec t;
        t.kind_ = Kind::Custom;
        t.dim_ = dim;
        t.f_ = std::move(f);
        t.grad_ = std::move(grad);
        return t;
    }

    Kind kind() const { return kind_; }
    bool is_gaussian() const { return kind_ == Kind::Gaussian; }
    Index dim() const { return dim_; }

    const VecX<Scalar>& mean() const { return gaussian_only(mean_); }
    const MatX<Scalar>& covariance() const { return gaussian_only(cov_); }
    const MatX<Scalar>& precision() const { return gaussian_only(precision_); }
    Scalar log_det_covariance() const { return gaussian_only(logdet_); }
    const BananaParams& banana_params() const { return banana_; }

    Scalar potential(const VecX<Scalar>& x) const
    {
        check_dim(x);
        switch (kind_) {
        case Kind::Gaussian: {
            const VecX<Scalar> r = x - mean_;
            return Scalar(0.5) * r.dot(precision_ * r);
        }
        case Kind::Quartic:
            return Scalar(0.25) * (std::pow(x(0), 4) + std::pow(x(1), 4));
        case Kind::DoubleBananas: {
            const auto [f1, f2] = banana_parts(x);
            const Scalar m = std::min(f1, f2);
            return m - std::log(std::exp(m - f1) + std::exp(m - f2));
        }
        case Kind::Custom:
            return f_(x);
        }
        return Scalar(0);
    }

    VecX<Scalar> grad_potential(const VecX<Scalar>& x) const
    {
        check_dim(x);
        switch (kind_) {
        case Kind::Gaussian:
            return precision_ * (x - mean_);
        case Kind::Quartic:
            return x.array().cube().matrix();
        case Kind::DoubleBananas: {
            const auto [f1, f2] = banana_parts(x);
            // softmax weights of the two components
            const Scalar w1 = Scalar(1) / (Scalar(1) + std::exp(f1 - f2));
            const Scalar w2 = Scalar(1) - w1;
            VecX<Scalar> mirrored = x;
            mirrored(1) = -x(1);
            VecX<Scalar> g2 = banana_grad(mirrored);
            g2(1) = -g2(1);
            return w1 * banana_grad(x) + w2 * g2;
        }
        case Kind::Custom:
            return grad_(x);
        }
        return VecX<Scalar>::Zero(dim_);
    }

    /// Row-wise gradient for an N x d particle matrix.
    MatX<Scalar> grad_rows(const MatX<Scalar>& X) const
    {
        MatX<Scalar> G(X.rows(), X.cols());
        if (kind_ == Kind::Gaussian) {
            require(X.cols() == dim_, "target: dimension mismatch");
            G = (X.rowwise() - mean_.transpose()) * precision_;
            return G;
        }
        for (Index i = 0; i < X.rows(); ++i)
            G.row(i) = grad_potential(X.row(i).transpose()).transpose();
        return G;
    }

private:
    TargetSpec() = default;

    template <typename T> const T& gaussian_only(const T& value) const
    {
        require(is_gaussian(), "target parameter only defined for Gaussian targets");
        return value;
    }

    void check_dim(const VecX<Scalar>& x) const
    {
        if (x.size() != dim_)
            throw ContractError(detail::concat("target: expected dimension ", dim_, ", got ", x.size()));
    }

    Scalar banana_F(const VecX<Scalar>& x) const
    {
        const Scalar u = banana_.a - x(0);
        const Scalar v = x(1) - x(0) * x(0);
        return u * u / banana_.c1 + banana_.c2 * v * v;
    }

    VecX<Scalar> banana_grad(const VecX<Scalar>& x) const
    {
        const Scalar v = x(1) - x(0) * x(0);
        VecX<Scalar> g(2);
        g(0) = -Scalar(2) * (banana_.a - x(0)) / banana_.c1 - Scalar(4) * banana_.c2 * v * x(0);
        g(1) = Scalar(2) * banana_.c2 * v;
        return g;
    }

    std::pair<Scalar, Scalar> banana_parts(const VecX<Scalar>& x) const
    {
        VecX<Scalar> mirrored = x;
        mirrored(1) = -x(1);
        return {banana_F(x), banana_F(mirrored)};
    }

    Kind kind_ = Kind::Custom;
    Index dim_ = 0;
    VecX<Scalar> mean_;
    MatX<Scalar> cov_;
    MatX<Scalar> precision_;
    Scalar logdet_ = Scalar(0);
    BananaParams banana_;
    Potential f_;
    Gradient grad_;
};

inline const std::vector<std::string>& builtin_target_names()
{
    static const std::vector<std::string> names{"gauss-correlated", "gauss-aniso", "quartic", "double-bananas"};
    return names;
}

/// Named toy targets. For "gauss-correlated" the matrix [[3,-2],[-2,3]] is read as the
/// precision when q_is_precision is set (f = 1/2 x^T Q x), else as the covariance.
/// The anisotropic target always takes diag(10, 0.05) as its covariance.
template <typename Scalar = double>
TargetSpec<Scalar> builtin_target(const std::string& name, bool q_is_precision = true)
{
    if (name == "gauss-correlated") {
        MatX<Scalar> Q(2, 2);
        Q << 3, -2, -2, 3;
        const MatX<Scalar> cov = q_is_precision ? spd_inverse<Scalar>(Q) : Q;
        return TargetSpec<Scalar>::gaussian(VecX<Scalar>::Zero(2), cov);
    }
    if (name == "gauss-aniso") {
        MatX<Scalar> Q = MatX<Scalar>::Zero(2, 2);
        Q(0, 0) = Scalar(10);
        Q(1, 1) = Scalar(0.05);
        return TargetSpec<Scalar>::gaussian(VecX<Scalar>::Constant(2, Scalar(1)), Q);
    }
    if (name == "quartic")
        return TargetSpec<Scalar>::quartic();
    if (name == "double-bananas")
        return TargetSpec<Scalar>::double_bananas();
    std::string valid;
    for (const auto& n : builtin_target_names())
        valid += (valid.empty() ? "" : ", ") + n;
    throw ContractError("unknown target '" + name + "'; valid names: " + valid);
}

} // namespace steinflow
