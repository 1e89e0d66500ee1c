#pragma once

#include "linalg.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace steinflow {

/// Positive-definite kernel: either the Gaussian RBF exp(-|x-y|^2 / (2 sigma^2))
/// or the generalized bilinear kernel x^T A y + 1 with A symmetric positive definite.
template <typename Scalar = double> class KernelSpec {
public:
    enum class Kind { Gaussian, Bilinear };

    static KernelSpec gaussian(Scalar bandwidth)
    {
        require(std::isfinite(static_cast<double>(bandwidth)) && bandwidth > Scalar(0),
                "Gaussian kernel bandwidth (sigma^2) must be positive");
        KernelSpec k;
        k.kind_ = Kind::Gaussian;
        k.bandwidth_ = bandwidth;
        return k;
    }

    static KernelSpec bilinear(const MatX<Scalar>& A)
    {
        require(A.rows() == A.cols() && A.rows() > 0, "bilinear kernel matrix must be square");
        require_spd(A, "bilinear kernel matrix A");
        KernelSpec k;
        k.kind_ = Kind::Bilinear;
        k.A_ = sym(A);
        k.sqrtA_ = spectral_map<Scalar>(k.A_, [](Scalar v) { return std::sqrt(v); });
        return k;
    }

    Kind kind() const { return kind_; }
    bool is_gaussian() const { return kind_ == Kind::Gaussian; }
    bool is_bilinear() const { return kind_ == Kind::Bilinear; }

    Scalar bandwidth() const
    {
        require(is_gaussian(), "bandwidth() requires a Gaussian kernel");
        return bandwidth_;
    }

    const MatX<Scalar>& matrix() const
    {
        require(is_bilinear(), "matrix() requires a bilinear kernel");
        return A_;
    }

    const MatX<Scalar>& sqrt_matrix() const
    {
        require(is_bilinear(), "sqrt_matrix() requires a bilinear kernel");
        return sqrtA_;
    }

    /// Dimension fixed by the kernel, or -1 when any dimension is accepted.
    Index dim() const { return is_bilinear() ? A_.rows() : Index(-1); }

private:
    KernelSpec() = default;

    Kind kind_ = Kind::Gaussian;
    Scalar bandwidth_ = Scalar(1);
    MatX<Scalar> A_;
    MatX<Scalar> sqrtA_;
};

template <typename Scalar = double> struct GramMatrix {
    MatX<Scalar> K;
    KernelSpec<Scalar> kernel;
    MatX<Scalar> points;
};

namespace detail {

template <typename Scalar, typename DX, typename DY>
void check_pair(const KernelSpec<Scalar>& kernel, const Eigen::MatrixBase<DX>& x, const Eigen::MatrixBase<DY>& y)
{
    if (x.size() != y.size())
        throw ContractError(concat("kernel: dimension mismatch (", x.size(), " vs ", y.size(), ")"));
    if (kernel.is_bilinear() && x.size() != kernel.dim())
        throw ContractError(concat("kernel: point dimension ", x.size(), " does not match A (", kernel.dim(), ")"));
}

} // namespace detail

template <typename Scalar, typename DX, typename DY>
Scalar eval(const KernelSpec<Scalar>& kernel, const Eigen::MatrixBase<DX>& x, const Eigen::MatrixBase<DY>& y)
{
    detail::check_pair(kernel, x, y);
    const VecX<Scalar> xv = x;
    const VecX<Scalar> yv = y;
    if (kernel.is_gaussian())
        return std::exp(-(xv - yv).squaredNorm() / (Scalar(2) * kernel.bandwidth()));
    return xv.dot(kernel.matrix() * yv) + Scalar(1);
}

/// Gradient in the first argument.
template <typename Scalar, typename DX, typename DY>
VecX<Scalar> grad1(const KernelSpec<Scalar>& kernel, const Eigen::MatrixBase<DX>& x, const Eigen::MatrixBase<DY>& y)
{
    detail::check_pair(kernel, x, y);
    const VecX<Scalar> xv = x;
    const VecX<Scalar> yv = y;
    if (kernel.is_gaussian())
        return (yv - xv) * (eval(kernel, xv, yv) / kernel.bandwidth());
    return kernel.matrix() * yv;
}

/// Gradient in the second argument.
template <typename Scalar, typename DX, typename DY>
VecX<Scalar> grad2(const KernelSpec<Scalar>& kernel, const Eigen::MatrixBase<DX>& x, const Eigen::MatrixBase<DY>& y)
{
    detail::check_pair(kernel, x, y);
    const VecX<Scalar> xv = x;
    const VecX<Scalar> yv = y;
    if (kernel.is_gaussian())
        return (xv - yv) * (eval(kernel, xv, yv) / kernel.bandwidth());
    return kernel.matrix() * xv;
}

/// Dense N x N kernel matrix over the rows of X. Each entry is computed
/// independently, so the Gaussian diagonal is exactly one.
template <typename Scalar> MatX<Scalar> kernel_matrix(const KernelSpec<Scalar>& kernel, const MatX<Scalar>& X)
{
    const Index n = X.rows();
    require(n >= 1, "gram: need at least one point");
    if (kernel.is_bilinear()) {
        require(X.cols() == kernel.dim(), "gram: point dimension does not match A");
        MatX<Scalar> K = X * kernel.matrix() * X.transpose();
        K.array() += Scalar(1);
        return sym(K);
    }
    const Scalar inv2s = Scalar(1) / (Scalar(2) * kernel.bandwidth());
    MatX<Scalar> K(n, n);
    for (Index j = 0; j < n; ++j) {
        K(j, j) = Scalar(1);
        for (Index i = j + 1; i < n; ++i) {
            const Scalar v = std::exp(-(X.row(i) - X.row(j)).squaredNorm() * inv2s);
            K(i, j) = v;
            K(j, i) = v;
        }
    }
    return K;
}

template <typename Scalar> GramMatrix<Scalar> gram(const KernelSpec<Scalar>& kernel, const MatX<Scalar>& X)
{
    return GramMatrix<Scalar>{kernel_matrix(kernel, X), kernel, X};
}

/// Low-rank factor U = [X A^{1/2} | 1] with U U^T equal to the bilinear Gram matrix.
template <typename Scalar> MatX<Scalar> bilinear_factor(const KernelSpec<Scalar>& kernel, const MatX<Scalar>& X)
{
    require(X.cols() == kernel.dim(), "bilinear_factor: point dimension does not match A");
    MatX<Scalar> U(X.rows(), X.cols() + 1);
    U.leftCols(X.cols()) = X * kernel.sqrt_matrix();
    U.col(X.cols()).setOnes();
    return U;
}

/// Median heuristic sigma^2 = med^2 / (2 log(N + 1)), med the median pairwise distance.
template <typename Scalar> Scalar median_bandwidth(const MatX<Scalar>& X)
{
    const Index n = X.rows();
    require(n >= 2, "median_bandwidth: need at least two points");
    std::vector<Scalar> dist;
    dist.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
    for (Index i = 0; i < n; ++i)
        for (Index j = i + 1; j < n; ++j)
            dist.push_back((X.row(i) - X.row(j)).norm());
    const std::size_t m = dist.size();
    std::nth_element(dist.begin(), dist.begin() + m / 2, dist.end());
    Scalar med = dist[m / 2];
    if (m % 2 == 0) {
        const Scalar lower = *std::max_element(dist.begin(), dist.begin() + m / 2);
        med = (med + lower) / Scalar(2);
    }
    if (!(med > Scalar(0)))
        throw ContractError("median_bandwidth: median pairwise distance is zero, bandwidth undefined");
    return med * med / (Scalar(2) * std::log(Scalar(n + 1)));
}

/// (U U^T + eps I)^{-1} Y by the Woodbury identity; U is N x r with r small.
template <typename Scalar>
MatX<Scalar> woodbury_inverse_apply(const MatX<Scalar>& U, Scalar eps, const MatX<Scalar>& Y)
{
    require(eps > Scalar(0), "woodbury_inverse_apply: eps must be positive");
    require(U.rows() == Y.rows(), "woodbury_inverse_apply: row mismatch");
    MatX<Scalar> inner = U.transpose() * U;
    inner.diagonal().array() += eps;
    Eigen::LLT<MatX<Scalar>> llt(inner);
    if (llt.info() != Eigen::Success)
        throw NumericalError("woodbury_inverse_apply: capacitance matrix not positive definite");
    MatX<Scalar> UtY = U.transpose() * Y;
    return (Y - U * llt.solve(UtY)) / eps;
}

/// (K + eps I)^{-1} Y by Cholesky; throws with the smallest singular value when singular.
template <typename Scalar> MatX<Scalar> dense_inverse_apply(const MatX<Scalar>& K, Scalar eps, const MatX<Scalar>& Y)
{
    require(K.rows() == K.cols() && K.rows() == Y.rows(), "dense_inverse_apply: shape mismatch");
    require(eps >= Scalar(0), "dense_inverse_apply: eps must be nonnegative");
    MatX<Scalar> M = K;
    M.diagonal().array() += eps;
    Eigen::LLT<MatX<Scalar>> llt(M);
    if (llt.info() != Eigen::Success || !(llt.rcond() > Scalar(1e-14))) {
        Eigen::JacobiSVD<MatX<Scalar>> svd(M);
        const auto smin = svd.singularValues()(svd.singularValues().size() - 1);
        throw NumericalError(detail::concat("regularized inverse: K + eps I is singular (smallest singular value ",
                                            static_cast<double>(smin), ")"));
    }
    return llt.solve(Y);
}

/// V = N (K + eps I)^{-1} Y. The bilinear kernel with eps > 0 takes the Woodbury route
/// on its rank-(d+1) factor.
template <typename Scalar>
MatX<Scalar> regularized_inverse_apply(const GramMatrix<Scalar>& gram, Scalar eps, const MatX<Scalar>& Y, Index count)
{
    require(gram.K.rows() == Y.rows(), "regularized_inverse_apply: Y row count does not match K");
    require(count >= 1, "regularized_inverse_apply: particle count must be positive");
    if (gram.kernel.is_bilinear() && eps > Scalar(0))
        return Scalar(count) * woodbury_inverse_apply(bilinear_factor(gram.kernel, gram.points), eps, Y);
    return Scalar(count) * dense_inverse_apply(gram.K, eps, Y);
}

/// Moore-Penrose inverse of lambda1 v1 v1^T + lambda2 v2 v2^T with orthonormal v1, v2.
template <typename Scalar>
MatX<Scalar> rank2_pseudo_inverse(Scalar lambda1, const VecX<Scalar>& v1, Scalar lambda2, const VecX<Scalar>& v2)
{
    require(v1.size() == v2.size(), "rank2_pseudo_inverse: dimension mismatch");
    require(lambda1 != Scalar(0) && lambda2 != Scalar(0), "rank2_pseudo_inverse: eigenvalues must be nonzero");
    const Scalar tol = Scalar(1e-10);
    require(std::abs(v1.norm() - Scalar(1)) < tol && std::abs(v2.norm() - Scalar(1)) < tol &&
                std::abs(v1.dot(v2)) < tol,
            "rank2_pseudo_inverse: v1, v2 must be orthonormal");
    return v1 * v1.transpose() / lambda1 + v2 * v2.transpose() / lambda2;
}

} // namespace steinflow
