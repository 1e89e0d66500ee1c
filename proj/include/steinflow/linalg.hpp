#pragma once

#include <Eigen/Dense>

#include <complex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace steinflow {

template <typename Scalar> using MatX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar> using VecX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Index = Eigen::Index;

/// Raised when an operation's preconditions are violated (shape, sign, symmetry).
class ContractError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical step cannot proceed (singular solve, NaN, loss of definiteness).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

template <typename... Parts> std::string concat(const Parts&... parts)
{
    std::ostringstream os;
    (os << ... << parts);
    return os.str();
}

} // namespace detail

inline void require(bool condition, const std::string& message)
{
    if (!condition)
        throw ContractError(message);
}

template <typename Derived> auto sym(const Eigen::MatrixBase<Derived>& M)
{
    return (M + M.transpose()) / typename Derived::Scalar(2);
}

/// Column-major vectorization: vec(C V B^T) = (B kron C) vec(V).
template <typename Derived>
VecX<typename Derived::Scalar> vec(const Eigen::MatrixBase<Derived>& M)
{
    using Scalar = typename Derived::Scalar;
    MatX<Scalar> copy = M;
    return Eigen::Map<const VecX<Scalar>>(copy.data(), copy.size());
}

template <typename Scalar> MatX<Scalar> unvec(const VecX<Scalar>& v, Index rows, Index cols)
{
    require(v.size() == rows * cols, "unvec: size mismatch");
    return Eigen::Map<const MatX<Scalar>>(v.data(), rows, cols);
}

template <typename DA, typename DB>
MatX<typename DA::Scalar> kron(const Eigen::MatrixBase<DA>& A, const Eigen::MatrixBase<DB>& B)
{
    using Scalar = typename DA::Scalar;
    MatX<Scalar> out(A.rows() * B.rows(), A.cols() * B.cols());
    for (Index i = 0; i < A.rows(); ++i)
        for (Index j = 0; j < A.cols(); ++j)
            out.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    return out;
}

/// Symmetric Kronecker combination A kron B + B kron A.
template <typename DA, typename DB>
MatX<typename DA::Scalar> kron_sum(const Eigen::MatrixBase<DA>& A, const Eigen::MatrixBase<DB>& B)
{
    return kron(A, B) + kron(B, A);
}

template <typename Derived> bool is_symmetric(const Eigen::MatrixBase<Derived>& M, double rel_tol = 1e-12)
{
    if (M.rows() != M.cols())
        return false;
    const auto scale = std::max<double>(1.0, static_cast<double>(M.cwiseAbs().maxCoeff()));
    return static_cast<double>((M - M.transpose()).cwiseAbs().maxCoeff()) <= rel_tol * scale;
}

template <typename Derived> bool is_spd(const Eigen::MatrixBase<Derived>& M)
{
    using Scalar = typename Derived::Scalar;
    if (!is_symmetric(M, 1e-10))
        return false;
    Eigen::LLT<MatX<Scalar>> llt(sym(M));
    return llt.info() == Eigen::Success;
}

template <typename Derived>
void require_spd(const Eigen::MatrixBase<Derived>& M, const std::string& what)
{
    if (!is_spd(M))
        throw ContractError(what + " must be symmetric positive definite");
}

template <typename DA, typename DB>
bool commute(const Eigen::MatrixBase<DA>& A, const Eigen::MatrixBase<DB>& B, double rel_tol = 1e-10)
{
    const auto comm = (A * B - B * A).norm();
    const auto scale = std::max<double>(1.0, static_cast<double>(A.norm() * B.norm()));
    return static_cast<double>(comm) <= rel_tol * scale;
}

template <typename Scalar> Scalar lambda_min(const MatX<Scalar>& M)
{
    Eigen::SelfAdjointEigenSolver<MatX<Scalar>> es(sym(M), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

template <typename Scalar> Scalar lambda_max(const MatX<Scalar>& M)
{
    Eigen::SelfAdjointEigenSolver<MatX<Scalar>> es(sym(M), Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

template <typename Scalar> MatX<Scalar> spd_inverse(const MatX<Scalar>& M)
{
    Eigen::LLT<MatX<Scalar>> llt(M);
    if (llt.info() != Eigen::Success)
        throw NumericalError("spd_inverse: matrix is not positive definite");
    MatX<Scalar> inv = llt.solve(MatX<Scalar>::Identity(M.rows(), M.cols()));
    return sym(inv);
}

/// Applies f to the eigenvalues of a symmetric matrix.
template <typename Scalar, typename F> MatX<Scalar> spectral_map(const MatX<Scalar>& M, F&& f)
{
    Eigen::SelfAdjointEigenSolver<MatX<Scalar>> es(sym(M));
    VecX<Scalar> mapped = es.eigenvalues().unaryExpr(f);
    return es.eigenvectors() * mapped.asDiagonal() * es.eigenvectors().transpose();
}

template <typename Scalar>
std::vector<std::complex<Scalar>> eigenvalues(const MatX<Scalar>& M)
{
    Eigen::EigenSolver<MatX<Scalar>> es(M, false);
    if (es.info() != Eigen::Success)
        throw NumericalError("eigenvalues: eigensolver did not converge");
    std::vector<std::complex<Scalar>> out(es.eigenvalues().data(),
                                          es.eigenvalues().data() + es.eigenvalues().size());
    return out;
}

template <typename Derived> bool all_finite(const Eigen::DenseBase<Derived>& M)
{
    return M.allFinite();
}

} // namespace steinflow
