#pragma once

// Reference implementations written as plain loops, independent of the matrix forms in the library.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <random>

namespace oracle {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

struct Kernel {
    bool gaussian = true;
    double s2 = 1.0;
    Mat A;

    double k(const Vec& x, const Vec& y) const
    {
        if (gaussian)
            return std::exp(-(x - y).squaredNorm() / (2 * s2));
        return x.dot(A * y) + 1.0;
    }
    // d/dx K(x, y)
    Vec d1(const Vec& x, const Vec& y) const
    {
        if (gaussian)
            return -(x - y) / s2 * k(x, y);
        return A * y;
    }
    // d/dy K(x, y)
    Vec d2(const Vec& x, const Vec& y) const
    {
        if (gaussian)
            return (x - y) / s2 * k(x, y);
        return A * x;
    }
};

using Grad = std::function<Vec(const Vec&)>;

inline Vec row(const Mat& M, Eigen::Index i)
{
    return M.row(i).transpose();
}

struct StepOut {
    Mat X, V, Y;
};

/// One step of the double-sum update with time factor h and per-particle damping alpha:
/// X+ = X + h Y, V = N (K + eps I)^{-1} Y, and for every j
/// Y+_j = alpha_j Y_j + h [ (1/N) sum_i (d2K(x_j,x_i) - K_ji grad f(x_i))
///        + (1/N^2) sum_{i,l} <V_i,V_l> (K_il d2K(x_j,x_i) + K_jl d1K(x_j,x_i) - K_ji d2K(x_l,x_i)) ].
inline StepOut asvgd_step(const Mat& X, const Mat& Y, const Vec& alpha, const Kernel& ker, const Grad& grad,
                          double h, double eps, bool interaction = true)
{
    const Eigen::Index n = X.rows(), d = X.cols();
    StepOut out;
    out.X = X + h * Y;
    Mat K(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            K(i, j) = ker.k(row(out.X, i), row(out.X, j));
    Mat M = K + eps * Mat::Identity(n, n);
    out.V = double(n) * Eigen::FullPivLU<Mat>(M).solve(Y);
    out.Y.resize(n, d);
    for (Eigen::Index j = 0; j < n; ++j) {
        const Vec xj = row(out.X, j);
        Vec energy = Vec::Zero(d);
        for (Eigen::Index i = 0; i < n; ++i) {
            const Vec xi = row(out.X, i);
            energy += ker.d2(xj, xi) - K(j, i) * grad(xi);
        }
        Vec inter = Vec::Zero(d);
        if (interaction) {
            for (Eigen::Index i = 0; i < n; ++i) {
                const Vec xi = row(out.X, i);
                for (Eigen::Index l = 0; l < n; ++l) {
                    const double vv = out.V.row(i).dot(out.V.row(l));
                    inter += vv * (K(i, l) * ker.d2(xj, xi) + K(j, l) * ker.d1(xj, xi) -
                                   K(j, i) * ker.d2(row(out.X, l), xi));
                }
            }
        }
        out.Y.row(j) = (alpha(j) * row(Y, j) + h * (energy / double(n) + inter / double(n * n))).transpose();
    }
    return out;
}

/// SVGD direction (1/N) sum_j [K(x_j,x_i)(-grad f(x_j)) + d/dx_j K(x_j, x_i)].
inline Mat svgd_direction(const Mat& X, const Kernel& ker, const Grad& grad)
{
    const Eigen::Index n = X.rows();
    Mat D = Mat::Zero(n, X.cols());
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            const Vec xi = row(X, i), xj = row(X, j);
            D.row(i) += (-ker.k(xj, xi) * grad(xj) + ker.d1(xj, xi)).transpose();
        }
    return D / double(n);
}

/// (1/N^2) sum_ij <V_j, K(x_i,x_j) grad f(x_i) - d2K(x_j, x_i)>.
inline double restart_stat(const Mat& X, const Mat& V, const Kernel& ker, const Grad& grad)
{
    const Eigen::Index n = X.rows();
    double s = 0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            const Vec xi = row(X, i), xj = row(X, j);
            s += row(V, j).dot(ker.k(xi, xj) * grad(xi) - ker.d2(xj, xi));
        }
    return s / double(n * n);
}

inline Mat random_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng, double scale = 1.0)
{
    std::normal_distribution<double> nd(0.0, scale);
    Mat M(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j)
            M(i, j) = nd(rng);
    return M;
}

inline Mat random_spd(Eigen::Index d, std::mt19937_64& rng, double floor = 0.3)
{
    const Mat B = random_matrix(d, d, rng, 0.7);
    return B * B.transpose() + floor * Mat::Identity(d, d);
}

inline double rel_err(const Mat& a, const Mat& b)
{
    return (a - b).norm() / std::max(1e-300, b.norm());
}

} // namespace oracle
