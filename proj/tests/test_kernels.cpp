#include "doctest.h"

#include "steinflow/kernels.hpp"

#include <random>

using namespace steinflow;
using Mat = MatX<double>;
using Vec = VecX<double>;

namespace {

Mat random_matrix(Index r, Index c, std::mt19937_64& rng, double scale = 1.0)
{
    std::normal_distribution<double> n(0.0, scale);
    Mat M(r, c);
    for (Index i = 0; i < r; ++i)
        for (Index j = 0; j < c; ++j)
            M(i, j) = n(rng);
    return M;
}

Mat random_spd(Index d, std::mt19937_64& rng)
{
    const Mat B = random_matrix(d, d, rng);
    return B * B.transpose() + 0.5 * Mat::Identity(d, d);
}

Vec v2(double a, double b)
{
    Vec v(2);
    v << a, b;
    return v;
}

} // namespace

TEST_CASE("eval examples")
{
    const auto g = KernelSpec<double>::gaussian(0.5);
    CHECK(eval(g, v2(0.3, -1.2), v2(0.3, -1.2)) == 1.0);
    // exp(-1)
    CHECK(eval(g, v2(0, 0), v2(1, 0)) == doctest::Approx(0.36787944117144233).epsilon(1e-15));

    const auto b = KernelSpec<double>::bilinear(Mat::Identity(2, 2));
    CHECK(eval(b, v2(1, 0), v2(0, 1)) == 1.0);
}

TEST_CASE("gradient examples")
{
    const auto g = KernelSpec<double>::gaussian(1.0);
    CHECK(grad2(g, v2(0.4, 0.1), v2(0.4, 0.1)).norm() == 0.0);
    const Vec g2 = grad2(g, v2(1, 0), v2(0, 0));
    CHECK(g2(0) == doctest::Approx(0.60653065971263342).epsilon(1e-14));
    CHECK(g2(1) == 0.0);

    const auto b = KernelSpec<double>::bilinear(Mat::Identity(2, 2));
    const Vec gb = grad2(b, v2(2, 3), v2(-7, 0.5));
    CHECK(gb(0) == 2.0);
    CHECK(gb(1) == 3.0);
}

TEST_CASE("gradients match central differences")
{
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const Index d = 1 + trial % 3;
        const KernelSpec<double> kernels[] = {KernelSpec<double>::gaussian(0.3 + 0.2 * trial),
                                              KernelSpec<double>::bilinear(random_spd(d, rng))};
        for (const auto& k : kernels) {
            const Vec x = random_matrix(d, 1, rng), y = random_matrix(d, 1, rng);
            const Vec g1 = grad1(k, x, y), g2 = grad2(k, x, y);
            const double h = 1e-6;
            for (Index i = 0; i < d; ++i) {
                Vec e = Vec::Zero(d);
                e(i) = h;
                const double fd1 = (eval(k, x + e, y) - eval(k, x - e, y)) / (2 * h);
                const double fd2 = (eval(k, x, y + e) - eval(k, x, y - e)) / (2 * h);
                // grad2 differentiates in the second slot
                CHECK(std::abs(g1(i) - fd1) < 1e-6);
                CHECK(std::abs(g2(i) - fd2) < 1e-6);
            }
        }
    }
}

TEST_CASE("gaussian grad1 = -grad2")
{
    std::mt19937_64 rng(3);
    const auto g = KernelSpec<double>::gaussian(0.7);
    const Vec x = random_matrix(3, 1, rng), y = random_matrix(3, 1, rng);
    CHECK((grad1(g, x, y) + grad2(g, x, y)).norm() < 1e-16);
}

TEST_CASE("dimension mismatch is a contract error")
{
    const auto b = KernelSpec<double>::bilinear(Mat::Identity(2, 2));
    Vec x3 = Vec::Zero(3);
    CHECK_THROWS_AS(eval(b, x3, x3), ContractError);
    const auto g = KernelSpec<double>::gaussian(1.0);
    CHECK_THROWS_AS(eval(g, x3, v2(0, 0)), ContractError);
    CHECK_THROWS_AS(KernelSpec<double>::gaussian(0.0), ContractError);
    Mat bad(2, 2);
    bad << 1, 0, 0, -1;
    CHECK_THROWS_AS(KernelSpec<double>::bilinear(bad), ContractError);
}

TEST_CASE("gram examples")
{
    const auto g = KernelSpec<double>::gaussian(0.1);
    Mat one(1, 2);
    one << 0.5, -2;
    const auto G1 = gram(g, one);
    CHECK(G1.K.rows() == 1);
    CHECK(G1.K(0, 0) == 1.0);

    Mat same(2, 2);
    same << 1, 2, 1, 2;
    CHECK(gram(g, same).K == Mat::Ones(2, 2));

    const auto b = KernelSpec<double>::bilinear(Mat::Identity(2, 2));
    Mat expect(2, 2);
    expect << 2, 1, 1, 2;
    CHECK(gram(b, Mat(Mat::Identity(2, 2))).K == expect);
}

TEST_CASE("gram is symmetric PSD with exact unit diagonal for gaussian")
{
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        const Index n = 3 + trial, d = 1 + trial % 3;
        const Mat X = random_matrix(n, d, rng);
        const KernelSpec<double> kernels[] = {KernelSpec<double>::gaussian(0.5),
                                              KernelSpec<double>::bilinear(random_spd(d, rng))};
        for (const auto& k : kernels) {
            const Mat K = gram(k, X).K;
            CHECK((K - K.transpose()).norm() == 0.0);
            CHECK(lambda_min<double>(K) >= -1e-10 * K.norm());
            // entry (i,j) is eval on the rows
            CHECK(K(1, 2) == doctest::Approx(eval(k, Vec(X.row(1).transpose()), Vec(X.row(2).transpose()))));
            if (k.is_gaussian()) {
                for (Index i = 0; i < n; ++i)
                    CHECK(K(i, i) == 1.0);
            } else {
                Mat ref = X * k.matrix() * X.transpose();
                ref.array() += 1.0;
                CHECK((K - ref).norm() < 1e-12 * ref.norm());
                Eigen::JacobiSVD<Mat> svd(K);
                Index rank = 0;
                for (Index i = 0; i < svd.singularValues().size(); ++i)
                    rank += svd.singularValues()(i) > 1e-9 * svd.singularValues()(0);
                CHECK(rank <= d + 1);
            }
        }
    }
}

TEST_CASE("gaussian gram is translation invariant")
{
    std::mt19937_64 rng(6);
    const auto g = KernelSpec<double>::gaussian(0.8);
    const Mat X = random_matrix(7, 2, rng);
    const Mat Xs = X.rowwise() + v2(3.5, -1.25).transpose();
    CHECK((gram(g, X).K - gram(g, Xs).K).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("median bandwidth")
{
    Mat two(2, 2);
    two << 0, 0, 2, 0;
    // 4 / (2 log 3)
    CHECK(median_bandwidth(two) == doctest::Approx(1.8204784532536746).epsilon(1e-14));

    // vertices of a simplex: every pairwise distance is sqrt(2)
    const Mat simplex = Mat::Identity(4, 4);
    CHECK(median_bandwidth(simplex) == doctest::Approx(2.0 / (2.0 * std::log(5.0))).epsilon(1e-14));

    std::mt19937_64 rng(8);
    const Mat X = random_matrix(9, 3, rng);
    CHECK(median_bandwidth(Mat(2.5 * X)) == doctest::Approx(6.25 * median_bandwidth(X)).epsilon(1e-12));

    // even number of distances: average of the two middle values
    Mat line(3, 1);
    line << 0, 1, 3;
    // distances 1, 2, 3; N = 3, median 2
    CHECK(median_bandwidth(line) == doctest::Approx(4.0 / (2.0 * std::log(4.0))));
    Mat four(4, 1);
    four << 0, 1, 3, 7;
    // distances 1 2 3 4 6 7: median 3.5
    CHECK(median_bandwidth(four) == doctest::Approx(3.5 * 3.5 / (2.0 * std::log(5.0))));

    CHECK_THROWS_AS(median_bandwidth(Mat(Mat::Ones(4, 2))), ContractError);
    CHECK_THROWS_AS(median_bandwidth(Mat(Mat::Ones(1, 2))), ContractError);
}

TEST_CASE("regularized inverse apply")
{
    std::mt19937_64 rng(9);
    const Index n = 5;
    const Mat Y = random_matrix(n, 2, rng);

    const auto g = KernelSpec<double>::gaussian(1.0);
    // coincident points with a huge bandwidth still give a well conditioned identity when spread far
    Mat far(n, 2);
    for (Index i = 0; i < n; ++i)
        far.row(i) = v2(100.0 * i, 0).transpose();
    const auto GI = gram(g, far);
    CHECK(GI.K == Mat::Identity(n, n));
    CHECK((regularized_inverse_apply(GI, 0.0, Y, n) - n * Y).norm() < 1e-12);
    CHECK((regularized_inverse_apply(GI, 1.0, Y, n) - (n / 2.0) * Y).norm() < 1e-12);

    const auto b = KernelSpec<double>::bilinear(random_spd(2, rng));
    const Mat X = random_matrix(n, 2, rng);
    const auto GB = gram(b, X);
    for (double eps : {0.1, 1e-3, 10.0}) {
        const Mat V = regularized_inverse_apply(GB, eps, Y, n);
        const Mat dense = n * dense_inverse_apply(GB.K, eps, Y);
        CHECK((V - dense).norm() <= 1e-8 * dense.norm());
        Mat Keps = GB.K;
        Keps.diagonal().array() += eps;
        CHECK((Keps * V / double(n) - Y).norm() <= 1e-8 * Y.norm());
    }
}

TEST_CASE("singular gram without regularization names the smallest singular value")
{
    const auto b = KernelSpec<double>::bilinear(Mat::Identity(1, 1));
    Mat X(5, 1);
    X << 0, 1, 2, 3, 4;
    const auto G = gram(b, X);
    const Mat Y = Mat::Ones(5, 1);
    try {
        regularized_inverse_apply(G, 0.0, Y, 5);
        FAIL("expected a NumericalError");
    } catch (const NumericalError& e) {
        CHECK(std::string(e.what()).find("smallest singular value") != std::string::npos);
    }
}

TEST_CASE("rank-2 pseudo-inverse")
{
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 10; ++trial) {
        const Index d = 2 + trial % 4;
        const Mat Z = random_matrix(d, 2, rng);
        Eigen::HouseholderQR<Mat> qr(Z);
        const Mat Qm = qr.householderQ() * Mat::Identity(d, 2);
        const Vec v1 = Qm.col(0), v2c = Qm.col(1);
        const double l1 = 0.3 + trial, l2 = -1.7 + 0.1 * trial;
        const Mat A = l1 * v1 * v1.transpose() + l2 * v2c * v2c.transpose();
        const Mat P = rank2_pseudo_inverse(l1, v1, l2, v2c);
        CHECK((A * P * A - A).norm() < 1e-10);
        CHECK((P * A * P - P).norm() < 1e-10);
    }
}
