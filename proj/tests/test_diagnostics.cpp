#include "doctest.h"

#include "oracles.hpp"
#include "steinflow/diagnostics.hpp"
#include "steinflow/samplers.hpp"

#include <algorithm>
#include <sstream>

using namespace steinflow;
using oracle::Mat;
using oracle::Vec;

namespace {

Mat gaussian_draws(Index n, const Vec& mu, const Mat& cov, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    return sample_gaussian<double>(n, mu, cov, rng);
}

} // namespace

TEST_CASE("moments examples")
{
    Mat same(4, 2);
    same.rowwise() = Vec::Constant(2, 1.5).transpose();
    const auto m0 = empirical_moments(same);
    CHECK(m0.cov.norm() == 0.0);
    CHECK(m0.mean == Vec::Constant(2, 1.5));

    Mat pm(2, 2);
    pm << 1, 0, -1, 0;
    const auto m = empirical_moments(pm);
    CHECK(m.mean.norm() == 0.0);
    Mat expect = Mat::Zero(2, 2);
    expect(0, 0) = 2;
    CHECK(m.cov == expect);

    std::mt19937_64 rng(401);
    const Mat X = oracle::random_matrix(30, 3, rng);
    Mat P = X;
    std::vector<Index> idx(30);
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    for (Index i = 0; i < 30; ++i)
        P.row(i) = X.row(idx[static_cast<std::size_t>(i)]);
    const auto a = empirical_moments(X), b = empirical_moments(P);
    CHECK((a.mean - b.mean).norm() < 1e-14);
    CHECK((a.cov - b.cov).norm() < 1e-14);
    CHECK((a.cov - a.cov.transpose()).norm() == 0.0);

    CHECK_THROWS_AS(empirical_moments(Mat(Mat::Ones(1, 2))), ContractError);
}

TEST_CASE("gaussian-fit KL")
{
    // particles constructed with exactly the target moments
    Mat X(4, 2);
    X << 1, 0, -1, 0, 0, 1, 0, -1;
    // sample covariance diag(2/3, 2/3)
    const auto t = TargetSpec<double>::gaussian(Vec::Zero(2), (2.0 / 3.0) * Mat::Identity(2, 2));
    CHECK(std::abs(kl_gaussian_fit(X, t).value) < 1e-14);

    const auto std1 = TargetSpec<double>::gaussian(Vec::Zero(1), Mat::Identity(1, 1));
    const Mat D = gaussian_draws(10000, Vec::Zero(1), Mat::Constant(1, 1, 2.0), 402);
    const double analytic = 0.5 * (2 - 1 + std::log(0.5));
    CHECK(analytic == doctest::Approx(0.1534264097200273).epsilon(1e-14));
    CHECK(std::abs(kl_gaussian_fit(D, std1).value - analytic) < 0.02);

    // degenerate fit: all particles on a line
    Mat line(5, 2);
    line << 0, 0, 1, 0, 2, 0, 3, 0, 4, 0;
    const auto r = kl_gaussian_fit(line, TargetSpec<double>::gaussian(Vec::Zero(2), Mat::Identity(2, 2)));
    CHECK(r.regularized);
    CHECK(std::isfinite(r.value));

    CHECK_THROWS_AS(kl_gaussian_fit(X, TargetSpec<double>::quartic()), ContractError);
}

TEST_CASE("gaussian-fit KL is nonnegative and permutation invariant")
{
    std::mt19937_64 rng(403);
    const auto t = builtin_target<double>("gauss-correlated");
    for (int k = 0; k < 20; ++k) {
        const Mat X = oracle::random_matrix(10 + k, 2, rng, 0.3 + 0.1 * k);
        const double v = kl_gaussian_fit(X, t).value;
        CHECK(v >= 0.0);
        const Mat R = X.colwise().reverse();
        CHECK(kl_gaussian_fit(R, t).value == doctest::Approx(v).epsilon(1e-13));
        CHECK(kl_kde(R, t, 200, 5).value == doctest::Approx(kl_kde(X, t, 200, 5).value).epsilon(1e-12));
    }
}

TEST_CASE("kde and gaussian-fit agree on a gaussian case")
{
    const auto t = builtin_target<double>("gauss-correlated");
    Mat cov(2, 2);
    cov << 1.5, 0.3, 0.3, 0.8;
    const Mat X = gaussian_draws(500, Vec::Constant(2, 0.4), cov, 404);
    const double g = kl_estimate(X, t, KlMethod::GaussianFit).value;
    const double k = kl_estimate(X, t, KlMethod::Kde, 1).value;
    CHECK(std::abs(g - k) < 0.1);
}

TEST_CASE("log normalizer: importance sampling matches the analytic value")
{
    // a Gaussian target disguised as a custom potential
    Mat P(2, 2);
    P << 2, 0.5, 0.5, 1;
    auto f = [P](const Vec& x) { return 0.5 * x.dot(P * x); };
    auto g = [P](const Vec& x) -> Vec { return P * x; };
    const auto custom = TargetSpec<double>::custom(2, f, g);
    const Mat X = gaussian_draws(400, Vec::Zero(2), P.inverse(), 405);
    const double h2 = median_bandwidth(X);
    const double logz = log_normalizer(custom, X, h2, 20000, 3);
    const double exact = 0.5 * (2 * std::log(2 * M_PI) - std::log(P.determinant()));
    CHECK(std::abs(logz - exact) < 0.05);
    CHECK(log_normalizer(custom, X, h2, 500, 3) == log_normalizer(custom, X, h2, 500, 3));
}

TEST_CASE("gaussian-fit estimator gets closer with more samples")
{
    const auto t = builtin_target<double>("gauss-correlated");
    Mat cov(2, 2);
    cov << 1.0, 0.2, 0.2, 0.6;
    const double analytic = kl_gaussians<double>(Vec::Zero(2), cov, t.mean(), t.covariance());
    std::vector<double> e500, e1000;
    for (std::uint64_t s = 0; s < 20; ++s) {
        e500.push_back(std::abs(kl_gaussian_fit(gaussian_draws(500, Vec::Zero(2), cov, 1000 + s), t).value - analytic));
        e1000.push_back(
            std::abs(kl_gaussian_fit(gaussian_draws(1000, Vec::Zero(2), cov, 2000 + s), t).value - analytic));
    }
    auto median = [](std::vector<double> v) {
        std::nth_element(v.begin(), v.begin() + 10, v.end());
        return v[10];
    };
    CHECK(median(e1000) < median(e500));
}

TEST_CASE("kl method names")
{
    CHECK(parse_kl_method("kde") == KlMethod::Kde);
    CHECK(parse_kl_method("gaussian-fit") == KlMethod::GaussianFit);
    CHECK_THROWS_AS(parse_kl_method("histogram"), ContractError);
}

TEST_CASE("metrics csv")
{
    std::ostringstream os;
    write_metrics_header(os, 2);
    CHECK(os.str() == "# steinflow metrics v1\n"
                      "iteration,kl_estimate,mean_0,mean_1,cov_00,cov_01,cov_10,cov_11,"
                      "grad_restart_stat,mean_speed,acceptance_rate,regularized\n");
    MetricRecord<double> r;
    r.iteration = 7;
    r.kl_estimate = 0.25;
    r.mean = Vec::Constant(2, -1.0);
    r.cov = Mat::Identity(2, 2);
    r.mean_speed = 0.5;
    std::ostringstream row;
    write_metrics_row(row, r);
    CHECK(row.str() == "7,0.25,-1,-1,1,0,0,1,nan,0.5,nan,0\n");
}
