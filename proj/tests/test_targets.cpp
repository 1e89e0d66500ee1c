#include "doctest.h"

#include "steinflow/targets.hpp"

#include <random>

using namespace steinflow;
using Mat = MatX<double>;
using Vec = VecX<double>;

namespace {

Vec v2(double a, double b)
{
    Vec v(2);
    v << a, b;
    return v;
}

Vec fd_gradient(const TargetSpec<double>& t, const Vec& x, double h)
{
    Vec g(x.size());
    for (Index i = 0; i < x.size(); ++i) {
        Vec e = Vec::Zero(x.size());
        e(i) = h;
        g(i) = (t.potential(x + e) - t.potential(x - e)) / (2 * h);
    }
    return g;
}

} // namespace

TEST_CASE("potential examples")
{
    const auto q = TargetSpec<double>::quartic();
    CHECK(q.potential(v2(1, 1)) == 0.5);
    const Vec gq = q.grad_potential(v2(1, -1));
    CHECK(gq(0) == 1.0);
    CHECK(gq(1) == -1.0);

    Mat Q = Mat::Zero(2, 2);
    Q(0, 0) = 10;
    Q(1, 1) = 0.05;
    const auto g = TargetSpec<double>::gaussian(Vec::Zero(2), Q);
    CHECK(g.potential(v2(1, 0)) == doctest::Approx(0.05).epsilon(1e-15));

    const auto shifted = TargetSpec<double>::gaussian(v2(1, 1), Q);
    CHECK(shifted.potential(v2(1, 1)) == 0.0);
    CHECK(shifted.grad_potential(v2(1, 1)).norm() == 0.0);
}

TEST_CASE("builtin targets")
{
    const auto aniso = builtin_target<double>("gauss-aniso");
    REQUIRE(aniso.is_gaussian());
    CHECK(aniso.mean() == v2(1, 1));
    CHECK(aniso.covariance()(0, 0) == 10.0);
    CHECK(aniso.covariance()(1, 1) == 0.05);
    CHECK(aniso.covariance()(0, 1) == 0.0);

    CHECK(builtin_target<double>("quartic").kind() == TargetSpec<double>::Kind::Quartic);
    CHECK(builtin_target<double>("double-bananas").kind() == TargetSpec<double>::Kind::DoubleBananas);

    // precision reading: f = 1/2 x^T [[3,-2],[-2,3]] x
    Mat P(2, 2);
    P << 3, -2, -2, 3;
    const auto corr = builtin_target<double>("gauss-correlated", true);
    CHECK(corr.mean().norm() == 0.0);
    CHECK((corr.precision() - P).norm() < 1e-14);
    CHECK(corr.potential(v2(1, 0)) == doctest::Approx(1.5));
    const auto corr_cov = builtin_target<double>("gauss-correlated", false);
    CHECK((corr_cov.covariance() - P).norm() == 0.0);

    try {
        builtin_target<double>("nonexistent");
        FAIL("expected ContractError");
    } catch (const ContractError& e) {
        const std::string msg = e.what();
        for (const auto& n : builtin_target_names())
            CHECK(msg.find(n) != std::string::npos);
    }
    CHECK(builtin_target_names().size() == 4);
}

TEST_CASE("gaussian caches precision and log det")
{
    Mat Q(2, 2);
    Q << 2, 0.5, 0.5, 1;
    const auto g = TargetSpec<double>::gaussian(v2(0.3, -0.2), Q);
    CHECK((g.precision() * Q - Mat::Identity(2, 2)).norm() < 1e-14);
    CHECK(g.log_det_covariance() == doctest::Approx(std::log(1.75)).epsilon(1e-14));
    Mat bad(2, 2);
    bad << 1, 2, 2, 1;
    CHECK_THROWS_AS(TargetSpec<double>::gaussian(v2(0, 0), bad), ContractError);
    CHECK_THROWS_AS(TargetSpec<double>::quartic().covariance(), ContractError);
    CHECK_THROWS_AS(g.potential(Vec::Zero(3)), ContractError);
}

TEST_CASE("gradients match finite differences on every builtin")
{
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (const auto& name : builtin_target_names()) {
        const auto t = builtin_target<double>(name);
        for (int k = 0; k < 100; ++k) {
            const Vec x = v2(u(rng), u(rng));
            const Vec g = t.grad_potential(x);
            const Vec fd = fd_gradient(t, x, 1e-5);
            CHECK((g - fd).cwiseAbs().maxCoeff() <= 1e-5 * std::max(1.0, g.norm()));
        }
    }
}

TEST_CASE("grad_rows agrees with grad_potential")
{
    std::mt19937_64 rng(22);
    std::normal_distribution<double> n(0.0, 1.0);
    Mat X(6, 2);
    for (Index i = 0; i < 6; ++i)
        X.row(i) = v2(n(rng), n(rng)).transpose();
    for (const auto& name : builtin_target_names()) {
        const auto t = builtin_target<double>(name);
        const Mat G = t.grad_rows(X);
        for (Index i = 0; i < 6; ++i)
            CHECK((G.row(i).transpose() - t.grad_potential(X.row(i).transpose())).norm() < 1e-13);
    }
}

TEST_CASE("gaussian potential is convex")
{
    std::mt19937_64 rng(23);
    std::normal_distribution<double> n(0.0, 2.0);
    const auto t = builtin_target<double>("gauss-aniso");
    for (int k = 0; k < 100; ++k) {
        const Vec x = v2(n(rng), n(rng)), y = v2(n(rng), n(rng));
        CHECK((t.grad_potential(x) - t.grad_potential(y)).dot(x - y) >= 0.0);
    }
}

TEST_CASE("double bananas is symmetric under the mirror and bimodal")
{
    const auto t = builtin_target<double>("double-bananas");
    CHECK(t.potential(v2(0.7, 0.4)) == doctest::Approx(t.potential(v2(0.7, -0.4))).epsilon(1e-14));
    // both mode centres (a, +-a^2) sit lower than the saddle between them
    CHECK(t.potential(v2(1, 1)) < t.potential(v2(1, 0)));
    CHECK(t.potential(v2(1, -1)) < t.potential(v2(1, 0)));
    // far out the log-sum-exp must stay finite
    CHECK(std::isfinite(t.potential(v2(40, -40))));
    CHECK(t.grad_potential(v2(40, -40)).allFinite());
}

TEST_CASE("custom target")
{
    auto t = TargetSpec<double>::custom(
        1, [](const Vec& x) { return std::cosh(x(0)); },
        [](const Vec& x) { return Vec::Constant(1, std::sinh(x(0))); });
    Vec x = Vec::Constant(1, 0.3);
    CHECK(t.potential(x) == doctest::Approx(std::cosh(0.3)));
    CHECK(t.grad_potential(x)(0) == doctest::Approx(fd_gradient(t, x, 1e-6)(0)).epsilon(1e-8));
}
