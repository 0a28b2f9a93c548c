#include <cmath>

#include "doctest.h"
#include "mvlab/lyapunov.hpp"
#include "mvlab/systems.hpp"

using namespace mvlab;

namespace {

EmpiricalMeasure sample_cloud(NoiseStream& rng, std::uint64_t tag, std::size_t m, double radius) {
    std::vector<double> xs(m);
    for (std::size_t i = 0; i < m; ++i) xs[i] = radius * (2.0 * rng.uniform(tag, i, 30) - 1.0);
    return EmpiricalMeasure::from_scalars(xs);
}

}  // namespace

TEST_CASE("Lions derivative by finite differences matches the analytic slot") {
    NoiseStream rng(301);
    for (const auto& name : builtin_names()) {
        const NamedSystem& sys = builtin(name);
        for (std::uint64_t k = 0; k < 20; ++k) {
            std::size_t m = 1 + k % 5;
            EmpiricalMeasure mu = sample_cloud(rng, k, m, 1.5);
            Vec x{1.5 * (2.0 * rng.uniform(k, 40, 0) - 1.0)};
            std::size_t j = k % m;
            Vec fd = lions_derivative_fd(sys.V, x, mu, j);
            Vec an = sys.V.lions(x, mu, mu.point(j));
            CHECK(std::abs(fd[0] - an[0]) <= 1e-5 * (1.0 + std::abs(an[0])));
            Mat fd2 = lions_ygrad_fd(sys.V, x, mu, j);
            Mat an2 = sys.V.lions_ygrad(x, mu, mu.point(j));
            CHECK(std::abs(fd2(0, 0) - an2(0, 0)) <= 1e-4 * (1.0 + std::abs(an2(0, 0))));
        }
    }
}

TEST_CASE("state-derivative finite differences match the analytic slots") {
    NoiseStream rng(302);
    const NamedSystem& sys = builtin("ex5_1");
    for (std::uint64_t k = 0; k < 10; ++k) {
        EmpiricalMeasure mu = sample_cloud(rng, k, 3, 1.5);
        Vec x{1.5 * (2.0 * rng.uniform(k, 41, 0) - 1.0)};
        CHECK(grad_x_fd(sys.V, x, mu)[0] ==
              doctest::Approx(sys.V.grad_x(x, mu)[0]).epsilon(1e-6));
        CHECK(hess_x_fd(sys.V, x, mu)(0, 0) ==
              doctest::Approx(sys.V.hess_x(x, mu)(0, 0)).epsilon(1e-5));
    }
}

TEST_CASE("generator value at a point mass") {
    // ex5_1 at (x, mu) = (1, delta_1): LV = -4 + 12 - 6 + 30 = 32.
    const NamedSystem& sys = builtin("ex5_1");
    double got = generator_L(sys.V, sys.field, 0.0, Vec{1.0}, EmpiricalMeasure::dirac1d(1.0));
    CHECK(got == doctest::Approx(32.0).epsilon(1e-12));
}

TEST_CASE("ex5_2 generator closes to -6 V") {
    const NamedSystem& sys = builtin("ex5_2");
    NoiseStream rng(303);
    for (std::uint64_t k = 0; k < 50; ++k) {
        EmpiricalMeasure mu = sample_cloud(rng, k, 1 + k % 6, 2.0);
        Vec x{2.0 * (2.0 * rng.uniform(k, 42, 0) - 1.0)};
        double lv = generator_L(sys.V, sys.field, 0.0, x, mu);
        double v = sys.V.value(x, mu);
        CHECK(std::abs(lv + 6.0 * v) <= 1e-9 * (1.0 + std::abs(lv)));
    }
}

TEST_CASE("analytic and finite-difference generators agree") {
    NoiseStream rng(304);
    for (const auto& name : builtin_names()) {
        const NamedSystem& sys = builtin(name);
        for (std::uint64_t k = 0; k < 10; ++k) {
            EmpiricalMeasure mu = sample_cloud(rng, k, 2 + k % 4, 1.5);
            Vec x{1.5 * (2.0 * rng.uniform(k, 43, 0) - 1.0)};
            double a = generator_L(sys.V, sys.field, 0.0, x, mu);
            double f = generator_L_fd(sys.V, sys.field, 0.0, x, mu);
            CHECK(std::abs(a - f) <= 1e-5 * (1.0 + std::abs(a)));
        }
    }
}

TEST_CASE("coupled generator reduces to the one-component generator for ex5_3's V") {
    // V(x, mu) = x^2 has no measure dependence, so the coupled generator is
    // the bar one-point generator alone.
    const NamedSystem& sys = builtin("ex5_3");
    EmpiricalMeasure mu = EmpiricalMeasure::from_scalars({0.5, -1.0, 1.5});
    Vec xb{0.8};
    double got = coupled_generator(sys.V, sys.field, *sys.bar_field, 0.0, xb, mu);
    double b = sys.bar_field->drift(0.0, xb, mu)[0];
    double s = sys.bar_field->diffusion(0.0, xb, mu)(0, 0);
    CHECK(got == doctest::Approx(2.0 * xb[0] * b + s * s).epsilon(1e-9));
    CHECK(coupled_generator_fd(sys.V, sys.field, *sys.bar_field, 0.0, xb, mu) ==
          doctest::Approx(got).epsilon(1e-5));
}

TEST_CASE("two-point generator value from the worked example") {
    // ex5_3 at x = 1, y = 0, mu = nu = delta_0:
    //   u = 1, w = 1, LbarV = 2*1*((-1-2-0) - 0) + (1 - 0)^2 = -6 + 1 = -5.
    const NamedSystem& sys = builtin("ex5_3");
    double got = two_point_generator(*sys.V2, *sys.bar_field, 0.0, Vec{1.0}, Vec{0.0},
                                     EmpiricalMeasure::dirac1d(0.0), EmpiricalMeasure::dirac1d(0.0));
    CHECK(got == doctest::Approx(-5.0).epsilon(1e-12));
    CHECK(two_point_generator_fd(*sys.V2, *sys.bar_field, 0.0, Vec{1.0}, Vec{0.0},
                                 EmpiricalMeasure::dirac1d(0.0), EmpiricalMeasure::dirac1d(0.0)) ==
          doctest::Approx(-5.0).epsilon(1e-5));
}

TEST_CASE("certificates of the built-in systems hold on sampled inputs") {
    for (const auto& name : builtin_names()) {
        const NamedSystem& sys = builtin(name);
        CertSampler sampler;
        sampler.seed = 17;
        const CoefficientField* bar = sys.bar_field ? &*sys.bar_field : nullptr;
        const TwoPointFunction* v2 = sys.V2 ? &*sys.V2 : nullptr;
        CertReport rep =
            check_certificate(sys.field, bar, &sys.V, v2, sys.certificate, sampler, 200);
        CHECK(rep.passed);
        CHECK(rep.violations.empty());
        CHECK(rep.samples == 200);
    }
}

TEST_CASE("a deliberately false certificate is reported, not thrown") {
    const NamedSystem& sys = builtin("ex5_1");
    Certificate wrong = Certificate::h2(-100.0, 0.0);  // LV <= -100 V is false
    CertSampler sampler;
    sampler.seed = 17;
    CertReport rep = check_certificate(sys.field, nullptr, &sys.V, nullptr, wrong, sampler, 200);
    CHECK_FALSE(rep.passed);
    CHECK(!rep.violations.empty());
    CHECK(rep.worst_margin > 0.0);
    CHECK(rep.json().find("\"passed\"") != std::string::npos);
}

TEST_CASE("two-point helper functions") {
    TwoPointFunction q = TwoPointFunction::quadratic();
    CHECK(q.value(Vec{3.0}) == doctest::Approx(9.0));
    CHECK(q.grad(Vec{3.0})[0] == doctest::Approx(6.0));
    CHECK(q.hess(Vec{3.0})(0, 0) == doctest::Approx(2.0));
    TwoPointFunction f = TwoPointFunction::quartic_over4();
    CHECK(f.value(Vec{2.0}) == doctest::Approx(4.0));
    CHECK(f.grad(Vec{2.0})[0] == doctest::Approx(8.0));
}
