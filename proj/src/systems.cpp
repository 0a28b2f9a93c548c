#include "mvlab/systems.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mvlab {

namespace {

NamedSystem make_ex5_1() {
    NamedSystem s;
    s.name = "ex5_1";
    s.description =
        "1-d quadratic-interaction system b(x,mu) = -x m2(mu), sigma = sqrt(2) x, "
        "with V(x,mu) = x^4 + int y^6 mu(dy). Certifies non-explosion via H2.";
    s.field = CoefficientField::scalar(
        [](double x, const EmpiricalMeasure& mu) { return -x * moment1d(mu, 2); },
        [](double x, const EmpiricalMeasure&) { return std::sqrt(2.0) * x; });
    s.V.value = [](const Vec& x, const EmpiricalMeasure& mu) {
        double x2 = x[0] * x[0];
        return x2 * x2 + moment1d(mu, 6);
    };
    s.V.grad_x = [](const Vec& x, const EmpiricalMeasure&) {
        return Vec{4.0 * x[0] * x[0] * x[0]};
    };
    s.V.hess_x = [](const Vec& x, const EmpiricalMeasure&) {
        return Mat::scalar1x1(12.0 * x[0] * x[0]);
    };
    s.V.lions = [](const Vec&, const EmpiricalMeasure&, const Vec& z) {
        double z2 = z[0] * z[0];
        return Vec{6.0 * z2 * z2 * z[0]};
    };
    s.V.lions_ygrad = [](const Vec&, const EmpiricalMeasure&, const Vec& z) {
        double z2 = z[0] * z[0];
        return Mat::scalar1x1(30.0 * z2 * z2);
    };
    s.certificate = Certificate::h2(30.0, 0.0);
    s.generator_exact = [](const Vec& x, const EmpiricalMeasure& mu) {
        double x4 = std::pow(x[0], 4);
        double m2 = moment1d(mu, 2);
        double m6 = moment1d(mu, 6);
        return -4.0 * x4 * m2 + 12.0 * x4 - 6.0 * m2 * m6 + 30.0 * m6;
    };
    s.closed_forms = {
        {"generator", "LV(x,mu) = -4 x^4 m2 + 12 x^4 - 6 m2 m6 + 30 m6  (mk = int y^k mu(dy))"},
        {"certificate", "LV(x,mu) <= 30 V(x,mu)  [H2 with lambda = 30, lambda~ = 0]"},
    };
    s.citations = {"Example 5.1", "Proposition 2.5", "Theorem 3.1 (non-explosion via H2)"};
    return s;
}

NamedSystem make_ex5_2() {
    NamedSystem s;
    s.name = "ex5_2";
    s.description =
        "1-d mean-reverting system b(x,mu) = -3x + 3 m(mu), sigma = x - m(mu), "
        "with V(x,mu) = 1/4 (x - m(mu))^4. The generator closes exactly.";
    s.field = CoefficientField::scalar(
        [](double x, const EmpiricalMeasure& mu) { return -3.0 * x + 3.0 * mean1d(mu); },
        [](double x, const EmpiricalMeasure& mu) { return x - mean1d(mu); });
    // |b(x,mu)-b(y,nu)| <= 3(|x-y| + W_2), |sigma diff| <= |x-y| + W_2.
    s.field.lipschitz = 3.0;
    s.V.value = [](const Vec& x, const EmpiricalMeasure& mu) {
        double d = x[0] - mean1d(mu);
        return 0.25 * d * d * d * d;
    };
    s.V.grad_x = [](const Vec& x, const EmpiricalMeasure& mu) {
        double d = x[0] - mean1d(mu);
        return Vec{d * d * d};
    };
    s.V.hess_x = [](const Vec& x, const EmpiricalMeasure& mu) {
        double d = x[0] - mean1d(mu);
        return Mat::scalar1x1(3.0 * d * d);
    };
    s.V.lions = [](const Vec& x, const EmpiricalMeasure& mu, const Vec&) {
        double d = x[0] - mean1d(mu);
        return Vec{-d * d * d};
    };
    s.V.lions_ygrad = [](const Vec&, const EmpiricalMeasure&, const Vec&) {
        return Mat::scalar1x1(0.0);
    };
    // Exact identity LV = -6V recorded as an (attained) H2 bound.
    s.certificate = Certificate::h2(-6.0, 0.0);
    s.generator_exact = [](const Vec& x, const EmpiricalMeasure& mu) {
        double d = x[0] - mean1d(mu);
        return -1.5 * d * d * d * d;
    };
    s.closed_forms = {
        {"generator", "LV(x,mu) = -(3/2)(x-m)^4 = -6 V(x,mu)  (m = int y mu(dy))"},
        {"decay_EV", "d/dt E V = -6 E V along the deviation process (rate 6)"},
        {"decay_EY2", "d/dt E Y^2 = -5 E Y^2 for Y = X - m (rate 5)"},
        {"note",
         "-(3/2)(x-m)^4 is sometimes quoted as -(3/2)V, overlooking the 1/4 factor in V; "
         "the polynomial closed form is the ground truth, so the V-ratio is -6."},
    };
    s.citations = {"Example 5.2", "Theorem 3.1", "Theorem 4.2 (invariant measure)"};
    return s;
}

NamedSystem make_ex5_3() {
    NamedSystem s;
    s.name = "ex5_3";
    s.description =
        "Coupled pair: X follows the ex5_2 coefficients; X-bar follows "
        "b~(x,mu) = -x^3 - 2x - m(mu), sigma~(x,mu) = x + m(mu)/2, reading the X-law. "
        "Exponentially ergodic with two-point constants (3, 3, 2, 1/2).";
    s.field = CoefficientField::scalar(
        [](double x, const EmpiricalMeasure& mu) { return -3.0 * x + 3.0 * mean1d(mu); },
        [](double x, const EmpiricalMeasure& mu) { return x - mean1d(mu); });
    s.field.lipschitz = 3.0;
    s.bar_field = CoefficientField::scalar(
        [](double x, const EmpiricalMeasure& mu) {
            return -x * x * x - 2.0 * x - mean1d(mu);
        },
        [](double x, const EmpiricalMeasure& mu) { return x + 0.5 * mean1d(mu); });
    s.V.value = [](const Vec& x, const EmpiricalMeasure&) { return x[0] * x[0]; };
    s.V.grad_x = [](const Vec& x, const EmpiricalMeasure&) { return Vec{2.0 * x[0]}; };
    s.V.hess_x = [](const Vec&, const EmpiricalMeasure&) { return Mat::scalar1x1(2.0); };
    s.V.lions = [](const Vec&, const EmpiricalMeasure&, const Vec&) { return Vec{0.0}; };
    s.V.lions_ygrad = [](const Vec&, const EmpiricalMeasure&, const Vec&) {
        return Mat::scalar1x1(0.0);
    };
    s.V2 = TwoPointFunction::quadratic();
    // gamma = beta = 3: rates are not strict, per the derivation
    // -5(x-y)^2 - 4(x-y)dm + dm^2 <= -3(x-y)^2 + 3 dm^2.
    s.certificate = Certificate::two_point(3.0, 3.0, 2.0, 0.5, false);
    s.two_point_exact = [](const Vec& x, const Vec& y, const EmpiricalMeasure& mu,
                           const EmpiricalMeasure& nu) {
        double u = x[0] - y[0];
        double w = u - mean1d(mu) + mean1d(nu);
        return -6.0 * u * w + w * w;
    };
    s.two_point_bar_exact = [](const Vec& x, const Vec& y, const EmpiricalMeasure& mu,
                               const EmpiricalMeasure& nu) {
        double u = x[0] - y[0];
        double db = (-std::pow(x[0], 3) - 2.0 * x[0] - mean1d(mu)) -
                    (-std::pow(y[0], 3) - 2.0 * y[0] - mean1d(nu));
        double ds = (x[0] + 0.5 * mean1d(mu)) - (y[0] + 0.5 * mean1d(nu));
        return 2.0 * u * db + ds * ds;
    };
    s.closed_forms = {
        {"two_point_L",
         "LV(x,y,mu,nu) = -6(x-y)(x-y-m(mu)+m(nu)) + (x-y-m(mu)+m(nu))^2 <= -3V(x-y) + 3 W_V(mu,nu)"},
        {"two_point_Lbar", "LbarV(x,y,mu,nu) <= -2V(x-y) + (1/2) W_V(mu,nu)"},
        {"constants", "(gamma, beta, gamma_bar, beta_bar) = (3, 3, 2, 0.5); gamma = beta, not strict"},
    };
    s.citations = {"Example 5.3", "Theorem 4.4", "Theorem 4.2"};
    return s;
}

void self_test(const NamedSystem& s) {
    NoiseStream rng(0x5e1f7e57);
    auto tol_ok = [](double a, double b) { return std::abs(a - b) <= 1e-8 * (1.0 + std::abs(a)); };
    for (std::uint64_t k = 0; k < 10; ++k) {
        std::uint64_t ctr = 0;
        auto draw = [&] { return 3.0 * (rng.uniform(k, ctr++, 7) - 0.5); };
        std::size_t m = 1 + (k % 5);
        std::vector<double> pts(m), qts(m);
        for (auto& p : pts) p = draw();
        for (auto& q : qts) q = draw();
        EmpiricalMeasure mu = EmpiricalMeasure::from_scalars(pts);
        EmpiricalMeasure nu = EmpiricalMeasure::from_scalars(qts);
        Vec x{draw()}, y{draw()};
        if (s.generator_exact) {
            double got = generator_L(s.V, s.field, 0.0, x, mu);
            double want = s.generator_exact(x, mu);
            if (!tol_ok(got, want))
                throw std::logic_error(s.name + ": closed-form generator self-test failed");
        }
        if (s.two_point_exact) {
            double got = two_point_generator(*s.V2, s.field, 0.0, x, y, mu, nu);
            if (!tol_ok(got, s.two_point_exact(x, y, mu, nu)))
                throw std::logic_error(s.name + ": closed-form two-point self-test failed");
        }
        if (s.two_point_bar_exact) {
            double got = two_point_generator(*s.V2, *s.bar_field, 0.0, x, y, mu, nu);
            if (!tol_ok(got, s.two_point_bar_exact(x, y, mu, nu)))
                throw std::logic_error(s.name + ": closed-form bar two-point self-test failed");
        }
    }
}

const std::map<std::string, NamedSystem>& registry() {
    static const std::map<std::string, NamedSystem> reg = [] {
        std::map<std::string, NamedSystem> r;
        for (NamedSystem s : {make_ex5_1(), make_ex5_2(), make_ex5_3()}) {
            self_test(s);
            r.emplace(s.name, std::move(s));
        }
        return r;
    }();
    return reg;
}

}  // namespace

const NamedSystem& builtin(const std::string& name) {
    const auto& reg = registry();
    auto it = reg.find(name);
    if (it == reg.end()) {
        std::ostringstream msg;
        msg << "unknown system '" << name << "'; valid names:";
        for (const auto& [n, sys] : reg) msg << ' ' << n;
        throw std::invalid_argument(msg.str());
    }
    return it->second;
}

std::vector<std::string> builtin_names() {
    std::vector<std::string> names;
    for (const auto& [n, sys] : registry()) names.push_back(n);
    return names;
}

}  // namespace mvlab
