#include "mvlab/lyapunov.hpp"

#include <cmath>

#include "json.hpp"
#include "mvlab/transport.hpp"

namespace mvlab {

double LyapunovFunctional::eval(const Vec& x, const EmpiricalMeasure& mu) const {
    double v = value(x, mu);
    if (!std::isfinite(v)) throw std::invalid_argument("LyapunovFunctional: non-finite value");
    return v;
}

namespace {

double lift_eval(const LyapunovFunctional& V, const Vec& x, const std::vector<Vec>& pts) {
    return V.value(x, EmpiricalMeasure(pts));
}

void require_finite(double v, const char* part) {
    if (!std::isfinite(v))
        throw std::invalid_argument(std::string("generator: non-finite ") + part + " part");
}

}  // namespace

Vec lions_derivative_fd(const LyapunovFunctional& V, const Vec& x, const EmpiricalMeasure& mu,
                        std::size_t j) {
    if (j >= mu.size()) throw std::invalid_argument("lions_derivative_fd: index out of range");
    const double h = V.fd_step;
    const double m = static_cast<double>(mu.size());
    std::vector<Vec> pts = mu.points();
    Vec out(mu.dim());
    for (std::size_t a = 0; a < mu.dim(); ++a) {
        double orig = pts[j][a];
        pts[j][a] = orig + h;
        double fp = lift_eval(V, x, pts);
        pts[j][a] = orig - h;
        double fm = lift_eval(V, x, pts);
        pts[j][a] = orig;
        double d = m * (fp - fm) / (2.0 * h);
        if (!std::isfinite(d))
            throw std::invalid_argument("lions_derivative_fd: non-finite difference");
        out[a] = d;
    }
    return out;
}

Mat lions_ygrad_fd(const LyapunovFunctional& V, const Vec& x, const EmpiricalMeasure& mu,
                   std::size_t j) {
    if (j >= mu.size()) throw std::invalid_argument("lions_ygrad_fd: index out of range");
    const double h = V.fd_step2;
    const std::size_t m = mu.size();
    const std::size_t d = mu.dim();
    // Same measure, every point doubled; slot j and its twin j+m carry the
    // same coordinates.
    std::vector<Vec> pts(2 * m);
    for (std::size_t i = 0; i < m; ++i) pts[i] = pts[i + m] = mu.point(i);
    const std::size_t tw = j + m;

    auto f = [&]() { return lift_eval(V, x, pts); };
    auto mixed = [&](std::size_t s1, std::size_t a, std::size_t s2, std::size_t b) {
        double &u = pts[s1][a], &v = pts[s2][b];
        double u0 = u, v0 = v, s = 0.0;
        u = u0 + h; v = v0 + h; s += f();
        u = u0 + h; v = v0 - h; s -= f();
        u = u0 - h; v = v0 + h; s -= f();
        u = u0 - h; v = v0 - h; s += f();
        u = u0; v = v0;
        return s / (4.0 * h * h);
    };

    double f0 = f();
    Mat out(d, d);
    for (std::size_t a = 0; a < d; ++a) {
        for (std::size_t b = 0; b < d; ++b) {
            double same;
            if (a == b) {
                double& u = pts[j][a];
                double u0 = u;
                u = u0 + h;
                double fp = f();
                u = u0 - h;
                double fm = f();
                u = u0;
                same = (fp - 2.0 * f0 + fm) / (h * h);
            } else {
                same = mixed(j, a, j, b);
            }
            double twin = mixed(j, a, tw, b);
            double v = 2.0 * static_cast<double>(m) * (same - twin);
            if (!std::isfinite(v))
                throw std::invalid_argument("lions_ygrad_fd: non-finite difference");
            out(a, b) = v;
        }
    }
    return out;
}

Vec grad_x_fd(const LyapunovFunctional& V, const Vec& x, const EmpiricalMeasure& mu) {
    const double h = V.fd_step;
    Vec xp = x, out(x.size());
    for (std::size_t a = 0; a < x.size(); ++a) {
        double orig = xp[a];
        xp[a] = orig + h;
        double fp = V.value(xp, mu);
        xp[a] = orig - h;
        double fm = V.value(xp, mu);
        xp[a] = orig;
        out[a] = (fp - fm) / (2.0 * h);
    }
    return out;
}

Mat hess_x_fd(const LyapunovFunctional& V, const Vec& x, const EmpiricalMeasure& mu) {
    const double h = V.fd_step2;
    Vec xp = x;
    double f0 = V.value(xp, mu);
    Mat out(x.size(), x.size());
    for (std::size_t a = 0; a < x.size(); ++a) {
        for (std::size_t b = a; b < x.size(); ++b) {
            double v;
            if (a == b) {
                double orig = xp[a];
                xp[a] = orig + h;
                double fp = V.value(xp, mu);
                xp[a] = orig - h;
                double fm = V.value(xp, mu);
                xp[a] = orig;
                v = (fp - 2.0 * f0 + fm) / (h * h);
            } else {
                double oa = xp[a], ob = xp[b], s = 0.0;
                xp[a] = oa + h; xp[b] = ob + h; s += V.value(xp, mu);
                xp[a] = oa + h; xp[b] = ob - h; s -= V.value(xp, mu);
                xp[a] = oa - h; xp[b] = ob + h; s -= V.value(xp, mu);
                xp[a] = oa - h; xp[b] = ob - h; s += V.value(xp, mu);
                xp[a] = oa; xp[b] = ob;
                v = s / (4.0 * h * h);
            }
            out(a, b) = out(b, a) = v;
        }
    }
    return out;
}

namespace {

// State part b . d_x V + 1/2 tr(sigma sigma^T d_x^2 V) with `state_field`,
// measure part with `measure_field`; either may be the same field. The copy
// expectation is the in-cloud average.
double generator_parts(const LyapunovFunctional& V, const CoefficientField& state_field,
                       const CoefficientField& measure_field, double t, const Vec& x,
                       const EmpiricalMeasure& mu, bool use_analytic) {
    Vec gx = (use_analytic && V.grad_x) ? V.grad_x(x, mu) : grad_x_fd(V, x, mu);
    Mat hx = (use_analytic && V.hess_x) ? V.hess_x(x, mu) : hess_x_fd(V, x, mu);

    double drift_part = dot(state_field.drift(t, x, mu), gx);
    require_finite(drift_part, "drift");
    double diff_part = 0.5 * trace_product(gram(state_field.diffusion(t, x, mu)), hx);
    require_finite(diff_part, "diffusion");

    double measure_part = 0.0;
    for (std::size_t jj = 0; jj < mu.size(); ++jj) {
        const Vec& y = mu.point(jj);
        Vec lio = (use_analytic && V.lions) ? V.lions(x, mu, y) : lions_derivative_fd(V, x, mu, jj);
        Mat lyg =
            (use_analytic && V.lions_ygrad) ? V.lions_ygrad(x, mu, y) : lions_ygrad_fd(V, x, mu, jj);
        measure_part += dot(measure_field.drift(t, y, mu), lio);
        measure_part += 0.5 * trace_product(gram(measure_field.diffusion(t, y, mu)), lyg);
    }
    measure_part /= static_cast<double>(mu.size());
    require_finite(measure_part, "measure");
    return drift_part + diff_part + measure_part;
}

}  // namespace

double generator_L(const LyapunovFunctional& V, const CoefficientField& field, double t,
                   const Vec& x, const EmpiricalMeasure& mu) {
    return generator_parts(V, field, field, t, x, mu, true);
}

double generator_L_fd(const LyapunovFunctional& V, const CoefficientField& field, double t,
                      const Vec& x, const EmpiricalMeasure& mu) {
    return generator_parts(V, field, field, t, x, mu, false);
}

double coupled_generator(const LyapunovFunctional& V, const CoefficientField& field,
                         const CoefficientField& bar_field, double t, const Vec& x_bar,
                         const EmpiricalMeasure& mu) {
    return generator_parts(V, bar_field, field, t, x_bar, mu, true);
}

double coupled_generator_fd(const LyapunovFunctional& V, const CoefficientField& field,
                            const CoefficientField& bar_field, double t, const Vec& x_bar,
                            const EmpiricalMeasure& mu) {
    return generator_parts(V, bar_field, field, t, x_bar, mu, false);
}

TwoPointFunction TwoPointFunction::quadratic() {
    TwoPointFunction f;
    f.value = [](const Vec& u) {
        double s = 0.0;
        for (double c : u) s += c * c;
        return s;
    };
    f.grad = [](const Vec& u) {
        Vec g = u;
        for (double& c : g) c *= 2.0;
        return g;
    };
    f.hess = [](const Vec& u) {
        Mat h(u.size(), u.size());
        for (std::size_t a = 0; a < u.size(); ++a) h(a, a) = 2.0;
        return h;
    };
    f.convex_1d = true;
    return f;
}

TwoPointFunction TwoPointFunction::quartic_over4() {
    TwoPointFunction f;
    f.value = [](const Vec& u) { return 0.25 * u[0] * u[0] * u[0] * u[0]; };
    f.grad = [](const Vec& u) { return Vec{u[0] * u[0] * u[0]}; };
    f.hess = [](const Vec& u) { return Mat::scalar1x1(3.0 * u[0] * u[0]); };
    f.convex_1d = true;
    return f;
}

namespace {

Vec two_point_grad(const TwoPointFunction& V2, const Vec& u, bool analytic) {
    if (analytic && V2.grad) return V2.grad(u);
    const double h = V2.fd_step;
    Vec up = u, out(u.size());
    for (std::size_t a = 0; a < u.size(); ++a) {
        double orig = up[a];
        up[a] = orig + h;
        double fp = V2.value(up);
        up[a] = orig - h;
        double fm = V2.value(up);
        up[a] = orig;
        out[a] = (fp - fm) / (2.0 * h);
    }
    return out;
}

Mat two_point_hess(const TwoPointFunction& V2, const Vec& u, bool analytic) {
    if (analytic && V2.hess) return V2.hess(u);
    const double h = V2.fd_step2;
    Vec up = u;
    double f0 = V2.value(up);
    Mat out(u.size(), u.size());
    for (std::size_t a = 0; a < u.size(); ++a)
        for (std::size_t b = a; b < u.size(); ++b) {
            double v;
            if (a == b) {
                double orig = up[a];
                up[a] = orig + h;
                double fp = V2.value(up);
                up[a] = orig - h;
                double fm = V2.value(up);
                up[a] = orig;
                v = (fp - 2.0 * f0 + fm) / (h * h);
            } else {
                double oa = up[a], ob = up[b], s = 0.0;
                up[a] = oa + h; up[b] = ob + h; s += V2.value(up);
                up[a] = oa + h; up[b] = ob - h; s -= V2.value(up);
                up[a] = oa - h; up[b] = ob + h; s -= V2.value(up);
                up[a] = oa - h; up[b] = ob - h; s += V2.value(up);
                up[a] = oa; up[b] = ob;
                v = s / (4.0 * h * h);
            }
            out(a, b) = out(b, a) = v;
        }
    return out;
}

double two_point_impl(const TwoPointFunction& V2, const CoefficientField& field, double t,
                      const Vec& x, const Vec& y, const EmpiricalMeasure& mu,
                      const EmpiricalMeasure& nu, bool analytic) {
    Vec u(x.size());
    for (std::size_t a = 0; a < x.size(); ++a) u[a] = x[a] - y[a];

    Vec db = field.drift(t, x, mu);
    Vec by = field.drift(t, y, nu);
    for (std::size_t a = 0; a < db.size(); ++a) db[a] -= by[a];

    Mat sx = field.diffusion(t, x, mu);
    Mat sy = field.diffusion(t, y, nu);
    Mat ds = sx;
    for (std::size_t i = 0; i < ds.a.size(); ++i) ds.a[i] -= sy.a[i];

    double v = dot(db, two_point_grad(V2, u, analytic)) +
               0.5 * trace_product(two_point_hess(V2, u, analytic), gram(ds));
    if (!std::isfinite(v)) throw std::invalid_argument("two_point_generator: non-finite value");
    return v;
}

}  // namespace

double two_point_generator(const TwoPointFunction& V2, const CoefficientField& field, double t,
                           const Vec& x, const Vec& y, const EmpiricalMeasure& mu,
                           const EmpiricalMeasure& nu) {
    return two_point_impl(V2, field, t, x, y, mu, nu, true);
}

double two_point_generator_fd(const TwoPointFunction& V2, const CoefficientField& field, double t,
                              const Vec& x, const Vec& y, const EmpiricalMeasure& mu,
                              const EmpiricalMeasure& nu) {
    return two_point_impl(V2, field, t, x, y, mu, nu, false);
}

Certificate Certificate::h2(double lambda, double lambda_tilde) {
    Certificate c;
    c.kind = Kind::H2;
    c.lambda = lambda;
    c.lambda_tilde = lambda_tilde;
    return c;
}

Certificate Certificate::h6(double gamma) {
    Certificate c;
    c.kind = Kind::H6;
    c.gamma = gamma;
    return c;
}

Certificate Certificate::two_point(double gamma, double beta, double gamma_bar, double beta_bar,
                                   bool strict) {
    Certificate c;
    c.kind = Kind::TwoPoint;
    c.gamma = gamma;
    c.beta = beta;
    c.gamma_bar = gamma_bar;
    c.beta_bar = beta_bar;
    c.strict_rates = strict;
    return c;
}

namespace {

Vec sample_point(const NoiseStream& rng, std::uint64_t sample, std::uint64_t& ctr,
                 std::size_t dim, double radius) {
    Vec x(dim);
    for (std::size_t a = 0; a < dim; ++a)
        x[a] = radius * (2.0 * rng.uniform(sample, ctr++, 0) - 1.0);
    return x;
}

EmpiricalMeasure sample_cloud(const NoiseStream& rng, std::uint64_t sample, std::uint64_t& ctr,
                              const CertSampler& s, std::size_t m) {
    std::vector<Vec> pts;
    pts.reserve(m);
    for (std::size_t i = 0; i < m; ++i) pts.push_back(sample_point(rng, sample, ctr, s.dim, s.radius));
    return EmpiricalMeasure(std::move(pts));
}

void record(CertReport& rep, const std::string& which, const Vec& x, const Vec& y,
            double mu_digest, double nu_digest, double lhs, double rhs) {
    double margin = lhs - rhs;
    rep.worst_margin = std::max(rep.worst_margin, margin);
    double tol = 1e-9 * (1.0 + std::abs(lhs) + std::abs(rhs));
    if (margin > tol) rep.violations.push_back({which, x, y, mu_digest, nu_digest, lhs, rhs, margin});
}

}  // namespace

CertReport check_certificate(const CoefficientField& field, const CoefficientField* bar_field,
                             const LyapunovFunctional* V, const TwoPointFunction* V2,
                             const Certificate& cert, const CertSampler& sampler,
                             std::size_t samples) {
    CertReport rep;
    rep.cert = cert;
    rep.samples = samples;
    rep.worst_margin = -std::numeric_limits<double>::infinity();
    NoiseStream rng(sampler.seed);

    const std::size_t span = sampler.max_particles - sampler.min_particles + 1;
    for (std::uint64_t s = 0; s < samples; ++s) {
        std::uint64_t ctr = 0;
        std::size_t m =
            sampler.min_particles +
            static_cast<std::size_t>(rng.uniform(s, ctr++, 1) * static_cast<double>(span)) % span;
        switch (cert.kind) {
            case Certificate::Kind::H2: {
                if (!V) throw std::invalid_argument("check_certificate: H2 needs V");
                Vec x = sample_point(rng, s, ctr, sampler.dim, sampler.radius);
                EmpiricalMeasure mu = sample_cloud(rng, s, ctr, sampler, m);
                double lhs = generator_L(*V, field, 0.0, x, mu);
                double vint = integrate(mu, [&](const Vec& z) { return V->value(z, mu); });
                double rhs = cert.lambda * V->eval(x, mu) + cert.lambda_tilde * vint;
                record(rep, "L", x, {}, second_moment_norm(mu), 0.0, lhs, rhs);
                break;
            }
            case Certificate::Kind::H6: {
                if (!V) throw std::invalid_argument("check_certificate: H6 needs V");
                Vec x = sample_point(rng, s, ctr, sampler.dim, sampler.radius);
                EmpiricalMeasure mu = sample_cloud(rng, s, ctr, sampler, m);
                double lhs = generator_L(*V, field, 0.0, x, mu);
                record(rep, "L", x, {}, second_moment_norm(mu), 0.0, lhs, -cert.gamma);
                break;
            }
            case Certificate::Kind::TwoPoint: {
                if (!V2 || !bar_field)
                    throw std::invalid_argument("check_certificate: TwoPoint needs V2 and bar field");
                Vec x = sample_point(rng, s, ctr, sampler.dim, sampler.radius);
                Vec y = sample_point(rng, s, ctr, sampler.dim, sampler.radius);
                EmpiricalMeasure mu = sample_cloud(rng, s, ctr, sampler, m);
                EmpiricalMeasure nu = sample_cloud(rng, s, ctr, sampler, m);
                CostFunction cost;
                cost.eval = [V2](const Vec& a, const Vec& b) {
                    Vec u(a.size());
                    for (std::size_t c = 0; c < a.size(); ++c) u[c] = a[c] - b[c];
                    return V2->value(u);
                };
                cost.convex_in_difference_1d = V2->convex_1d;
                double wv = quasi_wasserstein(mu, nu, cost);
                Vec u(x.size());
                for (std::size_t c = 0; c < x.size(); ++c) u[c] = x[c] - y[c];
                double v2u = V2->value(u);
                double lhs = two_point_generator(*V2, field, 0.0, x, y, mu, nu);
                record(rep, "L", x, y, second_moment_norm(mu), second_moment_norm(nu), lhs,
                       -cert.gamma * v2u + cert.beta * wv);
                double lhs_bar = two_point_generator(*V2, *bar_field, 0.0, x, y, mu, nu);
                record(rep, "Lbar", x, y, second_moment_norm(mu), second_moment_norm(nu), lhs_bar,
                       -cert.gamma_bar * v2u + cert.beta_bar * wv);
                break;
            }
        }
    }
    rep.passed = rep.violations.empty();
    return rep;
}

std::string CertReport::json() const {
    nlohmann::json j;
    switch (cert.kind) {
        case Certificate::Kind::H2:
            j["kind"] = "H2";
            j["constants"] = {{"lambda", cert.lambda}, {"lambda_tilde", cert.lambda_tilde}};
            break;
        case Certificate::Kind::H6:
            j["kind"] = "H6";
            j["constants"] = {{"gamma", cert.gamma}};
            break;
        case Certificate::Kind::TwoPoint:
            j["kind"] = "TwoPoint";
            j["constants"] = {{"gamma", cert.gamma},
                              {"beta", cert.beta},
                              {"gamma_bar", cert.gamma_bar},
                              {"beta_bar", cert.beta_bar},
                              {"strict_rates", cert.strict_rates}};
            break;
    }
    j["samples"] = samples;
    j["worst_margin"] = worst_margin;
    j["passed"] = passed;
    j["violations"] = nlohmann::json::array();
    for (const auto& v : violations) {
        nlohmann::json jv;
        jv["which"] = v.which;
        jv["x"] = v.x;
        if (!v.y.empty()) jv["y"] = v.y;
        jv["mu_digest"] = v.mu_digest;
        if (v.nu_digest != 0.0) jv["nu_digest"] = v.nu_digest;
        jv["lhs"] = v.lhs;
        jv["rhs"] = v.rhs;
        jv["margin"] = v.margin;
        j["violations"].push_back(jv);
    }
    return j.dump(2);
}

}  // namespace mvlab
