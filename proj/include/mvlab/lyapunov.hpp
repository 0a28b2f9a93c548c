#pragma once

#include <functional>
#include <string>

#include "mvlab/dynamics.hpp"
#include "mvlab/measures.hpp"

namespace mvlab {

// V(x, mu) with its state derivatives and Lions derivative. Any derivative
// slot may be left empty; evaluation then falls back to finite differences
// on the empirical lift.
struct LyapunovFunctional {
    std::function<double(const Vec&, const EmpiricalMeasure&)> value;
    std::function<Vec(const Vec&, const EmpiricalMeasure&)> grad_x;
    std::function<Mat(const Vec&, const EmpiricalMeasure&)> hess_x;
    // lions(x, mu, y) = d_mu V(x, mu)(y); lions_ygrad is its derivative in y.
    std::function<Vec(const Vec&, const EmpiricalMeasure&, const Vec&)> lions;
    std::function<Mat(const Vec&, const EmpiricalMeasure&, const Vec&)> lions_ygrad;
    double fd_step = 1e-5;    // first-order central differences
    double fd_step2 = 1e-4;   // second-order stencils

    double eval(const Vec& x, const EmpiricalMeasure& mu) const;
};

// d_mu V(x, mu)(y_j) on the empirical lift: M times the central-difference
// gradient of y_j -> V(x, mu) with the j-th point perturbed.
Vec lions_derivative_fd(const LyapunovFunctional& V, const Vec& x, const EmpiricalMeasure& mu,
                        std::size_t j);

// d_y d_mu V(x, mu)(y_j) by the duplicated-cloud stencil: represent mu with
// every point doubled (same measure), then
//   d_y d_mu V(y_j) = 2M (d^2_{jj} lift - d^2_{jj'} lift)
// where j' is the twin slot of j. Exact for smooth V at finite M, up to the
// h^2 stencil error.
Mat lions_ygrad_fd(const LyapunovFunctional& V, const Vec& x, const EmpiricalMeasure& mu,
                   std::size_t j);

Vec grad_x_fd(const LyapunovFunctional& V, const Vec& x, const EmpiricalMeasure& mu);
Mat hess_x_fd(const LyapunovFunctional& V, const Vec& x, const EmpiricalMeasure& mu);

// Generator of the McKean-Vlasov equation:
//   LV = b . d_x V + 1/2 tr(sigma sigma^T d_x^2 V)
//        + E~[ b~ . d_mu V + 1/2 tr(sigma~ sigma~^T d_y d_mu V) ]
// with the copy expectation realized as the average over the cloud.
double generator_L(const LyapunovFunctional& V, const CoefficientField& field, double t,
                   const Vec& x, const EmpiricalMeasure& mu);

// Same value computed with finite differences throughout, ignoring any
// analytic derivative slots. Oracle path for cross-checks.
double generator_L_fd(const LyapunovFunctional& V, const CoefficientField& field, double t,
                      const Vec& x, const EmpiricalMeasure& mu);

// Coupled generator L1bar + L2: bar coefficients act on the state slot,
// unbarred coefficients inside the measure expectation.
double coupled_generator(const LyapunovFunctional& V, const CoefficientField& field,
                         const CoefficientField& bar_field, double t, const Vec& x_bar,
                         const EmpiricalMeasure& mu);
double coupled_generator_fd(const LyapunovFunctional& V, const CoefficientField& field,
                            const CoefficientField& bar_field, double t, const Vec& x_bar,
                            const EmpiricalMeasure& mu);

// Scalar function of a state difference, used by the two-point generator
// and as a transport cost.
struct TwoPointFunction {
    std::function<double(const Vec&)> value;
    std::function<Vec(const Vec&)> grad;
    std::function<Mat(const Vec&)> hess;
    bool convex_1d = false;
    double fd_step = 1e-5;
    double fd_step2 = 1e-4;

    static TwoPointFunction quadratic();      // |u|^2
    static TwoPointFunction quartic_over4();  // 1/4 |u|^4 (1-d)
};

// (L V)(x, y, mu, nu) = (b(x,mu) - b(y,nu)) . dV(x-y)
//                       + 1/2 tr(d^2 V(x-y) A),
// A = (sigma(x,mu) - sigma(y,nu)) (sigma(x,mu) - sigma(y,nu))^T.
double two_point_generator(const TwoPointFunction& V2, const CoefficientField& field, double t,
                           const Vec& x, const Vec& y, const EmpiricalMeasure& mu,
                           const EmpiricalMeasure& nu);
double two_point_generator_fd(const TwoPointFunction& V2, const CoefficientField& field, double t,
                              const Vec& x, const Vec& y, const EmpiricalMeasure& mu,
                              const EmpiricalMeasure& nu);

struct Certificate {
    enum class Kind { H2, H6, TwoPoint };
    Kind kind = Kind::H2;
    double lambda = 0.0, lambda_tilde = 0.0;              // H2
    double gamma = 0.0;                                   // H6 and TwoPoint
    double beta = 0.0, gamma_bar = 0.0, beta_bar = 0.0;   // TwoPoint
    bool strict_rates = true;  // whether gamma > beta etc. hold strictly

    static Certificate h2(double lambda, double lambda_tilde);
    static Certificate h6(double gamma);
    static Certificate two_point(double gamma, double beta, double gamma_bar, double beta_bar,
                                 bool strict);
};

struct CertSampler {
    std::size_t dim = 1;
    std::size_t min_particles = 1;
    std::size_t max_particles = 64;
    double radius = 2.0;
    std::uint64_t seed = 0;
};

struct CertViolation {
    std::string which;  // "L" for the X-inequality, "Lbar" for the bar one
    Vec x, y;
    double mu_digest = 0.0, nu_digest = 0.0;  // |mu|_2 digests
    double lhs = 0.0, rhs = 0.0, margin = 0.0;
};

struct CertReport {
    Certificate cert;
    std::size_t samples = 0;
    std::vector<CertViolation> violations;
    double worst_margin = 0.0;  // max lhs - rhs over all samples
    bool passed = false;

    std::string json() const;
};

// Samples (x, mu) (or (x, y, mu, nu) for two-point certificates) and checks
// the certificate inequality pointwise. Violations are reported, not thrown.
CertReport check_certificate(const CoefficientField& field, const CoefficientField* bar_field,
                             const LyapunovFunctional* V, const TwoPointFunction* V2,
                             const Certificate& cert, const CertSampler& sampler,
                             std::size_t samples);

}  // namespace mvlab
