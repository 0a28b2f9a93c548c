#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "mvlab/dynamics.hpp"
#include "mvlab/lyapunov.hpp"

namespace mvlab {

// Scalar observable on the lifted state space (point, law).
using StateFunctional = std::function<double(const Vec&, const EmpiricalMeasure&)>;

struct SemigroupEstimate {
    double t = 0.0;
    double value = 0.0;
    double std_error = 0.0;
    std::size_t replicas = 0;
};

// P_t f(x, mu) = E f(Xbar_t, law of X_t): evolve the law cloud once, evolve
// independent Xbar replicas from x against that law path, average f at the
// terminal pair. replicas = 0 means cfg.particles.
SemigroupEstimate estimate_Ptf(const StateFunctional& f, const CoefficientField& field,
                               const CoefficientField& bar_field, const Vec& x,
                               const EmpiricalMeasure& mu, double t, const SimConfig& cfg,
                               std::size_t replicas = 0);

struct SemigroupReport {
    SemigroupEstimate direct;  // P_{s+t} f in one stage
    SemigroupEstimate nested;  // E[(P_s f)(Xbar_t, law_t)] by nested Monte Carlo
    double difference = 0.0;
    double combined_std_error = 0.0;
    std::size_t batches = 0;
    bool ok = false;
};

// Semigroup identity check: both estimates repeated over independent batches;
// the reported std error is that of the batch-mean difference, so it covers
// law-path noise as well as replica noise.
SemigroupReport check_semigroup(const StateFunctional& f, const CoefficientField& field,
                                const CoefficientField& bar_field, const Vec& x,
                                const EmpiricalMeasure& mu, double s, double t,
                                const SimConfig& cfg, std::size_t inner_replicas = 64,
                                std::size_t batches = 8);

struct ResidualEntry {
    double t0 = 0.0, t1 = 0.0;
    double increment = 0.0;           // E f(t1) - E f(t0)
    double generator_integral = 0.0;  // trapezoid of E[(L1bar + L2) f]
    double residual = 0.0;
    double std_error = 0.0;
    bool ok = false;
};

struct ResidualReport {
    std::vector<ResidualEntry> entries;
    bool ok = false;
};

// Weak-form Fokker-Planck check for the coupled system along a time grid.
ResidualReport fokker_planck_residual(const LyapunovFunctional& f, const CoefficientField& field,
                                      const CoefficientField& bar_field, const Vec& x,
                                      const EmpiricalMeasure& mu, const std::vector<double>& grid,
                                      const SimConfig& cfg, std::size_t gen_subsample = 256);

struct ItoBalanceReport {
    double ev_start = 0.0, ev_end = 0.0;
    double generator_integral = 0.0;
    double residual = 0.0;
    double std_error = 0.0;  // realized quadratic variation of the interval residuals
    std::size_t intervals = 0;
    bool ok = false;
};

// Ito balance for the particle system: E V(X_T, mu_T) - E V(X_0, mu_0)
// against the trapezoid integral of E LV along the recorded grid. The
// residual telescopes into per-interval martingale increments; the std
// error is the square root of their realized quadratic variation, which
// covers the common-mode measure-term martingale that a cross-particle
// spread cannot see. Generator expectations use a stride subsample of the
// particles; that subsampling noise also lands in the increments.
ItoBalanceReport ito_balance(const LyapunovFunctional& V, const CoefficientField& field,
                             const EmpiricalMeasure& init, const SimConfig& cfg,
                             std::size_t gen_subsample = 1024);

struct FellerEntry {
    double w2_sq = 0.0;      // W_2(mu_n, mu)^2 at time 0
    double moment_sq = 0.0;  // E|X_t^{mu_n} - X_t^{mu}|^2 under shared noise
    double bound = 0.0;      // e^{C t} w2_sq
    double ratio = 0.0;      // moment_sq / w2_sq (0/0 reported as 0)
    bool ok = false;
};

struct FellerReport {
    double C = 0.0;
    double t = 0.0;
    std::vector<FellerEntry> entries;
    bool ok = false;
};

// Squared-moment Feller modulus: optimally coupled initial pairs, shared
// noise, C = 4L + 4L^2 from the field's Lipschitz constant.
FellerReport feller_modulus(const CoefficientField& field,
                            const std::vector<EmpiricalMeasure>& mu_sequence,
                            const EmpiricalMeasure& mu_limit, double t, const SimConfig& cfg);

struct InvariantEstimate {
    EmpiricalMeasure cloud;
    double stationarity_gap = 0.0;  // W_2(estimate, estimate evolved a further delta)
    double burn_in = 0.0;
    double horizon = 0.0;
    bool cesaro = false;
};

// Krylov-Bogolioubov style estimate: Cesaro-pool the post-burn-in clouds
// (stride-subsampled back to the configured size), or take the terminal
// cloud when cesaro is off.
InvariantEstimate estimate_invariant(const CoefficientField& field, const EmpiricalMeasure& init,
                                     const SimConfig& cfg, double burn_in, bool cesaro);

struct DecayFit {
    double rate = 0.0;       // negated slope of the log-linear fit
    double intercept = 0.0;  // log value at t = 0
    double r2 = 0.0;
    std::size_t points = 0;
};

// Least-squares line on (t, log value); values must be positive, >= 3 points.
DecayFit fit_decay(const std::vector<std::pair<double, double>>& series);

struct DecayExperiment {
    std::vector<std::pair<double, double>> series;  // full (t, E V) record
    DecayFit fit;                                   // over the window only
    double window_start = 0.0, window_end = 0.0;
};

// Simulates the field from init, records E V(X_t, mu_t), and fits the decay
// rate over [start_frac, end_frac] of the horizon. The leading cut drops the
// discretization transient; the trailing cut drops the heavy-tailed late
// segment where the empirical mean of V under-samples its own expectation.
DecayExperiment decay_experiment(const LyapunovFunctional& V, const CoefficientField& field,
                                 const EmpiricalMeasure& init, const SimConfig& cfg,
                                 double start_frac = 0.1, double end_frac = 0.6);

struct ContractionEntry {
    double t = 0.0;
    double ev2 = 0.0;      // E V2(Xbar_t - Ybar_t)
    double ev2_se = 0.0;
    double ev2_bound = 0.0;
    double wv = 0.0;       // W_V(mu_t, nu_t)
    double wv_bound = 0.0;
    bool ok = false;
};

struct ContractionReport {
    std::vector<ContractionEntry> entries;
    std::optional<double> first_violation_time;
    bool ok = false;
};

// Two coupled systems from (x, mu) and (y, nu) under shared noise; each
// recorded point is checked against the two-point contraction bound with the
// certificate constants (t e^{-gamma_bar t} branch when gamma_bar + beta -
// gamma vanishes).
ContractionReport contraction_experiment(const CoefficientField& field,
                                         const CoefficientField& bar_field,
                                         const TwoPointFunction& V2, const Vec& x,
                                         const EmpiricalMeasure& mu, const Vec& y,
                                         const EmpiricalMeasure& nu, const Certificate& cert,
                                         const SimConfig& cfg);

}  // namespace mvlab
