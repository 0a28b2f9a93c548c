#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "mvlab/measures.hpp"
#include "mvlab/rng.hpp"

namespace mvlab {

struct GrowthHint {
    double ell;  // exponent in |b|^{2l} + |sigma|^{2l} <= K (1 + V)
    double K;
};

// Drift b(t, x, mu) and diffusion sigma(t, x, mu) evaluated against an
// empirical measure.
struct CoefficientField {
    std::function<Vec(double, const Vec&, const EmpiricalMeasure&)> drift;
    std::function<Mat(double, const Vec&, const EmpiricalMeasure&)> diffusion;
    std::size_t dim = 1;
    std::size_t noise_dim = 1;
    std::optional<GrowthHint> growth_hint;
    std::optional<double> lipschitz;  // joint (x, W_2) Lipschitz constant, when known

    // 1-d convenience: scalar drift/diffusion of (x, mu).
    static CoefficientField scalar(std::function<double(double, const EmpiricalMeasure&)> b,
                                   std::function<double(double, const EmpiricalMeasure&)> s);
};

struct SimConfig {
    double dt = 1e-3;
    std::size_t steps = 1000;
    std::size_t particles = 10000;
    std::uint64_t seed = 0;
    std::size_t record_every = 1;
    std::size_t workers = 1;

    double horizon() const { return dt * static_cast<double>(steps); }
    void validate() const;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<EmpiricalMeasure> clouds;

    const EmpiricalMeasure& terminal() const { return clouds.back(); }
};

// Pairs (bar cloud of X-bar replicas started at a point, empirical law of
// the X-equation), driven by shared noise index-by-index.
struct CoupledTrajectory {
    std::vector<double> times;
    std::vector<EmpiricalMeasure> bar_clouds;
    std::vector<EmpiricalMeasure> law_clouds;
};

struct StoppedPath {
    static constexpr std::size_t kNever = static_cast<std::size_t>(-1);
    Trajectory path;
    std::vector<std::size_t> tau_index;  // first step with |X| >= n, per particle
};

// One synchronous Euler-Maruyama step: every particle reads the same frozen
// cloud. noise[i] holds the Brownian increments (already scaled by sqrt(dt)
// is NOT assumed: entries are N(0, dt) draws).
EmpiricalMeasure em_step(const EmpiricalMeasure& cloud, const CoefficientField& field, double t,
                         double dt, const std::vector<Vec>& noise, std::size_t workers = 1,
                         std::size_t step_index = 0);

Trajectory simulate(const CoefficientField& field, const EmpiricalMeasure& init,
                    const SimConfig& cfg);

// Coupled system: X-particles evolve under `field` with their own empirical
// law; one X-bar replica per X-particle starts at x0 and evolves under
// `bar_field` reading the X-law, reusing that particle's noise increments.
CoupledTrajectory simulate_coupled(const CoefficientField& field,
                                   const CoefficientField& bar_field, const Vec& x0,
                                   const EmpiricalMeasure& mu0, const SimConfig& cfg);

// b^n(t, x, mu) = b(t, phi_n(x), mu o phi_n), same for sigma.
CoefficientField truncated_field(const CoefficientField& field, TruncationRadius n);

// Stopped construction: run the truncated chain and freeze each particle at
// its first exit from the ball of radius n.
StoppedPath stopped_simulate(const CoefficientField& field, const EmpiricalMeasure& init,
                             const SimConfig& cfg, TruncationRadius n);

// Per-(seed, particle, step) Brownian increments N(0, dt) for one step.
std::vector<Vec> step_noise(const NoiseStream& stream, std::size_t particles,
                            std::size_t noise_dim, std::size_t step, double dt);

// One Euler-Maruyama update of a single point against a given law.
Vec euler_point(const CoefficientField& field, double t, double dt, const Vec& x,
                const EmpiricalMeasure& law, const Vec& dw);

namespace detail {
// Runs fn(i) for i in [0, count); identical results for any worker count as
// long as fn writes only to slot i.
void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t)>& fn);
}  // namespace detail

}  // namespace mvlab
