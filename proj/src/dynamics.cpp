#include "mvlab/dynamics.hpp"

#include <cmath>
#include <memory>
#include <mutex>
#include <optional>
#include <thread>

namespace mvlab {

CoefficientField CoefficientField::scalar(
    std::function<double(double, const EmpiricalMeasure&)> b,
    std::function<double(double, const EmpiricalMeasure&)> s) {
    CoefficientField f;
    f.dim = 1;
    f.noise_dim = 1;
    f.drift = [b = std::move(b)](double, const Vec& x, const EmpiricalMeasure& mu) {
        return Vec{b(x[0], mu)};
    };
    f.diffusion = [s = std::move(s)](double, const Vec& x, const EmpiricalMeasure& mu) {
        return Mat::scalar1x1(s(x[0], mu));
    };
    return f;
}

void SimConfig::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("SimConfig: dt must be positive");
    if (steps == 0) throw std::invalid_argument("SimConfig: steps must be positive");
    if (particles == 0) throw std::invalid_argument("SimConfig: particles must be positive");
    if (record_every == 0) throw std::invalid_argument("SimConfig: record_every must be positive");
}

std::vector<Vec> step_noise(const NoiseStream& stream, std::size_t particles,
                            std::size_t noise_dim, std::size_t step, double dt) {
    std::vector<Vec> noise(particles, Vec(noise_dim));
    double s = std::sqrt(dt);
    for (std::size_t i = 0; i < particles; ++i)
        for (std::size_t k = 0; k < noise_dim; ++k)
            noise[i][k] = s * stream.normal(i, step, k);
    return noise;
}

namespace detail {

// The work per index is independent; output slots are disjoint by index, so
// the result is identical for any worker count.
void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t)>& fn) {
    if (workers <= 1 || count < 2 * workers) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> threads;
    std::size_t chunk = (count + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        std::size_t lo = w * chunk;
        std::size_t hi = std::min(count, lo + chunk);
        if (lo >= hi) break;
        threads.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : threads) t.join();
}

}  // namespace detail

using detail::parallel_for;

Vec euler_point(const CoefficientField& field, double t, double dt, const Vec& x,
                const EmpiricalMeasure& law, const Vec& dw) {
    Vec b = field.drift(t, x, law);
    Mat s = field.diffusion(t, x, law);
    Vec y = x;
    for (std::size_t k = 0; k < y.size(); ++k) {
        double inc = b[k] * dt;
        for (std::size_t c = 0; c < s.cols; ++c) inc += s(k, c) * dw[c];
        y[k] += inc;
    }
    return y;
}

EmpiricalMeasure em_step(const EmpiricalMeasure& cloud, const CoefficientField& field, double t,
                         double dt, const std::vector<Vec>& noise, std::size_t workers,
                         std::size_t step_index) {
    if (noise.size() != cloud.size())
        throw std::invalid_argument("em_step: one noise vector per particle required");
    std::vector<Vec> next(cloud.size());
    parallel_for(cloud.size(), workers, [&](std::size_t i) {
        next[i] = euler_point(field, t, dt, cloud.point(i), cloud, noise[i]);
    });
    for (std::size_t i = 0; i < next.size(); ++i)
        if (!is_finite(next[i]))
            throw BlowupError(i, step_index,
                              "em_step: non-finite state for particle " + std::to_string(i) +
                                  " at step " + std::to_string(step_index));
    return EmpiricalMeasure(std::move(next));
}

Trajectory simulate(const CoefficientField& field, const EmpiricalMeasure& init,
                    const SimConfig& cfg) {
    cfg.validate();
    if (init.size() != cfg.particles)
        throw std::invalid_argument("simulate: init cloud size must equal cfg.particles");
    NoiseStream stream(cfg.seed);
    Trajectory traj;
    traj.times.push_back(0.0);
    traj.clouds.push_back(init);
    EmpiricalMeasure cloud = init;
    for (std::size_t k = 0; k < cfg.steps; ++k) {
        double t = cfg.dt * static_cast<double>(k);
        auto noise = step_noise(stream, cfg.particles, field.noise_dim, k, cfg.dt);
        cloud = em_step(cloud, field, t, cfg.dt, noise, cfg.workers, k);
        if ((k + 1) % cfg.record_every == 0 || k + 1 == cfg.steps) {
            traj.times.push_back(cfg.dt * static_cast<double>(k + 1));
            traj.clouds.push_back(cloud);
        }
    }
    return traj;
}

CoupledTrajectory simulate_coupled(const CoefficientField& field,
                                   const CoefficientField& bar_field, const Vec& x0,
                                   const EmpiricalMeasure& mu0, const SimConfig& cfg) {
    cfg.validate();
    if (field.noise_dim != bar_field.noise_dim)
        throw std::invalid_argument("simulate_coupled: fields must share noise_dim");
    if (mu0.size() != cfg.particles)
        throw std::invalid_argument("simulate_coupled: mu0 size must equal cfg.particles");
    if (x0.size() != bar_field.dim)
        throw std::invalid_argument("simulate_coupled: x0 dimension mismatch");
    NoiseStream stream(cfg.seed);
    EmpiricalMeasure law = mu0;
    EmpiricalMeasure bar = EmpiricalMeasure::dirac(x0, cfg.particles);
    CoupledTrajectory traj;
    traj.times.push_back(0.0);
    traj.bar_clouds.push_back(bar);
    traj.law_clouds.push_back(law);
    for (std::size_t k = 0; k < cfg.steps; ++k) {
        double t = cfg.dt * static_cast<double>(k);
        auto noise = step_noise(stream, cfg.particles, field.noise_dim, k, cfg.dt);
        // Bar replicas read the X-law frozen at step start, with the same
        // increment as their X-particle.
        std::vector<Vec> bar_next(cfg.particles);
        parallel_for(cfg.particles, cfg.workers, [&](std::size_t i) {
            bar_next[i] = euler_point(bar_field, t, cfg.dt, bar.point(i), law, noise[i]);
        });
        for (std::size_t i = 0; i < bar_next.size(); ++i)
            if (!is_finite(bar_next[i]))
                throw BlowupError(i, k, "simulate_coupled: non-finite bar state for particle " +
                                            std::to_string(i) + " at step " + std::to_string(k));
        law = em_step(law, field, t, cfg.dt, noise, cfg.workers, k);
        bar = EmpiricalMeasure(std::move(bar_next));
        if ((k + 1) % cfg.record_every == 0 || k + 1 == cfg.steps) {
            traj.times.push_back(cfg.dt * static_cast<double>(k + 1));
            traj.bar_clouds.push_back(bar);
            traj.law_clouds.push_back(law);
        }
    }
    return traj;
}

namespace {

// Memoizes the phi_n pushforward of the most recent cloud so per-particle
// coefficient calls against a shared frozen cloud stay O(1). Holding the
// source measure keeps its storage alive, so the address key cannot alias.
struct TruncPushCache {
    std::mutex mutex;
    std::optional<EmpiricalMeasure> source, image;
};

EmpiricalMeasure cached_pushforward(const std::shared_ptr<TruncPushCache>& cache,
                                    const EmpiricalMeasure& mu, TruncationRadius n) {
    std::lock_guard<std::mutex> lock(cache->mutex);
    if (!cache->source || &cache->source->points() != &mu.points()) {
        cache->image = pushforward_truncate(mu, n);
        cache->source = mu;
    }
    return *cache->image;
}

}  // namespace

CoefficientField truncated_field(const CoefficientField& field, TruncationRadius n) {
    CoefficientField out;
    out.dim = field.dim;
    out.noise_dim = field.noise_dim;
    out.growth_hint = field.growth_hint;
    out.lipschitz = field.lipschitz;
    auto cache = std::make_shared<TruncPushCache>();
    out.drift = [drift = field.drift, n, cache](double t, const Vec& x,
                                                const EmpiricalMeasure& mu) {
        return drift(t, truncate_point(x, n), cached_pushforward(cache, mu, n));
    };
    out.diffusion = [diff = field.diffusion, n, cache](double t, const Vec& x,
                                                       const EmpiricalMeasure& mu) {
        return diff(t, truncate_point(x, n), cached_pushforward(cache, mu, n));
    };
    return out;
}

StoppedPath stopped_simulate(const CoefficientField& field, const EmpiricalMeasure& init,
                             const SimConfig& cfg, TruncationRadius n) {
    cfg.validate();
    if (init.size() != cfg.particles)
        throw std::invalid_argument("stopped_simulate: init cloud size must equal cfg.particles");
    NoiseStream stream(cfg.seed);
    StoppedPath out;
    out.tau_index.assign(cfg.particles, StoppedPath::kNever);
    for (std::size_t i = 0; i < cfg.particles; ++i)
        if (norm2(init.point(i)) >= n.n) out.tau_index[i] = 0;

    // Internal chain: the truncated equation, stepped with the truncation
    // applied inline. The recorded path is the chain frozen at each
    // particle's first exit.
    EmpiricalMeasure chain = init;
    std::vector<Vec> frozen(cfg.particles);
    for (std::size_t i = 0; i < cfg.particles; ++i)
        frozen[i] = (out.tau_index[i] == 0) ? init.point(i) : Vec{};

    auto record_cloud = [&](const EmpiricalMeasure& c) {
        std::vector<Vec> pts(cfg.particles);
        for (std::size_t i = 0; i < cfg.particles; ++i)
            pts[i] = (out.tau_index[i] != StoppedPath::kNever) ? frozen[i] : c.point(i);
        return EmpiricalMeasure(std::move(pts));
    };

    out.path.times.push_back(0.0);
    out.path.clouds.push_back(record_cloud(chain));
    for (std::size_t k = 0; k < cfg.steps; ++k) {
        double t = cfg.dt * static_cast<double>(k);
        auto noise = step_noise(stream, cfg.particles, field.noise_dim, k, cfg.dt);
        EmpiricalMeasure law = pushforward_truncate(chain, n);
        std::vector<Vec> next(cfg.particles);
        parallel_for(cfg.particles, cfg.workers, [&](std::size_t i) {
            // Coefficients read the truncated state; the increment applies
            // to the untruncated chain, matching the truncated equation.
            const Vec& x = chain.point(i);
            Vec xt = truncate_point(x, n);
            Vec b = field.drift(t, xt, law);
            Mat s = field.diffusion(t, xt, law);
            Vec y = x;
            for (std::size_t c = 0; c < y.size(); ++c) {
                double inc = b[c] * cfg.dt;
                for (std::size_t w = 0; w < s.cols; ++w) inc += s(c, w) * noise[i][w];
                y[c] += inc;
            }
            next[i] = std::move(y);
        });
        for (std::size_t i = 0; i < next.size(); ++i)
            if (!is_finite(next[i]))
                throw BlowupError(i, k, "stopped_simulate: non-finite state for particle " +
                                            std::to_string(i) + " at step " + std::to_string(k));
        chain = EmpiricalMeasure(std::move(next));
        for (std::size_t i = 0; i < cfg.particles; ++i) {
            if (out.tau_index[i] == StoppedPath::kNever && norm2(chain.point(i)) >= n.n) {
                out.tau_index[i] = k + 1;
                frozen[i] = chain.point(i);
            }
        }
        if ((k + 1) % cfg.record_every == 0 || k + 1 == cfg.steps) {
            out.path.times.push_back(cfg.dt * static_cast<double>(k + 1));
            out.path.clouds.push_back(record_cloud(chain));
        }
    }
    return out;
}

}  // namespace mvlab
