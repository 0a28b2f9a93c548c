#include "mvlab/ergodicity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mvlab/transport.hpp"

namespace mvlab {

namespace {

struct Grid {
    std::size_t steps;
    double dt;
};

Grid grid_for(double t, double dt_hint) {
    if (!(t > 0.0)) throw std::invalid_argument("time horizon must be positive");
    auto steps = static_cast<std::size_t>(std::llround(t / dt_hint));
    if (steps == 0) steps = 1;
    return {steps, t / static_cast<double>(steps)};
}

EmpiricalMeasure tile_cloud(const EmpiricalMeasure& mu, std::size_t m) {
    if (mu.size() == m) return mu;
    std::vector<Vec> pts;
    pts.reserve(m);
    for (std::size_t i = 0; i < m; ++i) pts.push_back(mu.point(i % mu.size()));
    return EmpiricalMeasure(std::move(pts));
}

std::pair<double, double> mean_se(const std::vector<double>& v) {
    double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    if (v.size() < 2) return {m, 0.0};
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    double var = ss / static_cast<double>(v.size() - 1);
    return {m, std::sqrt(var / static_cast<double>(v.size()))};
}

// Law path under its own empirical dynamics; path[k] is the cloud after k
// steps.
std::vector<EmpiricalMeasure> law_path(const CoefficientField& field,
                                       const EmpiricalMeasure& init, std::size_t steps, double dt,
                                       const NoiseStream& stream, std::size_t workers) {
    std::vector<EmpiricalMeasure> path;
    path.reserve(steps + 1);
    path.push_back(init);
    EmpiricalMeasure cloud = init;
    for (std::size_t k = 0; k < steps; ++k) {
        auto noise = step_noise(stream, cloud.size(), field.noise_dim, k, dt);
        cloud = em_step(cloud, field, dt * static_cast<double>(k), dt, noise, workers, k);
        path.push_back(cloud);
    }
    return path;
}

// Replicas started at `starts` evolve against the frozen law path with
// per-replica counter-based noise.
std::vector<Vec> evolve_replicas(const CoefficientField& bar_field, const std::vector<Vec>& starts,
                                 const std::vector<EmpiricalMeasure>& law, double dt,
                                 const NoiseStream& stream, std::size_t workers) {
    std::size_t steps = law.size() - 1;
    std::vector<Vec> state = starts;
    for (std::size_t k = 0; k < steps; ++k) {
        auto noise = step_noise(stream, state.size(), bar_field.noise_dim, k, dt);
        double t = dt * static_cast<double>(k);
        std::vector<Vec> next(state.size());
        detail::parallel_for(state.size(), workers, [&](std::size_t i) {
            next[i] = euler_point(bar_field, t, dt, state[i], law[k], noise[i]);
        });
        for (std::size_t i = 0; i < next.size(); ++i)
            if (!is_finite(next[i]))
                throw BlowupError(i, k, "evolve_replicas: non-finite state for replica " +
                                            std::to_string(i) + " at step " + std::to_string(k));
        state = std::move(next);
    }
    return state;
}

}  // namespace

SemigroupEstimate estimate_Ptf(const StateFunctional& f, const CoefficientField& field,
                               const CoefficientField& bar_field, const Vec& x,
                               const EmpiricalMeasure& mu, double t, const SimConfig& cfg,
                               std::size_t replicas) {
    cfg.validate();
    std::size_t r = replicas ? replicas : cfg.particles;
    if (t == 0.0) return {0.0, f(x, mu), 0.0, r};
    Grid g = grid_for(t, cfg.dt);
    NoiseStream stream(cfg.seed);
    auto law = law_path(field, tile_cloud(mu, cfg.particles), g.steps, g.dt, stream.substream(1),
                        cfg.workers);
    auto ends = evolve_replicas(bar_field, std::vector<Vec>(r, x), law, g.dt, stream.substream(2),
                                cfg.workers);
    std::vector<double> vals(r);
    for (std::size_t i = 0; i < r; ++i) vals[i] = f(ends[i], law.back());
    auto [m, se] = mean_se(vals);
    return {t, m, se, r};
}

SemigroupReport check_semigroup(const StateFunctional& f, const CoefficientField& field,
                                const CoefficientField& bar_field, const Vec& x,
                                const EmpiricalMeasure& mu, double s, double t,
                                const SimConfig& cfg, std::size_t inner_replicas,
                                std::size_t batches) {
    cfg.validate();
    if (batches < 2) throw std::invalid_argument("check_semigroup: need at least 2 batches");
    NoiseStream root(cfg.seed);
    std::vector<double> direct_vals, nested_vals, diffs;
    for (std::size_t b = 0; b < batches; ++b) {
        SimConfig bcfg = cfg;
        bcfg.seed = root.substream(100 + b).seed();
        // Direct single-stage estimate of P_{s+t} f.
        SemigroupEstimate direct = estimate_Ptf(f, field, bar_field, x, mu, s + t, bcfg);

        // Two-stage estimate: realized pairs at time t, then inner P_s f.
        NoiseStream stream(bcfg.seed);
        EmpiricalMeasure law_t = tile_cloud(mu, bcfg.particles);
        std::vector<Vec> bars(bcfg.particles, x);
        if (t > 0.0) {
            Grid gt = grid_for(t, bcfg.dt);
            auto law = law_path(field, law_t, gt.steps, gt.dt, stream.substream(11), bcfg.workers);
            bars = evolve_replicas(bar_field, bars, law, gt.dt, stream.substream(12), bcfg.workers);
            law_t = law.back();
        }
        double nested;
        if (s == 0.0) {
            std::vector<double> vals(bars.size());
            for (std::size_t i = 0; i < bars.size(); ++i) vals[i] = f(bars[i], law_t);
            nested = mean_se(vals).first;
        } else {
            Grid gs = grid_for(s, bcfg.dt);
            auto law2 =
                law_path(field, law_t, gs.steps, gs.dt, stream.substream(13), bcfg.workers);
            std::size_t outer = std::min<std::size_t>(bars.size(), 256);
            std::vector<double> inner_means(outer);
            for (std::size_t j = 0; j < outer; ++j) {
                std::size_t idx = j * bars.size() / outer;
                auto ends = evolve_replicas(bar_field,
                                            std::vector<Vec>(inner_replicas, bars[idx]), law2,
                                            gs.dt, stream.substream(1000 + j), bcfg.workers);
                double acc = 0.0;
                for (const Vec& e : ends) acc += f(e, law2.back());
                inner_means[j] = acc / static_cast<double>(inner_replicas);
            }
            nested = mean_se(inner_means).first;
        }
        direct_vals.push_back(direct.value);
        nested_vals.push_back(nested);
        diffs.push_back(direct.value - nested);
    }
    SemigroupReport rep;
    auto [dm, dse] = mean_se(direct_vals);
    auto [nm, nse] = mean_se(nested_vals);
    auto [diff_m, diff_se] = mean_se(diffs);
    rep.direct = {s + t, dm, dse, cfg.particles * batches};
    rep.nested = {s + t, nm, nse, cfg.particles * batches};
    rep.difference = diff_m;
    rep.combined_std_error = diff_se;
    rep.batches = batches;
    rep.ok = std::abs(diff_m) <= 3.0 * diff_se + 1e-12;
    return rep;
}

ResidualReport fokker_planck_residual(const LyapunovFunctional& f, const CoefficientField& field,
                                      const CoefficientField& bar_field, const Vec& x,
                                      const EmpiricalMeasure& mu, const std::vector<double>& grid,
                                      const SimConfig& cfg, std::size_t gen_subsample) {
    cfg.validate();
    if (grid.size() < 2 || grid.front() != 0.0 || !std::is_sorted(grid.begin(), grid.end()))
        throw std::invalid_argument("fokker_planck_residual: grid must be sorted and start at 0");
    SimConfig run = cfg;
    run.steps = grid_for(grid.back(), cfg.dt).steps;
    CoupledTrajectory traj =
        simulate_coupled(field, bar_field, x, tile_cloud(mu, cfg.particles), run);

    // Locate each grid time among the recorded ones.
    std::vector<std::size_t> at;
    for (double tg : grid) {
        auto it = std::min_element(traj.times.begin(), traj.times.end(), [&](double a, double b) {
            return std::abs(a - tg) < std::abs(b - tg);
        });
        if (std::abs(*it - tg) > 0.5 * cfg.dt + 1e-12)
            throw std::invalid_argument("fokker_planck_residual: grid time not recorded");
        at.push_back(static_cast<std::size_t>(it - traj.times.begin()));
    }

    std::size_t m = cfg.particles;
    std::size_t sub = std::min(gen_subsample, m);
    std::vector<std::size_t> idx(sub);
    for (std::size_t j = 0; j < sub; ++j) idx[j] = j * m / sub;

    // Per-subsampled-replica f values and generator values at each grid time.
    std::vector<std::vector<double>> fv(grid.size(), std::vector<double>(sub));
    std::vector<std::vector<double>> gv(grid.size(), std::vector<double>(sub));
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const EmpiricalMeasure& bars = traj.bar_clouds[at[k]];
        const EmpiricalMeasure& law = traj.law_clouds[at[k]];
        double tk = traj.times[at[k]];
        detail::parallel_for(sub, cfg.workers, [&](std::size_t j) {
            fv[k][j] = f.value(bars.point(idx[j]), law);
            gv[k][j] = coupled_generator(f, field, bar_field, tk, bars.point(idx[j]), law);
        });
    }

    ResidualReport rep;
    rep.ok = true;
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        double d = traj.times[at[k + 1]] - traj.times[at[k]];
        std::vector<double> r(sub);
        for (std::size_t j = 0; j < sub; ++j)
            r[j] = (fv[k + 1][j] - fv[k][j]) - 0.5 * d * (gv[k][j] + gv[k + 1][j]);
        auto [rm, rse] = mean_se(r);
        ResidualEntry e;
        e.t0 = traj.times[at[k]];
        e.t1 = traj.times[at[k + 1]];
        e.increment = mean_se(fv[k + 1]).first - mean_se(fv[k]).first;
        e.generator_integral = 0.5 * d * (mean_se(gv[k]).first + mean_se(gv[k + 1]).first);
        e.residual = rm;
        e.std_error = rse;
        e.ok = std::abs(rm) <= 3.0 * rse + 1e-12;
        rep.ok = rep.ok && e.ok;
        rep.entries.push_back(e);
    }
    return rep;
}

ItoBalanceReport ito_balance(const LyapunovFunctional& V, const CoefficientField& field,
                             const EmpiricalMeasure& init, const SimConfig& cfg,
                             std::size_t gen_subsample) {
    cfg.validate();
    Trajectory traj = simulate(field, tile_cloud(init, cfg.particles), cfg);
    std::size_t m = cfg.particles;
    std::size_t sub = std::min(gen_subsample, m);
    std::vector<std::size_t> idx(sub);
    for (std::size_t j = 0; j < sub; ++j) idx[j] = j * m / sub;

    std::size_t nt = traj.times.size();
    std::vector<std::vector<double>> gv(nt, std::vector<double>(sub));
    for (std::size_t k = 0; k < nt; ++k) {
        const EmpiricalMeasure& cloud = traj.clouds[k];
        detail::parallel_for(sub, cfg.workers, [&](std::size_t j) {
            gv[k][j] = generator_L(V, field, traj.times[k], cloud.point(idx[j]), cloud);
        });
    }

    // Full-cloud E V at each recorded time; subsampled E LV.
    std::vector<double> ev(nt), eg(nt);
    for (std::size_t k = 0; k < nt; ++k) {
        ev[k] = integrate(traj.clouds[k], [&](const Vec& p) { return V.value(p, traj.clouds[k]); });
        eg[k] = mean_se(gv[k]).first;
    }

    ItoBalanceReport rep;
    rep.ev_start = ev.front();
    rep.ev_end = ev.back();
    double qv = 0.0, integral = 0.0, residual = 0.0;
    for (std::size_t k = 0; k + 1 < nt; ++k) {
        double piece = 0.5 * (traj.times[k + 1] - traj.times[k]) * (eg[k] + eg[k + 1]);
        double d = (ev[k + 1] - ev[k]) - piece;
        integral += piece;
        residual += d;
        qv += d * d;
    }
    rep.generator_integral = integral;
    rep.residual = residual;
    rep.std_error = std::sqrt(qv);
    rep.intervals = nt - 1;
    rep.ok = std::abs(residual) <= 3.0 * rep.std_error + 1e-12;
    return rep;
}

DecayExperiment decay_experiment(const LyapunovFunctional& V, const CoefficientField& field,
                                 const EmpiricalMeasure& init, const SimConfig& cfg,
                                 double start_frac, double end_frac) {
    cfg.validate();
    if (!(0.0 <= start_frac && start_frac < end_frac && end_frac <= 1.0))
        throw std::invalid_argument("decay_experiment: need 0 <= start_frac < end_frac <= 1");
    Trajectory traj = simulate(field, tile_cloud(init, cfg.particles), cfg);
    DecayExperiment out;
    out.window_start = start_frac * cfg.horizon();
    out.window_end = end_frac * cfg.horizon();
    std::vector<std::pair<double, double>> window;
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        const EmpiricalMeasure& c = traj.clouds[k];
        double evv = integrate(c, [&](const Vec& p) { return V.value(p, c); });
        out.series.emplace_back(traj.times[k], evv);
        if (traj.times[k] >= out.window_start - 1e-12 && traj.times[k] <= out.window_end + 1e-12)
            window.push_back(out.series.back());
    }
    out.fit = fit_decay(window);
    return out;
}

FellerReport feller_modulus(const CoefficientField& field,
                            const std::vector<EmpiricalMeasure>& mu_sequence,
                            const EmpiricalMeasure& mu_limit, double t, const SimConfig& cfg) {
    cfg.validate();
    if (!field.lipschitz)
        throw std::invalid_argument("feller_modulus: field needs a Lipschitz constant");
    double L = *field.lipschitz;
    double C = 4.0 * L + 4.0 * L * L;
    Grid g = grid_for(t, cfg.dt);

    FellerReport rep;
    rep.C = C;
    rep.t = t;
    rep.ok = true;
    EmpiricalMeasure limit = tile_cloud(mu_limit, cfg.particles);
    for (const EmpiricalMeasure& mu_n : mu_sequence) {
        EmpiricalMeasure a = tile_cloud(mu_n, cfg.particles);
        // Optimal W_2 coupling: reorder the mu_n points so index i pairs
        // with limit point i.
        TransportPlan plan = optimal_plan(a, limit, CostFunction::power(2.0));
        std::vector<Vec> reordered(cfg.particles);
        for (std::size_t i = 0; i < cfg.particles; ++i) reordered[plan.assignment[i]] = a.point(i);
        EmpiricalMeasure ca(std::move(reordered));
        double w2_sq = plan.cost;

        NoiseStream stream(cfg.seed);
        EmpiricalMeasure cb = limit;
        for (std::size_t k = 0; k < g.steps; ++k) {
            auto noise = step_noise(stream, cfg.particles, field.noise_dim, k, g.dt);
            double tk = g.dt * static_cast<double>(k);
            EmpiricalMeasure na = em_step(ca, field, tk, g.dt, noise, cfg.workers, k);
            cb = em_step(cb, field, tk, g.dt, noise, cfg.workers, k);
            ca = std::move(na);
        }
        double msq = 0.0;
        for (std::size_t i = 0; i < cfg.particles; ++i) {
            for (std::size_t c = 0; c < ca.dim(); ++c) {
                double d = ca.point(i)[c] - cb.point(i)[c];
                msq += d * d;
            }
        }
        msq /= static_cast<double>(cfg.particles);

        FellerEntry e;
        e.w2_sq = w2_sq;
        e.moment_sq = msq;
        e.bound = std::exp(C * t) * w2_sq;
        e.ratio = w2_sq > 0.0 ? msq / w2_sq : 0.0;
        e.ok = msq <= e.bound + 1e-12 * (1.0 + e.bound);
        rep.ok = rep.ok && e.ok;
        rep.entries.push_back(e);
    }
    return rep;
}

InvariantEstimate estimate_invariant(const CoefficientField& field, const EmpiricalMeasure& init,
                                     const SimConfig& cfg, double burn_in, bool cesaro) {
    cfg.validate();
    if (burn_in < 0.0 || burn_in >= cfg.horizon())
        throw std::invalid_argument("estimate_invariant: burn_in must lie in [0, horizon)");
    Trajectory traj = simulate(field, tile_cloud(init, cfg.particles), cfg);

    std::vector<const EmpiricalMeasure*> kept;
    for (std::size_t k = 0; k < traj.times.size(); ++k)
        if (traj.times[k] > burn_in - 1e-12 && traj.times[k] > 0.0) kept.push_back(&traj.clouds[k]);
    if (kept.empty()) kept.push_back(&traj.clouds.back());

    std::vector<Vec> pts;
    if (cesaro) {
        std::size_t total = kept.size() * cfg.particles;
        pts.reserve(cfg.particles);
        for (std::size_t i = 0; i < cfg.particles; ++i) {
            std::size_t flat = i * total / cfg.particles;
            pts.push_back(kept[flat / cfg.particles]->point(flat % cfg.particles));
        }
    } else {
        pts = traj.clouds.back().points();
    }
    EmpiricalMeasure estimate(std::move(pts));

    // Stationarity gap: evolve the estimate a further delta and compare.
    double delta = std::max(0.1 * cfg.horizon(), cfg.dt);
    SimConfig ecfg = cfg;
    Grid g = grid_for(delta, cfg.dt);
    ecfg.dt = g.dt;
    ecfg.steps = g.steps;
    ecfg.seed = NoiseStream(cfg.seed).substream(7).seed();
    ecfg.record_every = g.steps;
    Trajectory evolved = simulate(field, estimate, ecfg);
    double gap = wasserstein_p(estimate, evolved.terminal(), 2.0);

    InvariantEstimate out{std::move(estimate), gap, burn_in, cfg.horizon(), cesaro};
    return out;
}

DecayFit fit_decay(const std::vector<std::pair<double, double>>& series) {
    if (series.size() < 3) throw std::invalid_argument("fit_decay: need at least 3 points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    auto n = static_cast<double>(series.size());
    for (const auto& [t, v] : series) {
        if (!(v > 0.0) || !std::isfinite(v) || !std::isfinite(t))
            throw std::invalid_argument("fit_decay: values must be positive and finite");
        double y = std::log(v);
        sx += t;
        sy += y;
        sxx += t * t;
        sxy += t * y;
    }
    double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw std::invalid_argument("fit_decay: degenerate time grid");
    double slope = (n * sxy - sx * sy) / denom;
    double intercept = (sy - slope * sx) / n;
    double ss_res = 0.0, ss_tot = 0.0, ymean = sy / n;
    for (const auto& [t, v] : series) {
        double y = std::log(v);
        double e = y - (intercept + slope * t);
        ss_res += e * e;
        ss_tot += (y - ymean) * (y - ymean);
    }
    DecayFit fit;
    fit.rate = -slope;
    fit.intercept = intercept;
    fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    fit.points = series.size();
    return fit;
}

ContractionReport contraction_experiment(const CoefficientField& field,
                                         const CoefficientField& bar_field,
                                         const TwoPointFunction& V2, const Vec& x,
                                         const EmpiricalMeasure& mu, const Vec& y,
                                         const EmpiricalMeasure& nu, const Certificate& cert,
                                         const SimConfig& cfg) {
    cfg.validate();
    if (cert.kind != Certificate::Kind::TwoPoint)
        throw std::invalid_argument("contraction_experiment: TwoPoint certificate required");
    EmpiricalMeasure mu0 = tile_cloud(mu, cfg.particles);
    EmpiricalMeasure nu0 = tile_cloud(nu, cfg.particles);
    // Same seed in both runs: the noise for particle i at step k is shared.
    CoupledTrajectory ta = simulate_coupled(field, bar_field, x, mu0, cfg);
    CoupledTrajectory tb = simulate_coupled(field, bar_field, y, nu0, cfg);

    CostFunction cost;
    cost.eval = [&V2](const Vec& a, const Vec& b) {
        Vec u(a.size());
        for (std::size_t c = 0; c < a.size(); ++c) u[c] = a[c] - b[c];
        return V2.value(u);
    };
    cost.convex_in_difference_1d = V2.convex_1d;

    double gamma = cert.gamma, beta = cert.beta;
    double gamma_bar = cert.gamma_bar, beta_bar = cert.beta_bar;
    Vec u0(x.size());
    for (std::size_t c = 0; c < x.size(); ++c) u0[c] = x[c] - y[c];
    double v20 = V2.value(u0);
    double wv0 = quasi_wasserstein(mu0, nu0, cost);

    ContractionReport rep;
    rep.ok = true;
    for (std::size_t k = 0; k < ta.times.size(); ++k) {
        double t = ta.times[k];
        std::vector<double> pair_costs(cfg.particles);
        for (std::size_t i = 0; i < cfg.particles; ++i) {
            Vec u(x.size());
            for (std::size_t c = 0; c < x.size(); ++c)
                u[c] = ta.bar_clouds[k].point(i)[c] - tb.bar_clouds[k].point(i)[c];
            pair_costs[i] = V2.value(u);
        }
        auto [ev2, ev2_se] = mean_se(pair_costs);
        double wv = quasi_wasserstein(ta.law_clouds[k], tb.law_clouds[k], cost);

        double mix = gamma_bar + beta - gamma;
        double factor = std::abs(mix) < 1e-12
                            ? beta_bar * t * std::exp(-gamma_bar * t)
                            : (beta_bar / mix) *
                                  (std::exp((beta - gamma) * t) - std::exp(-gamma_bar * t));
        ContractionEntry e;
        e.t = t;
        e.ev2 = ev2;
        e.ev2_se = ev2_se;
        e.ev2_bound = v20 * std::exp(-gamma_bar * t) + wv0 * factor;
        e.wv = wv;
        e.wv_bound = wv0 * std::exp(-(gamma - beta) * t);
        bool ok_ev2 = ev2 <= e.ev2_bound + 3.0 * ev2_se + 1e-9 * (1.0 + e.ev2_bound);
        bool ok_wv = wv <= e.wv_bound + 3.0 * ev2_se + 1e-9 * (1.0 + e.wv_bound);
        e.ok = ok_ev2 && ok_wv;
        if (!e.ok && !rep.first_violation_time) rep.first_violation_time = t;
        rep.ok = rep.ok && e.ok;
        rep.entries.push_back(e);
    }
    return rep;
}

}  // namespace mvlab
