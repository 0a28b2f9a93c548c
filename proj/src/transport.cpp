#include "mvlab/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace mvlab {

CostFunction CostFunction::power(double p) {
    CostFunction c;
    c.eval = [p](const Vec& x, const Vec& y) {
        double s = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) {
            double d = x[k] - y[k];
            s += d * d;
        }
        return std::pow(std::sqrt(s), p);
    };
    c.vanishes_on_diagonal = true;
    c.convex_in_difference_1d = (p >= 1.0);
    return c;
}

CostFunction CostFunction::from_difference_1d(std::function<double(double)> g, bool convex) {
    CostFunction c;
    c.eval = [g = std::move(g)](const Vec& x, const Vec& y) { return g(x[0] - y[0]); };
    c.vanishes_on_diagonal = true;
    c.convex_in_difference_1d = convex;
    return c;
}

std::vector<std::size_t> solve_assignment(const std::vector<double>& cost, std::size_t n) {
    const double INF = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(n + 1, INF);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            std::size_t i0 = p[j0], j1 = 0;
            double delta = INF;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                double cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
    std::vector<std::size_t> ans(n);
    for (std::size_t j = 1; j <= n; ++j)
        if (p[j]) ans[p[j] - 1] = j - 1;
    return ans;
}

namespace {

void check_pair(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
    if (mu.size() != nu.size())
        throw std::invalid_argument("transport: clouds must have equal point counts");
    if (mu.dim() != nu.dim()) throw std::invalid_argument("transport: clouds must share dimension");
}

std::vector<std::size_t> sorted_by_value_1d(const EmpiricalMeasure& m) {
    std::vector<std::size_t> idx(m.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return m.point(a)[0] < m.point(b)[0]; });
    return idx;
}

}  // namespace

TransportPlan optimal_plan(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                           const CostFunction& cost) {
    check_pair(mu, nu);
    const std::size_t m = mu.size();
    TransportPlan plan;
    plan.assignment.resize(m);
    if (mu.dim() == 1 && cost.convex_in_difference_1d) {
        auto si = sorted_by_value_1d(mu);
        auto sj = sorted_by_value_1d(nu);
        for (std::size_t k = 0; k < m; ++k) plan.assignment[si[k]] = sj[k];
    } else {
        std::vector<double> c(m * m);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) {
                double v = cost.eval(mu.point(i), nu.point(j));
                if (!std::isfinite(v))
                    throw std::invalid_argument("transport: non-finite cost value");
                c[i * m + j] = v;
            }
        plan.assignment = solve_assignment(c, m);
    }
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        double v = cost.eval(mu.point(i), nu.point(plan.assignment[i]));
        if (!std::isfinite(v)) throw std::invalid_argument("transport: non-finite cost value");
        total += v;
    }
    plan.cost = total / static_cast<double>(m);
    return plan;
}

double wasserstein_p(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, double p) {
    if (!(p >= 1.0)) throw std::invalid_argument("wasserstein_p: p must be >= 1");
    TransportPlan plan = optimal_plan(mu, nu, CostFunction::power(p));
    return std::pow(plan.cost, 1.0 / p);
}

double truncated_w2(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, TruncationRadius n) {
    return wasserstein_p(pushforward_truncate(mu, n), pushforward_truncate(nu, n), 2.0);
}

double quasi_wasserstein(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                         const CostFunction& cost) {
    return optimal_plan(mu, nu, cost).cost;
}

double product_quasi_distance(const EmpiricalMeasure& nu1, const EmpiricalMeasure& mu1,
                              const EmpiricalMeasure& nu2, const EmpiricalMeasure& mu2,
                              const CostFunction& cost) {
    return quasi_wasserstein(nu1, nu2, cost) + quasi_wasserstein(mu1, mu2, cost);
}

namespace {

// Kuhn augmenting path over the currently enabled edges.
struct Matcher {
    std::size_t n;
    std::vector<std::vector<std::size_t>> adj;  // left -> enabled right neighbors
    std::vector<std::ptrdiff_t> match_left, match_right;
    std::vector<char> visited;

    explicit Matcher(std::size_t size)
        : n(size), adj(size), match_left(size, -1), match_right(size, -1), visited(size, 0) {}

    bool try_augment(std::size_t i) {
        for (std::size_t j : adj[i]) {
            if (visited[j]) continue;
            visited[j] = 1;
            if (match_right[j] < 0 || try_augment(static_cast<std::size_t>(match_right[j]))) {
                match_left[i] = static_cast<std::ptrdiff_t>(j);
                match_right[j] = static_cast<std::ptrdiff_t>(i);
                return true;
            }
        }
        return false;
    }

    std::size_t augment_all() {
        std::size_t k = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (match_left[i] >= 0) {
                ++k;
                continue;
            }
            std::fill(visited.begin(), visited.end(), 0);
            if (try_augment(i)) ++k;
        }
        return k;
    }
};

std::vector<double> replicate_1d(const EmpiricalMeasure& m, std::size_t reps) {
    std::vector<double> out;
    out.reserve(m.size() * reps);
    for (std::size_t r = 0; r < reps; ++r)
        for (const Vec& p : m.points()) out.push_back(p[0]);
    return out;
}

}  // namespace

double levy_prohorov_1d(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
    if (mu.dim() != 1 || nu.dim() != 1)
        throw std::invalid_argument("levy_prohorov_1d: only 1-d clouds supported");
    std::size_t l = std::lcm(mu.size(), nu.size());
    if (l > 20000) throw std::invalid_argument("levy_prohorov_1d: cloud sizes too incompatible");
    std::vector<double> xs = replicate_1d(mu, l / mu.size());
    std::vector<double> ys = replicate_1d(nu, l / nu.size());
    const std::size_t L = l;

    struct Edge {
        double d;
        std::size_t i, j;
    };
    std::vector<Edge> edges;
    edges.reserve(L * L);
    for (std::size_t i = 0; i < L; ++i)
        for (std::size_t j = 0; j < L; ++j) edges.push_back({std::abs(xs[i] - ys[j]), i, j});
    std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) { return a.d < b.d; });

    double best = std::numeric_limits<double>::infinity();
    const double Ld = static_cast<double>(L);

    // Interval below the smallest pairwise gap: no mass can move, so the
    // full mass 1 must be covered by delta itself.
    if (edges.front().d > 0.0 && 1.0 <= edges.front().d) best = 1.0;

    Matcher matcher(L);
    std::size_t e = 0;
    while (e < edges.size()) {
        double d = edges[e].d;
        while (e < edges.size() && edges[e].d == d) {
            matcher.adj[edges[e].i].push_back(edges[e].j);
            ++e;
        }
        std::size_t k = matcher.augment_all();
        double hi = (e < edges.size()) ? edges[e].d : std::numeric_limits<double>::infinity();
        double c = std::max(d, static_cast<double>(L - k) / Ld);
        if (c <= hi) best = std::min(best, c);
        if (k == L) break;  // further edges cannot lower the candidate
    }
    return best;
}

ProhorovReport check_prohorov_bound(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                                    double p) {
    ProhorovReport r;
    r.wp = wasserstein_p(mu, nu, p);
    r.omega = levy_prohorov_1d(mu, nu);
    r.bound = std::pow(r.omega, 1.0 + 1.0 / p);
    r.margin = r.wp - r.bound;
    r.ok = r.margin >= -1e-12;
    return r;
}

}  // namespace mvlab
