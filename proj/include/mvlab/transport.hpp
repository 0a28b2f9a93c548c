#pragma once

#include <functional>
#include <optional>

#include "mvlab/measures.hpp"

namespace mvlab {

// Pairwise transport cost. The flags let the solver pick the exact 1-d
// monotone matching when it is optimal (cost convex in the scalar
// difference x - y).
struct CostFunction {
    std::function<double(const Vec&, const Vec&)> eval;
    bool vanishes_on_diagonal = true;
    bool convex_in_difference_1d = false;

    // |x - y|^p.
    static CostFunction power(double p);
    // cost(x, y) = g(x - y) for 1-d clouds.
    static CostFunction from_difference_1d(std::function<double(double)> g, bool convex);
};

// Optimal coupling between equal-size equal-weight clouds: a permutation
// matching source index i to target index assignment[i].
struct TransportPlan {
    std::vector<std::size_t> assignment;
    double cost;  // mean per-pair cost under the assignment
};

// Exact optimal plan. 1-d clouds with a convex-in-difference cost use the
// sorted matching; everything else goes through the assignment solver.
TransportPlan optimal_plan(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                           const CostFunction& cost);

// W_p via the optimal coupling, p >= 1.
double wasserstein_p(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, double p);

// W_{2,N}: W_2 between the phi_n pushforwards.
double truncated_w2(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, TruncationRadius n);

// W_V: optimal mean cost, no p-th root, no triangle inequality promised.
double quasi_wasserstein(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                         const CostFunction& cost);

// W_{V,V} specialized to product measures nu_i x delta_{mu_i}: the coupling
// on the point-mass coordinate is forced, so the value splits additively.
double product_quasi_distance(const EmpiricalMeasure& nu1, const EmpiricalMeasure& mu1,
                              const EmpiricalMeasure& nu2, const EmpiricalMeasure& mu2,
                              const CostFunction& cost);

// Levy-Prohorov distance between 1-d empirical measures, exact. Scans the
// candidate thresholds induced by pairwise gaps and mass increments; via
// Strassen's characterization feasibility at a threshold is a bipartite
// matching question. Unequal cloud sizes are handled by lcm replication.
double levy_prohorov_1d(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu);

struct ProhorovReport {
    double wp;
    double omega;
    double bound;   // omega^{1 + 1/p}
    double margin;  // wp - bound
    bool ok;
};

// W_p >= omega^{1+1/p} comparison, 1-d only.
ProhorovReport check_prohorov_bound(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                                    double p);

// Exact linear assignment on an n x n cost matrix (row-major); returns the
// column assigned to each row. Jonker-Volgenant style shortest augmenting
// paths, O(n^3).
std::vector<std::size_t> solve_assignment(const std::vector<double>& cost, std::size_t n);

}  // namespace mvlab
