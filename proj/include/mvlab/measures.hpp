#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <string>

#include "mvlab/core.hpp"

namespace mvlab {

// Equal-weight particle cloud standing in for a law in P_2(R^d).
// Immutable after construction; any integration against the measure is the
// arithmetic mean over the points. Scalar statistics (moments) are memoized
// so per-particle coefficient evaluations against a shared frozen cloud stay
// O(1) after the first computation; copies share the cache.
class EmpiricalMeasure {
  public:
    explicit EmpiricalMeasure(std::vector<Vec> points);

    // Point mass delta_x, optionally replicated.
    static EmpiricalMeasure dirac(Vec x, std::size_t copies = 1);
    static EmpiricalMeasure dirac1d(double x, std::size_t copies = 1);

    // Convenience for 1-d clouds.
    static EmpiricalMeasure from_scalars(const std::vector<double>& xs);

    std::size_t dim() const { return dim_; }
    std::size_t size() const { return points_->size(); }
    const Vec& point(std::size_t i) const { return (*points_)[i]; }
    const std::vector<Vec>& points() const { return *points_; }

    bool operator==(const EmpiricalMeasure& other) const {
        return dim_ == other.dim_ && *points_ == *other.points_;
    }

    // Thread-safe memoized scalar statistic; `key` identifies the statistic.
    double cached_stat(int key, const std::function<double()>& compute) const;

  private:
    struct StatCache;
    std::shared_ptr<const std::vector<Vec>> points_;
    std::shared_ptr<StatCache> cache_;
    std::size_t dim_;
};

struct TruncationRadius {
    double n;
    explicit TruncationRadius(double radius);
};

// phi_n(x) = n x / (n v |x|): identity inside the ball of radius n, radial
// projection onto the sphere outside.
Vec truncate_point(const Vec& x, TruncationRadius n);

// Pointwise phi_n image of the cloud (mu o phi_n^{-1}).
EmpiricalMeasure pushforward_truncate(const EmpiricalMeasure& mu, TruncationRadius n);

// mu(f): arithmetic mean of f over the points. Throws if f produces a
// non-finite value.
double integrate(const EmpiricalMeasure& mu, const std::function<double(const Vec&)>& f);

// |mu|_2 = sqrt(int |x|^2 mu(dx)).
double second_moment_norm(const EmpiricalMeasure& mu);
double second_moment_sq(const EmpiricalMeasure& mu);

// Mean point of the cloud.
Vec mean_point(const EmpiricalMeasure& mu);
// 1-d helpers.
double mean1d(const EmpiricalMeasure& mu);
double moment1d(const EmpiricalMeasure& mu, int k);

// CSV: one point per row, columns x1..xd (header included on write,
// tolerated on read). JSON: array of arrays, accepted on input.
void save_cloud_csv(const EmpiricalMeasure& mu, std::ostream& os);
EmpiricalMeasure load_cloud_csv(std::istream& is);
EmpiricalMeasure load_cloud_json(const std::string& json_text);

}  // namespace mvlab
