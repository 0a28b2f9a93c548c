#include "mvlab/measures.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace mvlab {

struct EmpiricalMeasure::StatCache {
    std::mutex mutex;
    std::map<int, double> values;
};

double EmpiricalMeasure::cached_stat(int key, const std::function<double()>& compute) const {
    {
        std::lock_guard<std::mutex> lock(cache_->mutex);
        auto it = cache_->values.find(key);
        if (it != cache_->values.end()) return it->second;
    }
    double v = compute();
    std::lock_guard<std::mutex> lock(cache_->mutex);
    return cache_->values.emplace(key, v).first->second;
}

EmpiricalMeasure::EmpiricalMeasure(std::vector<Vec> points)
    : points_(std::make_shared<const std::vector<Vec>>(std::move(points))),
      cache_(std::make_shared<StatCache>()) {
    if (points_->empty()) throw std::invalid_argument("EmpiricalMeasure: empty cloud");
    dim_ = (*points_)[0].size();
    if (dim_ == 0) throw std::invalid_argument("EmpiricalMeasure: zero-dimensional point");
    for (const Vec& p : *points_) {
        if (p.size() != dim_) throw std::invalid_argument("EmpiricalMeasure: inconsistent point dimension");
        if (!is_finite(p)) throw std::invalid_argument("EmpiricalMeasure: non-finite coordinate");
    }
}

EmpiricalMeasure EmpiricalMeasure::dirac(Vec x, std::size_t copies) {
    if (copies == 0) throw std::invalid_argument("dirac: zero copies");
    std::vector<Vec> pts(copies, x);
    return EmpiricalMeasure(std::move(pts));
}

EmpiricalMeasure EmpiricalMeasure::dirac1d(double x, std::size_t copies) {
    return dirac(Vec{x}, copies);
}

EmpiricalMeasure EmpiricalMeasure::from_scalars(const std::vector<double>& xs) {
    std::vector<Vec> pts;
    pts.reserve(xs.size());
    for (double x : xs) pts.push_back(Vec{x});
    return EmpiricalMeasure(std::move(pts));
}

TruncationRadius::TruncationRadius(double radius) : n(radius) {
    if (!(radius > 0.0) || !std::isfinite(radius))
        throw std::invalid_argument("TruncationRadius: n must be positive and finite");
}

Vec truncate_point(const Vec& x, TruncationRadius n) {
    if (!is_finite(x)) throw std::invalid_argument("truncate_point: non-finite input");
    double r = norm2(x);
    if (r <= n.n) return x;
    Vec y = x;
    double scale = n.n / r;
    for (double& c : y) c *= scale;
    return y;
}

EmpiricalMeasure pushforward_truncate(const EmpiricalMeasure& mu, TruncationRadius n) {
    std::vector<Vec> pts;
    pts.reserve(mu.size());
    for (const Vec& p : mu.points()) pts.push_back(truncate_point(p, n));
    return EmpiricalMeasure(std::move(pts));
}

double integrate(const EmpiricalMeasure& mu, const std::function<double(const Vec&)>& f) {
    double s = 0.0;
    for (const Vec& p : mu.points()) {
        double v = f(p);
        if (!std::isfinite(v)) throw std::invalid_argument("integrate: non-finite integrand value");
        s += v;
    }
    return s / static_cast<double>(mu.size());
}

double second_moment_sq(const EmpiricalMeasure& mu) {
    return mu.cached_stat(-2, [&mu] {
        double s = 0.0;
        for (const Vec& p : mu.points()) {
            for (double c : p) s += c * c;
        }
        return s / static_cast<double>(mu.size());
    });
}

double second_moment_norm(const EmpiricalMeasure& mu) { return std::sqrt(second_moment_sq(mu)); }

Vec mean_point(const EmpiricalMeasure& mu) {
    Vec m(mu.dim(), 0.0);
    for (const Vec& p : mu.points())
        for (std::size_t k = 0; k < m.size(); ++k) m[k] += p[k];
    for (double& c : m) c /= static_cast<double>(mu.size());
    return m;
}

double mean1d(const EmpiricalMeasure& mu) { return moment1d(mu, 1); }

double moment1d(const EmpiricalMeasure& mu, int k) {
    if (mu.dim() != 1) throw std::invalid_argument("moment1d: cloud is not 1-d");
    return mu.cached_stat(k, [&mu, k] {
        double s = 0.0;
        for (const Vec& p : mu.points()) s += std::pow(p[0], k);
        return s / static_cast<double>(mu.size());
    });
}

void save_cloud_csv(const EmpiricalMeasure& mu, std::ostream& os) {
    for (std::size_t k = 0; k < mu.dim(); ++k) {
        if (k) os << ',';
        os << 'x' << (k + 1);
    }
    os << '\n';
    char buf[64];
    for (const Vec& p : mu.points()) {
        for (std::size_t k = 0; k < p.size(); ++k) {
            if (k) os << ',';
            std::snprintf(buf, sizeof buf, "%.17g", p[k]);
            os << buf;
        }
        os << '\n';
    }
}

EmpiricalMeasure load_cloud_csv(std::istream& is) {
    std::vector<Vec> pts;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        Vec p;
        bool numeric = true;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t pos = 0;
                double v = std::stod(cell, &pos);
                p.push_back(v);
            } catch (const std::exception&) {
                numeric = false;
                break;
            }
        }
        if (!numeric) continue;  // header row
        if (!p.empty()) pts.push_back(std::move(p));
    }
    return EmpiricalMeasure(std::move(pts));
}

EmpiricalMeasure load_cloud_json(const std::string& json_text) {
    nlohmann::json j = nlohmann::json::parse(json_text);
    std::vector<Vec> pts;
    for (const auto& row : j) {
        Vec p;
        if (row.is_number()) {
            p.push_back(row.get<double>());
        } else {
            for (const auto& c : row) p.push_back(c.get<double>());
        }
        pts.push_back(std::move(p));
    }
    return EmpiricalMeasure(std::move(pts));
}

}  // namespace mvlab
