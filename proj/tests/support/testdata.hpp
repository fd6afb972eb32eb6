#pragma once

// Deterministic dataset builders shared across the test suites.

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "floc/model.hpp"

namespace testdata {

// Common design: n subjects on the shared grid j/(m+1), responses
// mu(t) + sigma * N(0,1) with a fixed seed.
inline floc::ObservationSet common(int n, int m,
                                   const std::function<double(double)>& mu,
                                   double sigma, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<floc::SubjectRecord> recs;
    recs.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        floc::SubjectRecord rec;
        rec.id = i + 1;
        for (int j = 1; j <= m; ++j) {
            const double t = static_cast<double>(j) / (m + 1);
            rec.t.push_back(t);
            rec.y.push_back(mu(t) + sigma * noise(rng));
        }
        recs.push_back(std::move(rec));
    }
    return floc::ObservationSet::from_records(std::move(recs));
}

// Independent design: each subject gets m sorted uniform points.
inline floc::ObservationSet independent(int n, int m,
                                        const std::function<double(double)>& mu,
                                        double sigma, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<floc::SubjectRecord> recs;
    recs.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        floc::SubjectRecord rec;
        rec.id = i + 1;
        rec.t.resize(static_cast<std::size_t>(m));
        for (auto& t : rec.t) t = unif(rng);
        std::sort(rec.t.begin(), rec.t.end());
        for (double t : rec.t) rec.y.push_back(mu(t) + sigma * noise(rng));
        recs.push_back(std::move(rec));
    }
    return floc::ObservationSet::from_records(std::move(recs));
}

inline double sine(double t) { return std::sin(2.0 * M_PI * t); }
inline double line2(double t) { return 2.0 * t; }

}  // namespace testdata
