#pragma once

#include "forgetbench/core/error.hpp"

#include <numeric>
#include <string>
#include <vector>

namespace forgetbench::metrics {

// Accuracies measured after session i, for i = 2..T.
struct AlphaTriple {
    double base = 0.0;
    double new_ = 0.0;
    double all = 0.0;
};

struct MetricsReport {
    int sessions = 0;  // T
    double alpha_ideal = 0.0;
    std::vector<AlphaTriple> curve;  // curve[i - 2] belongs to session i
    double omega_base = 0.0;
    double omega_new = 0.0;
    double omega_all = 0.0;
};

namespace detail {
inline void check_length(const std::vector<double>& values, int sessions, const char* what) {
    if (sessions < 2) throw InputError(std::string(what) + ": needs T >= 2");
    if (static_cast<int>(values.size()) != sessions - 1) {
        throw InputError(std::string(what) + ": expected " + std::to_string(sessions - 1) + " values for T = " +
                         std::to_string(sessions) + ", got " + std::to_string(values.size()));
    }
}

inline void check_ideal(double alpha_ideal, const char* what) {
    if (!(alpha_ideal > 0.0)) throw InputError(std::string(what) + ": alpha_ideal must be > 0");
}

inline double mean(const std::vector<double>& values) {
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}
}  // namespace detail

// Mean retention of the first session relative to the offline model. Not clamped.
inline double omega_base(const std::vector<double>& alpha_base, double alpha_ideal, int sessions) {
    detail::check_length(alpha_base, sessions, "omega_base");
    detail::check_ideal(alpha_ideal, "omega_base");
    return detail::mean(alpha_base) / alpha_ideal;
}

// Mean accuracy on each newest session; no normalization.
inline double omega_new(const std::vector<double>& alpha_new, int sessions) {
    detail::check_length(alpha_new, sessions, "omega_new");
    return detail::mean(alpha_new);
}

inline double omega_all(const std::vector<double>& alpha_all, double alpha_ideal, int sessions) {
    detail::check_length(alpha_all, sessions, "omega_all");
    detail::check_ideal(alpha_ideal, "omega_all");
    return detail::mean(alpha_all) / alpha_ideal;
}

inline MetricsReport make_report(const std::vector<AlphaTriple>& curve, double alpha_ideal) {
    MetricsReport r;
    r.sessions = static_cast<int>(curve.size()) + 1;
    r.alpha_ideal = alpha_ideal;
    r.curve = curve;
    std::vector<double> b;
    std::vector<double> n;
    std::vector<double> a;
    for (const auto& t : curve) {
        b.push_back(t.base);
        n.push_back(t.new_);
        a.push_back(t.all);
    }
    r.omega_base = omega_base(b, alpha_ideal, r.sessions);
    r.omega_new = omega_new(n, r.sessions);
    r.omega_all = omega_all(a, alpha_ideal, r.sessions);
    return r;
}

}  // namespace forgetbench::metrics
