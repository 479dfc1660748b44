#pragma once

#include "forgetbench/harness/record.hpp"

#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace forgetbench::harness {

struct SummaryRow {
    std::string model;
    std::string protocol;
    int records = 0;
    double mean_omega_all = 0.0;
};

struct Summary {
    std::vector<SummaryRow> rows;      // sorted by (model, protocol)
    std::vector<RunRecord> records;
};

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

// Mean Omega_all per (model, protocol) across the given records.
inline Summary summarize(const std::vector<RunRecord>& records) {
    if (records.empty()) throw InputError("summarize needs at least one run record");
    std::map<std::pair<std::string, std::string>, std::vector<double>> groups;
    for (const auto& r : records) groups[{r.model, r.protocol}].push_back(r.omega_all);
    Summary s;
    s.records = records;
    for (const auto& [key, values] : groups) {
        double sum = 0.0;
        for (double v : values) sum += v;
        s.rows.push_back({key.first, key.second, static_cast<int>(values.size()), sum / static_cast<double>(values.size())});
    }
    return s;
}

inline std::string summary_csv(const Summary& s) {
    std::ostringstream out;
    out << "model,protocol,records,mean_omega_all\n";
    for (const auto& r : s.rows) out << r.model << ',' << r.protocol << ',' << r.records << ',' << format_double(r.mean_omega_all) << '\n';
    return out.str();
}

inline std::string records_csv(const Summary& s) {
    std::ostringstream out;
    out << "model,protocol,dataset,seed,sessions,alpha_ideal,omega_base,omega_new,omega_all,model_mb,aux_mb\n";
    for (const auto& r : s.records) {
        out << r.model << ',' << r.protocol << ',' << r.dataset << ',' << r.seed << ',' << r.sessions << ','
            << format_double(r.alpha_ideal) << ',' << format_double(r.omega_base) << ',' << format_double(r.omega_new)
            << ',' << format_double(r.omega_all) << ',' << format_double(r.model_mb) << ',' << format_double(r.aux_mb) << '\n';
    }
    return out.str();
}

}  // namespace forgetbench::harness
