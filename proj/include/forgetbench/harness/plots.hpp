#pragma once

#include "forgetbench/harness/record.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

namespace forgetbench::harness {

enum class Figure { Base, New, All };

inline std::string to_string(Figure f) {
    switch (f) {
        case Figure::Base: return "base";
        case Figure::New: return "new";
        case Figure::All: return "all";
    }
    return "?";
}

inline Figure figure_from_string(const std::string& name) {
    if (name == "base") return Figure::Base;
    if (name == "new") return Figure::New;
    if (name == "all") return Figure::All;
    throw ConfigError("unknown figure '" + name + "' (expected base, new or all)");
}

inline double curve_value(const SessionRecord& s, Figure f) {
    switch (f) {
        case Figure::Base: return s.alpha_base;
        case Figure::New: return s.alpha_new;
        case Figure::All: return s.alpha_all;
    }
    return 0.0;
}

inline std::string series_label(const RunRecord& r) { return r.model + "/" + r.dataset; }

inline std::string check_protocol(const std::vector<RunRecord>& records) {
    if (records.empty()) throw InputError("no run records to plot");
    for (const auto& r : records) {
        if (r.protocol != records.front().protocol) {
            throw InputError("cannot plot mixed protocols (" + records.front().protocol + " and " + r.protocol + ")");
        }
    }
    return records.front().protocol;
}

inline std::string curve_csv(const std::vector<RunRecord>& records, Figure f) {
    check_protocol(records);
    std::ostringstream out;
    out << "session,alpha,model,dataset\n";
    char buf[32];
    for (const auto& r : records) {
        for (const auto& s : r.curve) {
            std::snprintf(buf, sizeof buf, "%.17g", curve_value(s, f));
            out << s.session << ',' << buf << ',' << r.model << ',' << r.dataset << '\n';
        }
    }
    return out.str();
}

// Line chart with one polyline per record; x = session, y = alpha in [0, 1]
// (the axis stretches when a value exceeds 1).
inline std::string curve_svg(const std::vector<RunRecord>& records, Figure f) {
    const std::string protocol = check_protocol(records);
    constexpr double W = 640, H = 400, L = 60, R = 180, T = 30, B = 50;
    int max_session = 2;
    double y_max = 1.0;
    for (const auto& r : records) {
        for (const auto& s : r.curve) {
            max_session = std::max(max_session, s.session);
            y_max = std::max(y_max, curve_value(s, f));
        }
    }
    const double span = std::max(1, max_session - 2);
    auto px = [&](int session) { return L + (W - L - R) * (session - 2) / span; };
    auto py = [&](double v) { return H - B - (H - T - B) * v / y_max; };
    static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

    std::ostringstream out;
    char buf[64];
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    out << "<text x=\"" << L << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">alpha_" << to_string(f) << " ("
        << protocol << ")</text>\n";
    out << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double v = y_max * k / 4.0;
        std::snprintf(buf, sizeof buf, "%.2f", v);
        out << "<text x=\"" << L - 40 << "\" y=\"" << py(v) + 4 << "\" font-family=\"sans-serif\" font-size=\"11\">" << buf << "</text>\n";
    }
    for (int s = 2; s <= max_session; ++s) {
        out << "<text x=\"" << px(s) - 4 << "\" y=\"" << H - B + 18 << "\" font-family=\"sans-serif\" font-size=\"11\">" << s << "</text>\n";
    }
    out << "<text x=\"" << (L + W - R) / 2 - 20 << "\" y=\"" << H - 10 << "\" font-family=\"sans-serif\" font-size=\"12\">session</text>\n";
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        const char* color = colors[i % std::size(colors)];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (std::size_t k = 0; k < r.curve.size(); ++k) {
            std::snprintf(buf, sizeof buf, "%.2f,%.2f", px(r.curve[k].session), py(curve_value(r.curve[k], f)));
            out << (k ? " " : "") << buf;
        }
        out << "\"/>\n";
        out << "<text x=\"" << W - R + 10 << "\" y=\"" << T + 16 * (i + 1) << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\""
            << color << "\">" << series_label(r) << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

// Writes <protocol>_<figure>.csv and .svg into `dir`; returns the two paths.
inline std::pair<std::filesystem::path, std::filesystem::path> emit_plots(const std::vector<RunRecord>& records, Figure f,
                                                                          const std::filesystem::path& dir) {
    const std::string stem = check_protocol(records) + "_" + to_string(f);
    const auto csv = dir / (stem + ".csv");
    const auto svg = dir / (stem + ".svg");
    write_text_atomic(csv, curve_csv(records, f));
    write_text_atomic(svg, curve_svg(records, f));
    return {csv, svg};
}

}  // namespace forgetbench::harness
