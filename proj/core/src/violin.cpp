#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>

#include "survkit/curves.hpp"
#include "survkit/error.hpp"
#include "survkit/format.hpp"

namespace survkit {

double quantile_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw Error("quantile of an empty sample");
    const double h = static_cast<double>(sorted.size() - 1) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

double silverman_bandwidth(std::span<const double> values) {
    constexpr double kFloor = 2.0 / static_cast<double>(kDensityPoints - 1);
    constexpr double kFallback = 0.05;
    const std::size_t n = values.size();
    if (n < 2) return kFallback;
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double iqr = (quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25)) / 1.34;
    double spread = std::min(sd, iqr);
    if (!(spread > 0.0)) spread = std::max(sd, iqr);
    if (!(spread > 0.0)) return kFallback;
    return std::max(kFloor, 0.9 * spread * std::pow(static_cast<double>(n), -0.2));
}

ViolinSummary summarize_group(std::string group, std::vector<std::string> ids, std::vector<double> values) {
    if (values.empty()) throw Error("violin group '" + group + "' is empty");
    ViolinSummary s;
    s.group = std::move(group);
    s.ids = std::move(ids);
    s.raw = std::move(values);
    std::vector<double> sorted = s.raw;
    std::sort(sorted.begin(), sorted.end());
    s.q1 = quantile_sorted(sorted, 0.25);
    s.median = quantile_sorted(sorted, 0.5);
    s.q3 = quantile_sorted(sorted, 0.75);
    s.bandwidth = silverman_bandwidth(s.raw);

    s.grid.resize(kDensityPoints);
    s.density.assign(kDensityPoints, 0.0);
    const double step = 1.0 / static_cast<double>(kDensityPoints - 1);
    const double norm = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * s.bandwidth * static_cast<double>(s.raw.size()));
    for (std::size_t g = 0; g < kDensityPoints; ++g) {
        s.grid[g] = static_cast<double>(g) * step;
        double acc = 0.0;
        for (double v : sorted) {
            const double u = (s.grid[g] - v) / s.bandwidth;
            acc += std::exp(-0.5 * u * u);
        }
        s.density[g] = acc * norm;
    }
    double integral = 0.0;
    for (std::size_t g = 0; g + 1 < kDensityPoints; ++g) integral += 0.5 * step * (s.density[g] + s.density[g + 1]);
    if (integral > 0.0) {
        for (auto& d : s.density) d /= integral;
    }
    return s;
}

ViolinData violin_data(std::span<const SurvivalCurve> curves, std::span<const std::string> ids,
                       std::span<const double> times, std::span<const int> events,
                       std::span<const std::string> split_labels, CensoredAt censored_at) {
    const std::size_t n = curves.size();
    if (ids.size() != n || times.size() != n || events.size() != n || split_labels.size() != n) {
        throw Error("violin_data: inputs are not aligned");
    }
    struct Bucket {
        std::vector<std::string> ids;
        std::vector<double> values;
    };
    std::map<std::string, Bucket> buckets;
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < n; ++i) {
        const bool dead = events[i] == 1;
        const double at = (!dead && censored_at == CensoredAt::max_time) ? curves[i].max_time() : times[i];
        auto& b = buckets[(dead ? "Dead_" : "Censored_") + split_labels[i]];
        b.ids.push_back(ids[i]);
        b.values.push_back(probability_at(curves[i], at));
        if (std::find(labels.begin(), labels.end(), split_labels[i]) == labels.end()) {
            labels.push_back(split_labels[i]);
        }
    }
    // Test before Train, then any other label alphabetically.
    std::sort(labels.begin(), labels.end(), [](const std::string& a, const std::string& b) {
        auto rank = [](const std::string& s) { return s == "Test" ? 0 : s == "Train" ? 1 : 2; };
        return rank(a) != rank(b) ? rank(a) < rank(b) : a < b;
    });
    ViolinData out;
    for (const auto& label : labels) {
        for (const char* kind : {"Censored_", "Dead_"}) {
            const std::string group = kind + label;
            auto it = buckets.find(group);
            if (it == buckets.end() || it->second.values.empty()) {
                out.notes.push_back("group " + group + " is empty and was omitted");
                continue;
            }
            out.groups.push_back(summarize_group(group, std::move(it->second.ids), std::move(it->second.values)));
        }
    }
    return out;
}

void write_violin_csv(std::ostream& out, const ViolinData& data) {
    out << "group,patient_id,probability\n";
    for (const auto& g : data.groups) {
        for (std::size_t i = 0; i < g.raw.size(); ++i) {
            out << g.group << ',' << g.ids[i] << ',' << format_double(g.raw[i]) << '\n';
        }
    }
}

std::string render_violin_svg(const std::vector<ViolinSummary>& groups) {
    if (groups.empty()) throw Error("render_violin_svg: nothing to draw");
    constexpr double kSlot = 170.0, kLeft = 70.0, kTop = 40.0, kPlot = 360.0, kHalfWidth = 65.0;
    const double width = kLeft + kSlot * static_cast<double>(groups.size()) + 20.0;
    const double height = kTop + kPlot + 60.0;
    auto y_of = [&](double p) { return kTop + (1.0 - p) * kPlot; };
    auto num = [](double v) { return format_fixed(v, 2); };

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\"" << num(height)
        << "\" viewBox=\"0 0 " << num(width) << ' ' << num(height) << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
        << "<rect x=\"0\" y=\"0\" width=\"" << num(width) << "\" height=\"" << num(height) << "\" fill=\"white\"/>\n"
        << "<text x=\"" << num(width / 2.0) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
        << "Predicted survival probability at event / censoring time</text>\n";

    svg << "<g id=\"axis\" stroke=\"black\">\n";
    svg << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(y_of(0.0)) << "\" x2=\"" << num(kLeft) << "\" y2=\""
        << num(y_of(1.0)) << "\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double p = 0.25 * k;
        svg << "<line x1=\"" << num(kLeft - 5.0) << "\" y1=\"" << num(y_of(p)) << "\" x2=\"" << num(kLeft)
            << "\" y2=\"" << num(y_of(p)) << "\"/>\n";
        svg << "<text x=\"" << num(kLeft - 8.0) << "\" y=\"" << num(y_of(p) + 4.0)
            << "\" text-anchor=\"end\" stroke=\"none\">" << format_double(p) << "</text>\n";
    }
    svg << "</g>\n";

    const char* palette[] = {"#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3", "#937860"};
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const auto& s = groups[g];
        const double cx = kLeft + kSlot * (static_cast<double>(g) + 0.5);
        const double peak = *std::max_element(s.density.begin(), s.density.end());
        const double scale = peak > 0.0 ? kHalfWidth / peak : 0.0;
        std::ostringstream path;
        path << 'M';
        for (std::size_t k = 0; k < s.grid.size(); ++k) {
            path << (k ? " L" : "") << num(cx + s.density[k] * scale) << ',' << num(y_of(s.grid[k]));
        }
        for (std::size_t k = s.grid.size(); k-- > 0;) {
            path << " L" << num(cx - s.density[k] * scale) << ',' << num(y_of(s.grid[k]));
        }
        path << " Z";
        svg << "<g class=\"violin\" id=\"" << s.group << "\">\n";
        svg << "<path d=\"" << path.str() << "\" fill=\"" << palette[g % 6]
            << "\" fill-opacity=\"0.6\" stroke=\"black\" stroke-width=\"0.8\"/>\n";
        for (double q : {s.q1, s.q3}) {
            svg << "<line x1=\"" << num(cx - 20.0) << "\" y1=\"" << num(y_of(q)) << "\" x2=\"" << num(cx + 20.0)
                << "\" y2=\"" << num(y_of(q)) << "\" stroke=\"black\" stroke-dasharray=\"4,3\"/>\n";
        }
        svg << "<line x1=\"" << num(cx - 30.0) << "\" y1=\"" << num(y_of(s.median)) << "\" x2=\"" << num(cx + 30.0)
            << "\" y2=\"" << num(y_of(s.median)) << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
        svg << "<text x=\"" << num(cx) << "\" y=\"" << num(y_of(0.0) + 20.0) << "\" text-anchor=\"middle\">"
            << s.group << "</text>\n";
        svg << "<text x=\"" << num(cx) << "\" y=\"" << num(y_of(0.0) + 36.0)
            << "\" text-anchor=\"middle\" font-size=\"10\">n = " << s.raw.size() << "</text>\n";
        svg << "</g>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace survkit
