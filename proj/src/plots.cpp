#include "elaprobe/plots.hpp"

#include "elaprobe/stats.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <string_view>

namespace elaprobe::plots {

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string header(double w, double h) {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(w) + "\" height=\"" + num(h) +
           "\" viewBox=\"0 0 " + num(w) + " " + num(h) + "\" font-family=\"sans-serif\">\n" +
           "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

std::string text(double x, double y, std::string_view s, int size = 12, std::string_view anchor = "middle",
                 std::string_view fill = "black") {
    return "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-size=\"" + std::to_string(size) +
           "\" text-anchor=\"" + std::string(anchor) + "\" fill=\"" + std::string(fill) + "\">" + escape(s) +
           "</text>\n";
}

std::string rect(double x, double y, double w, double h, std::string_view fill, std::string_view stroke = "none") {
    return "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) + "\" height=\"" + num(h) +
           "\" fill=\"" + std::string(fill) + "\" stroke=\"" + std::string(stroke) + "\"/>\n";
}

std::string line(double x1, double y1, double x2, double y2, std::string_view stroke = "black") {
    return "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) + "\" y2=\"" + num(y2) +
           "\" stroke=\"" + std::string(stroke) + "\"/>\n";
}

// Piecewise-linear viridis approximation; t in [0, 1].
std::string colour(double t) {
    static constexpr std::array<std::array<double, 3>, 5> stops = {
        {{68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}}};
    if (!std::isfinite(t)) return "#cccccc";
    t = std::clamp(t, 0.0, 1.0) * 4.0;
    const auto i = std::min<std::size_t>(3, static_cast<std::size_t>(t));
    const double f = t - static_cast<double>(i);
    char buf[8];
    int rgb[3];
    for (int c = 0; c < 3; ++c) rgb[c] = static_cast<int>(std::lround(stops[i][c] + f * (stops[i + 1][c] - stops[i][c])));
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
    return buf;
}

std::string_view label_fill(double t) { return std::isfinite(t) && t > 0.6 ? "black" : "white"; }

}  // namespace

std::string heatmap_svg(const Eigen::MatrixXd& values, std::span<const sampling::Strategy> strategies,
                        const std::string& title) {
    const double cell = 70.0, left = 110.0, top = 60.0;
    const auto m = static_cast<double>(strategies.size());
    std::string out = header(left + m * cell + 20.0, top + m * cell + 50.0);
    out += text(left + m * cell / 2.0, 22.0, title, 15);
    out += text(left + m * cell / 2.0, 42.0, "test strategy", 11);
    for (std::size_t j = 0; j < strategies.size(); ++j)
        out += text(left + (static_cast<double>(j) + 0.5) * cell, top - 4.0, sampling::to_string(strategies[j]), 10);
    for (std::size_t i = 0; i < strategies.size(); ++i) {
        const double y = top + static_cast<double>(i) * cell;
        out += text(left - 6.0, y + cell / 2.0 + 4.0, sampling::to_string(strategies[i]), 10, "end");
        for (std::size_t j = 0; j < strategies.size(); ++j) {
            const double v = values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            const double x = left + static_cast<double>(j) * cell;
            out += rect(x, y, cell, cell, colour(v), "white");
            out += text(x + cell / 2.0, y + cell / 2.0 + 4.0, std::isfinite(v) ? num(100.0 * v) : "n/a", 12, "middle",
                        label_fill(v));
        }
    }
    out += text(left + m * cell / 2.0, top + m * cell + 30.0, "rows: train strategy, values: median accuracy (%)", 11);
    out += "</svg>\n";
    return out;
}

std::string histogram_panel_svg(std::span<const Series> panels, const std::string& title, int columns, int bins) {
    columns = std::max(1, std::min<int>(columns, static_cast<int>(std::max<std::size_t>(1, panels.size()))));
    bins = std::max(1, bins);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& p : panels)
        for (double v : p.values)
            if (std::isfinite(v)) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
    if (!(lo <= hi)) lo = 0.0, hi = 1.0;
    if (lo == hi) lo -= 0.5, hi += 0.5;

    const double pw = 200.0, ph = 150.0, pad = 30.0, top = 40.0;
    const int rows = static_cast<int>((panels.size() + static_cast<std::size_t>(columns) - 1) / static_cast<std::size_t>(columns));
    std::string out = header(columns * (pw + pad) + pad, top + std::max(1, rows) * (ph + pad + 20.0));
    out += text((columns * (pw + pad) + pad) / 2.0, 22.0, title, 14);
    for (std::size_t k = 0; k < panels.size(); ++k) {
        const double x0 = pad + static_cast<double>(k % static_cast<std::size_t>(columns)) * (pw + pad);
        const double y0 = top + static_cast<double>(k / static_cast<std::size_t>(columns)) * (ph + pad + 20.0) + 16.0;
        std::vector<int> counts(static_cast<std::size_t>(bins), 0);
        for (double v : panels[k].values) {
            if (!std::isfinite(v)) continue;
            auto b = static_cast<int>((v - lo) / (hi - lo) * bins);
            ++counts[static_cast<std::size_t>(std::clamp(b, 0, bins - 1))];
        }
        const int peak = std::max(1, *std::max_element(counts.begin(), counts.end()));
        out += text(x0 + pw / 2.0, y0 - 4.0, panels[k].label, 11);
        out += rect(x0, y0, pw, ph, "none", "#888888");
        const double bw = pw / bins;
        for (int b = 0; b < bins; ++b) {
            const double h = ph * counts[static_cast<std::size_t>(b)] / peak;
            if (h > 0.0) out += rect(x0 + b * bw, y0 + ph - h, bw, h, "#3b528b", "white");
        }
        out += text(x0, y0 + ph + 14.0, num(lo), 9, "start");
        out += text(x0 + pw, y0 + ph + 14.0, num(hi), 9, "end");
    }
    out += "</svg>\n";
    return out;
}

std::string confusion_svg(const classify::ConfusionMatrix& cm, const std::string& title) {
    const auto m = static_cast<Eigen::Index>(cm.labels.size());
    const double cell = 26.0, left = 50.0, top = 60.0;
    std::string out = header(left + m * cell + 20.0, top + m * cell + 40.0);
    out += text(left + m * cell / 2.0, 22.0, title, 14);
    out += text(left + m * cell / 2.0, 40.0, "predicted", 11);
    auto name = [&](Eigen::Index i) {
        const int l = cm.labels[static_cast<std::size_t>(i)];
        char buf[16];
        std::snprintf(buf, sizeof buf, "f%02d", l);
        return std::string(buf);
    };
    for (Eigen::Index j = 0; j < m; ++j) out += text(left + (j + 0.5) * cell, top - 4.0, name(j), 8);
    for (Eigen::Index i = 0; i < m; ++i) {
        const double y = top + i * cell;
        out += text(left - 4.0, y + cell / 2.0 + 3.0, name(i), 8, "end");
        const double row = cm.counts.row(i).cast<double>().sum();
        for (Eigen::Index j = 0; j < m; ++j) {
            const double share = row > 0 ? cm.counts(i, j) / row : 0.0;
            const double x = left + j * cell;
            out += rect(x, y, cell, cell, colour(share), "white");
            if (share > 0.01) {
                char buf[8];
                std::snprintf(buf, sizeof buf, "%.0f", 100.0 * share);
                out += text(x + cell / 2.0, y + cell / 2.0 + 3.0, buf, 8, "middle", label_fill(share));
            }
        }
    }
    out += text(left + m * cell / 2.0, top + m * cell + 24.0, "rows: true function, values: % of row (> 1% shown)", 10);
    out += "</svg>\n";
    return out;
}

std::string boxplot_svg(std::span<const Series> groups, const std::string& title) {
    const double gw = 46.0, left = 50.0, top = 40.0, ph = 260.0;
    const double width = left + static_cast<double>(groups.size()) * gw + 20.0;
    std::string out = header(width, top + ph + 130.0);
    out += text(width / 2.0, 22.0, title, 14);
    auto ypos = [&](double v) { return top + ph * (1.0 - std::clamp(v, 0.0, 1.0)); };
    for (int t = 0; t <= 10; t += 2) {
        const double v = t / 10.0;
        out += line(left - 4.0, ypos(v), width - 20.0, ypos(v), "#dddddd");
        out += text(left - 6.0, ypos(v) + 4.0, num(v), 9, "end");
    }
    for (std::size_t g = 0; g < groups.size(); ++g) {
        std::vector<double> v;
        for (double x : groups[g].values)
            if (std::isfinite(x)) v.push_back(x);
        const double cx = left + (static_cast<double>(g) + 0.5) * gw;
        if (!v.empty()) {
            const double q1 = stats::quantile(v, 0.25), q3 = stats::quantile(v, 0.75), med = stats::median(v);
            const double reach = 1.5 * (q3 - q1);
            double wlo = q1, whi = q3;
            for (double x : v) {
                if (x >= q1 - reach) wlo = std::min(wlo, x);
                if (x <= q3 + reach) whi = std::max(whi, x);
            }
            out += line(cx, ypos(wlo), cx, ypos(q1));
            out += line(cx, ypos(q3), cx, ypos(whi));
            out += rect(cx - gw * 0.3, ypos(q3), gw * 0.6, std::max(0.5, ypos(q1) - ypos(q3)), "#5ec962", "black");
            out += line(cx - gw * 0.3, ypos(med), cx + gw * 0.3, ypos(med));
        }
        out += "<text x=\"" + num(cx) + "\" y=\"" + num(top + ph + 12.0) + "\" font-size=\"9\" text-anchor=\"end\" transform=\"rotate(-60 " +
               num(cx) + " " + num(top + ph + 12.0) + ")\">" + escape(groups[g].label) + "</text>\n";
    }
    out += "</svg>\n";
    return out;
}

std::string bar_svg(std::span<const std::string> labels, std::span<const double> values, const std::string& title) {
    const double left = 120.0, bar = 24.0, top = 40.0, width = 300.0;
    std::string out = header(left + width + 80.0, top + static_cast<double>(labels.size()) * (bar + 8.0) + 20.0);
    out += text((left + width + 80.0) / 2.0, 22.0, title, 14);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const double y = top + static_cast<double>(i) * (bar + 8.0);
        const double v = i < values.size() && std::isfinite(values[i]) ? std::clamp(values[i], 0.0, 1.0) : 0.0;
        out += text(left - 6.0, y + bar / 2.0 + 4.0, labels[i], 11, "end");
        out += rect(left, y, width * v, bar, "#21918c");
        out += text(left + width * v + 6.0, y + bar / 2.0 + 4.0, num(100.0 * v) + "%", 11, "start");
    }
    out += "</svg>\n";
    return out;
}

}  // namespace elaprobe::plots
