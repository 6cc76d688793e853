#include "cmm/app/svg.hpp"

#include "cmm/common.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace cmm::app::svg {

namespace {

constexpr double kLeft = 78.0, kRight = 78.0, kTop = 40.0, kBottom = 58.0;

std::string escape(const std::string& text)
{
    std::string out;
    for (char c : text) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

struct Axis {
    double lo = 0.0, hi = 1.0;
    bool log = false;

    double norm(double v) const
    {
        if (log)
            return (std::log10(v) - std::log10(lo)) / (std::log10(hi) - std::log10(lo));
        return (v - lo) / (hi - lo);
    }

    std::vector<double> ticks() const
    {
        std::vector<double> out;
        if (log) {
            for (double e = std::floor(std::log10(lo)); e <= std::ceil(std::log10(hi)); e += 1.0) {
                const double v = std::pow(10.0, e);
                if (v >= lo * (1 - 1e-9) && v <= hi * (1 + 1e-9))
                    out.push_back(v);
            }
            return out;
        }
        const double raw = (hi - lo) / 6.0;
        const double mag = std::pow(10.0, std::floor(std::log10(raw)));
        double step = mag;
        for (double m : {1.0, 2.0, 2.5, 5.0, 10.0}) {
            step = m * mag;
            if (raw <= step)
                break;
        }
        for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step)
            out.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
        return out;
    }
};

Axis fit_axis(std::vector<double> values, bool log, std::optional<std::pair<double, double>> range)
{
    Axis a;
    a.log = log;
    if (range) {
        a.lo = range->first;
        a.hi = range->second;
        return a;
    }
    if (log)
        std::erase_if(values, [](double v) { return !(v > 0.0); });
    std::erase_if(values, [](double v) { return !std::isfinite(v); });
    if (values.empty()) {
        a.lo = log ? 1.0 : 0.0;
        a.hi = log ? 10.0 : 1.0;
        return a;
    }
    const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    a.lo = *mn;
    a.hi = *mx;
    if (log) {
        a.lo = std::pow(10.0, std::floor(std::log10(a.lo)));
        a.hi = std::pow(10.0, std::ceil(std::log10(a.hi)));
        if (a.hi <= a.lo)
            a.hi = a.lo * 10.0;
        return a;
    }
    if (a.hi == a.lo) {
        const double pad = a.lo == 0.0 ? 1.0 : 0.1 * std::abs(a.lo);
        a.lo -= pad;
        a.hi += pad;
    } else {
        const double pad = 0.05 * (a.hi - a.lo);
        a.lo -= pad;
        a.hi += pad;
    }
    return a;
}

std::string tick_label(double v)
{
    return fmt::format("{:.4g}", v);
}

} // namespace

std::string colormap(double t)
{
    static constexpr std::array<std::array<double, 3>, 5> stops{{
        {68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}}};
    t = std::clamp(std::isfinite(t) ? t : 0.0, 0.0, 1.0) * (stops.size() - 1);
    const auto i = std::min<std::size_t>(static_cast<std::size_t>(t), stops.size() - 2);
    const double f = t - static_cast<double>(i);
    int rgb[3];
    for (int c = 0; c < 3; ++c)
        rgb[c] = static_cast<int>(std::lround(stops[i][c] + f * (stops[i + 1][c] - stops[i][c])));
    return fmt::format("#{:02x}{:02x}{:02x}", rgb[0], rgb[1], rgb[2]);
}

std::string Plot::render() const
{
    std::vector<double> xs, ys, ys2, cs;
    bool has_secondary = false, has_color = false;
    for (const auto& s : series) {
        xs.insert(xs.end(), s.x.begin(), s.x.end());
        auto& target = s.secondary_axis ? ys2 : ys;
        for (std::size_t i = 0; i < s.y.size(); ++i) {
            const double e = i < s.y_err.size() ? s.y_err[i] : 0.0;
            target.push_back(s.y[i] + e);
            target.push_back(log_y && !s.secondary_axis && s.y[i] - e <= 0.0 ? s.y[i] : s.y[i] - e);
        }
        if (s.style == Style::Stem && !s.secondary_axis && !log_y)
            ys.push_back(0.0);
        has_secondary |= s.secondary_axis;
        if (s.style == Style::ColorMarkers) {
            has_color = true;
            cs.insert(cs.end(), s.color_value.begin(), s.color_value.end());
        }
    }
    const Axis ax = fit_axis(xs, log_x, x_range);
    const Axis ay = fit_axis(ys, log_y, y_range);
    const Axis ay2 = fit_axis(ys2, false, std::nullopt);
    double c_lo = 0.0, c_hi = 1.0;
    if (!cs.empty()) {
        c_lo = *std::min_element(cs.begin(), cs.end());
        c_hi = *std::max_element(cs.begin(), cs.end());
        if (c_hi == c_lo)
            c_hi = c_lo + 1.0;
    }

    const double right = kRight + (has_color ? 40.0 : 0.0);
    const double pw = width - kLeft - right, ph = height - kTop - kBottom;
    auto px = [&](double v) { return kLeft + ax.norm(v) * pw; };
    auto py = [&](const Axis& a, double v) { return kTop + (1.0 - a.norm(v)) * ph; };
    auto visible = [&](const Axis& a, double v) { return std::isfinite(v) && (!a.log || v > 0.0); };

    std::string out;
    out += fmt::format(R"(<svg xmlns="http://www.w3.org/2000/svg" width="{:.0f}" height="{:.0f}" )"
                       R"(viewBox="0 0 {:.0f} {:.0f}" font-family="sans-serif" font-size="12">)"
                       "\n",
                       width, height, width, height);
    out += fmt::format(R"(<rect x="0" y="0" width="{:.0f}" height="{:.0f}" fill="white"/>)"
                       "\n",
                       width, height);
    out += fmt::format(R"(<text x="{:.1f}" y="22" text-anchor="middle" font-size="14">{}</text>)"
                       "\n",
                       kLeft + pw / 2, escape(title));
    out += fmt::format(R"(<defs><clipPath id="plot"><rect x="{:.1f}" y="{:.1f}" width="{:.1f}" height="{:.1f}"/></clipPath></defs>)"
                       "\n",
                       kLeft, kTop, pw, ph);
    out += fmt::format(R"(<rect x="{:.1f}" y="{:.1f}" width="{:.1f}" height="{:.1f}" fill="none" stroke="black"/>)"
                       "\n",
                       kLeft, kTop, pw, ph);

    for (double t : ax.ticks()) {
        const double x = px(t);
        out += fmt::format(R"(<line x1="{0:.1f}" y1="{1:.1f}" x2="{0:.1f}" y2="{2:.1f}" stroke="#dddddd"/>)"
                           "\n",
                           x, kTop, kTop + ph);
        out += fmt::format(R"(<text x="{:.1f}" y="{:.1f}" text-anchor="middle">{}</text>)"
                           "\n",
                           x, kTop + ph + 16, tick_label(t));
    }
    for (double t : ay.ticks()) {
        const double y = py(ay, t);
        out += fmt::format(R"(<line x1="{0:.1f}" y1="{1:.1f}" x2="{2:.1f}" y2="{1:.1f}" stroke="#dddddd"/>)"
                           "\n",
                           kLeft, y, kLeft + pw);
        out += fmt::format(R"(<text x="{:.1f}" y="{:.1f}" text-anchor="end">{}</text>)"
                           "\n",
                           kLeft - 6, y + 4, tick_label(t));
    }
    if (has_secondary) {
        for (double t : ay2.ticks())
            out += fmt::format(R"(<text x="{:.1f}" y="{:.1f}" text-anchor="start" fill="#777777">{}</text>)"
                               "\n",
                               kLeft + pw + 6, py(ay2, t) + 4, tick_label(t));
        out += fmt::format(R"~(<text transform="translate({:.1f},{:.1f}) rotate(90)" text-anchor="middle" fill="#777777">{}</text>)~"
                           "\n",
                           width - right + 58, kTop + ph / 2, escape(y2_label));
    }
    out += fmt::format(R"(<text x="{:.1f}" y="{:.1f}" text-anchor="middle">{}</text>)"
                       "\n",
                       kLeft + pw / 2, height - 14, escape(x_label));
    out += fmt::format(R"~(<text transform="translate(18,{:.1f}) rotate(-90)" text-anchor="middle">{}</text>)~"
                       "\n",
                       kTop + ph / 2, escape(y_label));

    out += "<g clip-path=\"url(#plot)\">\n";
    for (const auto& s : series) {
        const Axis& a = s.secondary_axis ? ay2 : ay;
        const std::string dash = s.dashed ? R"( stroke-dasharray="6,4")" : "";
        switch (s.style) {
        case Style::Line: {
            std::string points;
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (!visible(ax, s.x[i]) || !visible(a, s.y[i]))
                    continue;
                points += fmt::format("{:.2f},{:.2f} ", px(s.x[i]), py(a, s.y[i]));
            }
            out += fmt::format(R"(<polyline fill="none" stroke="{}" stroke-width="1.8"{} points="{}"/>)"
                               "\n",
                               s.color, dash, points);
            break;
        }
        case Style::Stem: {
            const double base = a.log ? a.lo : std::clamp(0.0, a.lo, a.hi);
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (!visible(ax, s.x[i]) || !visible(a, s.y[i]))
                    continue;
                const double x = px(s.x[i]);
                out += fmt::format(R"(<line x1="{0:.2f}" y1="{1:.2f}" x2="{0:.2f}" y2="{2:.2f}" stroke="{3}" stroke-width="1.5"/>)"
                                   R"(<circle cx="{0:.2f}" cy="{2:.2f}" r="3" fill="{3}"/>)"
                                   "\n",
                                   x, py(a, base), py(a, s.y[i]), s.color);
            }
            break;
        }
        case Style::Markers:
        case Style::ColorMarkers: {
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (!visible(ax, s.x[i]) || !visible(a, s.y[i]))
                    continue;
                const double x = px(s.x[i]), y = py(a, s.y[i]);
                if (i < s.y_err.size() && s.y_err[i] > 0.0) {
                    const double lo = a.log ? std::max(s.y[i] - s.y_err[i], a.lo) : s.y[i] - s.y_err[i];
                    out += fmt::format(R"(<line x1="{0:.2f}" y1="{1:.2f}" x2="{0:.2f}" y2="{2:.2f}" stroke="{3}"/>)"
                                       "\n",
                                       x, py(a, lo), py(a, s.y[i] + s.y_err[i]), s.color);
                }
                const std::string fill = s.style == Style::ColorMarkers && i < s.color_value.size()
                                             ? colormap((s.color_value[i] - c_lo) / (c_hi - c_lo))
                                             : s.color;
                const double r = s.style == Style::ColorMarkers ? 1.6 : 3.5;
                out += fmt::format(R"(<circle cx="{:.2f}" cy="{:.2f}" r="{}" fill="{}"/>)"
                                   "\n",
                                   x, y, r, fill);
            }
            break;
        }
        }
    }
    out += "</g>\n";

    if (has_color) {
        const double bx = width - right + 14, bw = 14;
        for (int i = 0; i < 50; ++i) {
            const double t = i / 49.0;
            out += fmt::format(R"(<rect x="{:.1f}" y="{:.2f}" width="{:.1f}" height="{:.2f}" fill="{}"/>)"
                               "\n",
                               bx, kTop + (1.0 - t) * ph - ph / 50.0, bw, ph / 50.0 + 0.5, colormap(t));
        }
        out += fmt::format(R"(<text x="{:.1f}" y="{:.1f}">{}</text>)"
                           "\n",
                           bx, kTop - 6, tick_label(c_hi));
        out += fmt::format(R"(<text x="{:.1f}" y="{:.1f}">{}</text>)"
                           "\n",
                           bx, kTop + ph + 14, tick_label(c_lo));
        out += fmt::format(R"~(<text transform="translate({:.1f},{:.1f}) rotate(90)" text-anchor="middle">{}</text>)~"
                           "\n",
                           bx + bw + 14, kTop + ph / 2, escape(color_label));
    }

    double ly = kTop + 14;
    for (const auto& s : series) {
        if (s.label.empty())
            continue;
        const double lx = kLeft + 10;
        const std::string dash = s.dashed ? R"( stroke-dasharray="6,4")" : "";
        out += fmt::format(R"(<line x1="{:.1f}" y1="{:.1f}" x2="{:.1f}" y2="{:.1f}" stroke="{}" stroke-width="2"{}/>)"
                           R"(<text x="{:.1f}" y="{:.1f}">{}</text>)"
                           "\n",
                           lx, ly - 4, lx + 22, ly - 4, s.color, dash, lx + 28, ly, escape(s.label));
        ly += 16;
    }
    out += "</svg>\n";
    return out;
}

} // namespace cmm::app::svg
