#include "rrmlab/report.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>

#include "rrmlab/errors.hpp"

namespace rrm {

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw FormatError("cannot open for writing: " + path);
    return os;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, sep)) out.push_back(cell);
    return out;
}

double parse_double(const std::string& s, const std::string& path) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw FormatError("bad number '" + s + "' in " + path);
    return v;
}

std::string xml_escape(const std::string& s) {
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

}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

void write_metrics_csv(const std::string& path, const EvalReport& report) {
    std::ofstream os = open_out(path);
    os << "seed,sum_rate,p5_rate,r_score,mean_reward\n";
    for (const EnvEvaluation& e : report.envs) {
        os << e.seed << ',' << format_double(e.sum_rate) << ',' << format_double(e.p5_rate) << ','
           << format_double(e.r_score) << ',' << format_double(e.mean_reward) << '\n';
    }
    if (!os) throw FormatError("failed writing " + path);
}

EvalReport read_metrics_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw FormatError("cannot open " + path);
    EvalReport report;
    std::string line;
    std::getline(is, line);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto cells = split(line, ',');
        if (cells.size() != 5) throw FormatError("metrics row with " + std::to_string(cells.size()) + " cells in " + path);
        EnvEvaluation e;
        e.seed = std::stoull(cells[0]);
        e.sum_rate = parse_double(cells[1], path);
        e.p5_rate = parse_double(cells[2], path);
        e.r_score = parse_double(cells[3], path);
        e.mean_reward = parse_double(cells[4], path);
        report.envs.push_back(e);
    }
    return report;
}

void write_learning_curve(const std::string& path, const std::vector<CurvePoint>& curve) {
    std::ofstream os = open_out(path);
    os << "epoch,r_score_mean,sum_rate,p5_rate\n";
    for (const CurvePoint& p : curve) {
        os << p.epoch << ',' << format_double(p.r_score) << ',' << format_double(p.sum_rate) << ','
           << format_double(p.p5_rate) << '\n';
    }
    if (!os) throw FormatError("failed writing " + path);
}

std::vector<CurvePoint> read_learning_curve(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw FormatError("cannot open " + path);
    std::vector<CurvePoint> curve;
    std::string line;
    std::getline(is, line);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto cells = split(line, ',');
        if (cells.size() != 4) throw FormatError("learning-curve row with wrong arity in " + path);
        curve.push_back({std::stoi(cells[0]), parse_double(cells[1], path), parse_double(cells[2], path),
                         parse_double(cells[3], path)});
    }
    return curve;
}

std::string render_curves_svg(const std::vector<CurveSeries>& series, const std::vector<Baseline>& baselines,
                              const std::string& title) {
    constexpr double kW = 720, kH = 440, kLeft = 70, kRight = 170, kTop = 40, kBottom = 50;
    static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                     "#8c564b", "#e377c2", "#17becf", "#7f7f7f", "#bcbd22"};
    double x_max = 1.0;
    double y_min = std::numeric_limits<double>::infinity();
    double y_max = -std::numeric_limits<double>::infinity();
    for (const CurveSeries& s : series) {
        for (const CurvePoint& p : s.points) {
            x_max = std::max(x_max, static_cast<double>(p.epoch));
            y_min = std::min(y_min, p.r_score);
            y_max = std::max(y_max, p.r_score);
        }
    }
    for (const Baseline& b : baselines) {
        y_min = std::min(y_min, b.r_score);
        y_max = std::max(y_max, b.r_score);
    }
    if (!std::isfinite(y_min)) {
        y_min = 0.0;
        y_max = 1.0;
    }
    if (y_max - y_min < 1e-9) y_max = y_min + 1.0;
    const double pad = 0.05 * (y_max - y_min);
    y_min -= pad;
    y_max += pad;
    const double pw = kW - kLeft - kRight;
    const double ph = kH - kTop - kBottom;
    auto sx = [&](double x) { return kLeft + pw * x / x_max; };
    auto sy = [&](double y) { return kTop + ph * (1.0 - (y - y_min) / (y_max - y_min)); };

    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
       << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << "<text x=\"" << kLeft << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\">" << xml_escape(title)
       << "</text>\n"
       << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double v = y_min + (y_max - y_min) * i / 4.0;
        os << "<text x=\"" << kLeft - 6 << "\" y=\"" << sy(v) + 4
           << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">" << format_double(std::round(v * 100) / 100)
           << "</text>\n";
    }
    os << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kH - 12
       << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">epoch (max "
       << format_double(x_max) << ")</text>\n";
    std::size_t color = 0;
    double legend_y = kTop + 10;
    auto legend = [&](const std::string& name, const char* stroke, bool dashed) {
        os << "<line x1=\"" << kW - kRight + 10 << "\" y1=\"" << legend_y << "\" x2=\"" << kW - kRight + 34
           << "\" y2=\"" << legend_y << "\" stroke=\"" << stroke << "\" stroke-width=\"2\""
           << (dashed ? " stroke-dasharray=\"6,4\"" : "") << "/>\n"
           << "<text x=\"" << kW - kRight + 40 << "\" y=\"" << legend_y + 4
           << "\" font-family=\"sans-serif\" font-size=\"11\">" << xml_escape(name) << "</text>\n";
        legend_y += 18;
    };
    for (const CurveSeries& s : series) {
        const char* stroke = kPalette[color++ % std::size(kPalette)];
        os << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"2\" points=\"";
        for (const CurvePoint& p : s.points) os << sx(p.epoch) << ',' << sy(p.r_score) << ' ';
        os << "\"/>\n";
        legend(s.name, stroke, false);
    }
    for (const Baseline& b : baselines) {
        const char* stroke = kPalette[color++ % std::size(kPalette)];
        os << "<line x1=\"" << kLeft << "\" y1=\"" << sy(b.r_score) << "\" x2=\"" << kLeft + pw << "\" y2=\""
           << sy(b.r_score) << "\" stroke=\"" << stroke << "\" stroke-width=\"1.5\" stroke-dasharray=\"6,4\"/>\n";
        legend(b.name, stroke, true);
    }
    os << "</svg>\n";
    return os.str();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream os = open_out(path);
    os << text;
    if (!os) throw FormatError("failed writing " + path);
}

}  // namespace rrm
