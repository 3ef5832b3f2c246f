#pragma once

#include <string>
#include <vector>

#include "rrmlab/metrics.hpp"

namespace rrm {

std::string format_double(double v);

/// metrics.csv: seed,sum_rate,p5_rate,r_score,mean_reward; one row per environment.
void write_metrics_csv(const std::string& path, const EvalReport& report);
EvalReport read_metrics_csv(const std::string& path);

/// learning_curve.csv: epoch,r_score_mean,sum_rate,p5_rate
void write_learning_curve(const std::string& path, const std::vector<CurvePoint>& curve);
std::vector<CurvePoint> read_learning_curve(const std::string& path);

struct CurveSeries {
    std::string name;
    std::vector<CurvePoint> points;
};

struct Baseline {
    std::string name;
    double r_score = 0.0;
};

/// R_score-vs-epoch line chart: one polyline per series, dashed horizontals for baselines.
std::string render_curves_svg(const std::vector<CurveSeries>& series, const std::vector<Baseline>& baselines,
                              const std::string& title);
void write_text(const std::string& path, const std::string& text);

}  // namespace rrm
