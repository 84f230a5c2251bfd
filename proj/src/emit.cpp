#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "pwd/harness.hpp"

namespace pwd {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path);
}

void emit_run_csv(const std::vector<RunRecord>& records, const std::string& path) {
    std::string out = "step,eta,loss,reg_loss,sparsity,acc\n";
    for (const auto& r : records) {
        out += std::to_string(r.step);
        out += ',';
        out += format_double(r.eta);
        out += ',';
        out += format_double(r.loss);
        out += ',';
        out += format_double(r.reg_loss);
        out += ',';
        out += format_double(r.sparsity);
        out += ',';
        out += format_double(r.acc);
        out += '\n';
    }
    write_text_file(path, out);
}

namespace {

nlohmann::json number_or_null(double v) {
    if (std::isnan(v)) return nullptr;
    return v;
}

std::string cell_csv_name(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "cell_%03zu.csv", index);
    return buf;
}

}  // namespace

nlohmann::json scan_summary_json(const ExperimentConfig& cfg, const ScanResult& scan) {
    nlohmann::json j;
    j["config_echo"] = config_to_json(cfg);
    auto cells = nlohmann::json::array();
    for (const auto& c : scan.cells) {
        nlohmann::json cj;
        cj["max_lr"] = c.max_lr;
        cj["lambda_p"] = c.lambda_p;
        cj["p"] = c.p;
        cj["final_acc"] = number_or_null(c.final_acc);
        cj["final_sparsity"] = number_or_null(c.final_sparsity);
        cj["tradeoff"] = number_or_null(c.tradeoff);
        cj["status"] = c.status;
        if (!std::isnan(c.val_mse)) {
            cj["val_mse"] = c.val_mse;
            cj["test_mse"] = number_or_null(c.test_mse);
            cj["zero_rate_true_zeros"] = number_or_null(c.zero_rate_true_zeros);
            cj["support_f1"] = number_or_null(c.support_f1);
            cj["exact_zeros"] = c.exact_zeros;
        }
        cells.push_back(cj);
    }
    j["cells"] = cells;
    return j;
}

void emit_toy_outputs(const ExperimentConfig& cfg, const ToyRunResult& result) {
    const std::filesystem::path dir(cfg.out_dir);
    emit_run_csv(result.records, (dir / "run.csv").string());

    nlohmann::json j;
    j["config_echo"] = config_to_json(cfg);
    j["verdict"] = {{"sign_changes", result.verdict.sign_changes},
                    {"min_abs_w", number_or_null(result.verdict.min_abs_w)},
                    {"final_w", number_or_null(result.verdict.final_w)},
                    {"converged", result.verdict.converged},
                    {"converged_step", result.verdict.converged_step},
                    {"monotone_after_first", result.verdict.monotone_after_first},
                    {"nonfinite", result.verdict.nonfinite}};
    write_text_file((dir / "summary.json").string(), j.dump(2) + "\n");
    write_text_file((dir / "trajectory.svg").string(),
                    line_svg(result.trajectory, "step", "w"));
}

void emit_scan_outputs(const ExperimentConfig& cfg, const ScanResult& scan) {
    const std::filesystem::path dir(cfg.out_dir);
    write_text_file((dir / "summary.json").string(),
                    scan_summary_json(cfg, scan).dump(2) + "\n");
    for (const auto& c : scan.cells) {
        emit_run_csv(c.records, (dir / cell_csv_name(c.index)).string());
    }

    // Accuracy vs sparsity scatter over the completed classification cells,
    // one series per distinct p.
    std::vector<std::array<double, 2>> points;
    std::vector<int> series;
    std::vector<double> p_seen;
    for (const auto& c : scan.cells) {
        if (c.status != "ok" || std::isnan(c.final_acc) || std::isnan(c.final_sparsity)) continue;
        int s = -1;
        for (std::size_t i = 0; i < p_seen.size(); ++i) {
            if (p_seen[i] == c.p) s = static_cast<int>(i);
        }
        if (s < 0) {
            s = static_cast<int>(p_seen.size());
            p_seen.push_back(c.p);
        }
        points.push_back({c.final_sparsity, c.final_acc});
        series.push_back(s);
    }
    if (!points.empty()) {
        write_text_file((dir / "scatter.svg").string(),
                        scatter_svg(points, series, "sparsity", "val acc [%]"));
    }
}

void emit_bridge_outputs(const ExperimentConfig& cfg, const BridgeResult& result) {
    const std::filesystem::path dir(cfg.out_dir);
    nlohmann::json j = scan_summary_json(cfg, result.scan);
    j["recovery"] = {{"best_cell", result.best.best_cell},
                     {"val_mse", number_or_null(result.best.val_mse)},
                     {"test_mse", number_or_null(result.best.test_mse)},
                     {"zero_rate_true_zeros", number_or_null(result.best.zero_rate_true_zeros)},
                     {"support_f1", number_or_null(result.best.support_f1)},
                     {"exact_zeros", result.best.exact_zeros}};
    write_text_file((dir / "summary.json").string(), j.dump(2) + "\n");
    for (const auto& c : result.scan.cells) {
        emit_run_csv(c.records, (dir / cell_csv_name(c.index)).string());
    }
}

namespace {

constexpr int kWidth = 640;
constexpr int kHeight = 400;
constexpr int kMargin = 50;

std::string svg_header() {
    return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
           "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" "
           "viewBox=\"0 0 640 400\">\n"
           "<rect width=\"640\" height=\"400\" fill=\"white\"/>\n";
}

std::string svg_axes(double x_min, double x_max, double y_min, double y_max,
                     const std::string& x_label, const std::string& y_label) {
    std::string s;
    s += "<line x1=\"50\" y1=\"350\" x2=\"590\" y2=\"350\" stroke=\"black\"/>\n";
    s += "<line x1=\"50\" y1=\"50\" x2=\"50\" y2=\"350\" stroke=\"black\"/>\n";
    s += "<text x=\"320\" y=\"390\" text-anchor=\"middle\" font-size=\"14\">" + x_label +
         "</text>\n";
    s += "<text x=\"15\" y=\"200\" text-anchor=\"middle\" font-size=\"14\" "
         "transform=\"rotate(-90 15 200)\">" +
         y_label + "</text>\n";
    s += "<text x=\"50\" y=\"368\" text-anchor=\"middle\" font-size=\"11\">" +
         format_double(x_min) + "</text>\n";
    s += "<text x=\"590\" y=\"368\" text-anchor=\"middle\" font-size=\"11\">" +
         format_double(x_max) + "</text>\n";
    s += "<text x=\"45\" y=\"354\" text-anchor=\"end\" font-size=\"11\">" + format_double(y_min) +
         "</text>\n";
    s += "<text x=\"45\" y=\"54\" text-anchor=\"end\" font-size=\"11\">" + format_double(y_max) +
         "</text>\n";
    return s;
}

double scale_x(double v, double lo, double hi) {
    const double span = hi > lo ? hi - lo : 1.0;
    return kMargin + (v - lo) / span * (kWidth - 2 * kMargin);
}

double scale_y(double v, double lo, double hi) {
    const double span = hi > lo ? hi - lo : 1.0;
    return (kHeight - kMargin) - (v - lo) / span * (kHeight - 2 * kMargin);
}

std::string format_coord(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

const std::array<const char*, 6> kPalette = {"#1f77b4", "#ff7f0e", "#2ca02c",
                                             "#d62728", "#9467bd", "#8c564b"};

}  // namespace

std::string line_svg(const std::vector<double>& ys, const std::string& x_label,
                     const std::string& y_label) {
    double y_min = 0.0, y_max = 1.0;
    if (!ys.empty()) {
        y_min = y_max = ys[0];
        for (double y : ys) {
            y_min = std::min(y_min, y);
            y_max = std::max(y_max, y);
        }
        if (y_min == y_max) {
            y_min -= 0.5;
            y_max += 0.5;
        }
    }
    const double x_max = ys.size() > 1 ? static_cast<double>(ys.size() - 1) : 1.0;

    std::string s = svg_header();
    s += svg_axes(0.0, x_max, y_min, y_max, x_label, y_label);
    s += "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < ys.size(); ++i) {
        if (i) s += ' ';
        s += format_coord(scale_x(static_cast<double>(i), 0.0, x_max));
        s += ',';
        s += format_coord(scale_y(ys[i], y_min, y_max));
    }
    s += "\"/>\n</svg>\n";
    return s;
}

std::string scatter_svg(const std::vector<std::array<double, 2>>& points,
                        const std::vector<int>& series, const std::string& x_label,
                        const std::string& y_label) {
    if (points.size() != series.size()) {
        throw std::invalid_argument("scatter_svg: series size mismatch");
    }
    double x_min = 0.0, x_max = 1.0, y_min = 0.0, y_max = 1.0;
    if (!points.empty()) {
        x_min = x_max = points[0][0];
        y_min = y_max = points[0][1];
        for (const auto& p : points) {
            x_min = std::min(x_min, p[0]);
            x_max = std::max(x_max, p[0]);
            y_min = std::min(y_min, p[1]);
            y_max = std::max(y_max, p[1]);
        }
        if (x_min == x_max) {
            x_min -= 0.5;
            x_max += 0.5;
        }
        if (y_min == y_max) {
            y_min -= 0.5;
            y_max += 0.5;
        }
    }
    std::string s = svg_header();
    s += svg_axes(x_min, x_max, y_min, y_max, x_label, y_label);
    for (std::size_t i = 0; i < points.size(); ++i) {
        const char* color = kPalette[static_cast<std::size_t>(series[i]) % kPalette.size()];
        s += "<circle cx=\"" + format_coord(scale_x(points[i][0], x_min, x_max)) + "\" cy=\"" +
             format_coord(scale_y(points[i][1], y_min, y_max)) + "\" r=\"4\" fill=\"" + color +
             "\" fill-opacity=\"0.8\"/>\n";
    }
    s += "</svg>\n";
    return s;
}

}  // namespace pwd
