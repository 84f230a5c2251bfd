#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "pwd/core.hpp"
#include "pwd/datagen.hpp"
#include "pwd/models.hpp"
#include "pwd/optimizers.hpp"

namespace pwd {

enum class ExperimentKind { Toy, Bridge, Logreg, Mlp, Scan, PruneBaseline };
enum class OptimizerKind { Sgd, Adam };

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& s);
std::string to_string(OptimizerKind kind);
OptimizerKind optimizer_kind_from_string(const std::string& s);

struct DatasetSpec {
    std::string kind = "blobs";  // "sparse_linear" | "blobs"
    std::size_t n = 2000;
    // sparse_linear
    std::size_t d = 50;
    std::size_t k = 5;
    double noise_std = 0.1;
    // blobs
    std::size_t classes = 4;
    double separation = 3.0;
    double stddev = 1.0;

    bool operator==(const DatasetSpec&) const = default;
};

struct ModelSpec {
    std::string kind = "mlp";  // "linear" | "logreg" | "mlp"
    std::vector<std::size_t> hidden = {16, 16};
    std::string activation = "tanh";

    bool operator==(const ModelSpec&) const = default;
};

struct ToySpec {
    std::string variant = "pwd";  // "naive" | "pwd"
    double w0 = 2.0;

    bool operator==(const ToySpec&) const = default;
};

struct ScanSpec {
    std::vector<double> max_lrs;
    std::vector<double> lambdas;
    std::vector<double> p_values;
    int threads = 0;  // 0 = hardware concurrency

    bool operator==(const ScanSpec&) const = default;
};

struct PruneSpec {
    double threshold = 1e-2;
    long every = 50;
    double start_frac = 0.1;  // pruning starts after this fraction of steps
    double ramp_frac = 0.1;   // threshold ramps from 0 over this fraction
    bool final_prune = true;

    bool operator==(const PruneSpec&) const = default;
};

// Full experiment description. Serializes to a single JSON document with
// every default explicit; parsing starts from the per-kind defaults so a
// partial document is still valid.
struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::Toy;
    std::uint64_t seed = 42;
    std::string out_dir = "out";
    long steps = 2000;
    long log_every = 1;
    OptimizerKind optimizer = OptimizerKind::Sgd;
    double alpha = 0.1;  // learning rate; max_lr when the schedule is on
    bool use_schedule = false;
    long warmup_steps = 0;
    PwdConfig pwd;
    ToySpec toy;
    DatasetSpec dataset;
    ModelSpec model;
    std::size_t batch_size = 0;  // 0 = full batch
    double val_fraction = 0.2;
    double test_fraction = 0.0;
    ScanSpec scan;
    PruneSpec prune;

    static ExperimentConfig defaults(ExperimentKind kind);

    bool operator==(const ExperimentConfig&) const = default;
};

nlohmann::json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const nlohmann::json& j);

// One logged row. acc is a validation accuracy in percent, NaN for
// regression runs; current_p tracks the p-schedule when present.
struct RunRecord {
    long step = 0;
    double eta = 1.0;
    double loss = 0.0;
    double reg_loss = 0.0;
    double sparsity = 0.0;
    double acc = std::numeric_limits<double>::quiet_NaN();
    double current_p = 2.0;
};

struct ScanCellResult {
    std::size_t index = 0;
    double max_lr = 0.0;
    double lambda_p = 0.0;
    double p = 2.0;
    std::string status = "ok";
    double final_acc = std::numeric_limits<double>::quiet_NaN();  // percent
    double final_sparsity = std::numeric_limits<double>::quiet_NaN();
    double tradeoff = std::numeric_limits<double>::quiet_NaN();
    double final_loss = std::numeric_limits<double>::quiet_NaN();
    // regression diagnostics
    double val_mse = std::numeric_limits<double>::quiet_NaN();
    double test_mse = std::numeric_limits<double>::quiet_NaN();
    double zero_rate_true_zeros = std::numeric_limits<double>::quiet_NaN();
    double support_f1 = std::numeric_limits<double>::quiet_NaN();
    std::size_t exact_zeros = 0;
    std::vector<RunRecord> records;
};

struct ScanResult {
    std::vector<ScanCellResult> cells;
};

struct ToyVerdict {
    long sign_changes = 0;
    double min_abs_w = std::numeric_limits<double>::infinity();
    double final_w = 0.0;
    bool converged = false;  // |w| < 1e-8 reached
    long converged_step = -1;
    bool monotone_after_first = true;
    bool nonfinite = false;
};

struct ToyRunResult {
    std::vector<RunRecord> records;
    std::vector<double> trajectory;  // w_0 ... w_steps
    std::vector<double> factors;     // decay factor per step (1.0 for the naive run)
    ToyVerdict verdict;
};

struct BridgeMetrics {
    std::size_t best_cell = 0;
    double val_mse = std::numeric_limits<double>::quiet_NaN();
    double test_mse = std::numeric_limits<double>::quiet_NaN();
    double zero_rate_true_zeros = std::numeric_limits<double>::quiet_NaN();
    double support_f1 = std::numeric_limits<double>::quiet_NaN();
    std::size_t exact_zeros = 0;
};

struct BridgeResult {
    ScanResult scan;
    BridgeMetrics best;
};

ToyRunResult run_toy(const ExperimentConfig& cfg);
BridgeResult run_bridge(const ExperimentConfig& cfg);
ScanResult run_scan(const ExperimentConfig& cfg);
ScanResult run_prune_baseline(const ExperimentConfig& cfg);
// Single training run: a degenerate 1x1 scan at (alpha, lambda_p).
ScanCellResult run_single(const ExperimentConfig& cfg);

// Output helpers. All output is byte-deterministic for a fixed config.
std::string format_double(double v);
void write_text_file(const std::string& path, const std::string& content);
void emit_run_csv(const std::vector<RunRecord>& records, const std::string& path);
nlohmann::json scan_summary_json(const ExperimentConfig& cfg, const ScanResult& scan);
void emit_toy_outputs(const ExperimentConfig& cfg, const ToyRunResult& result);
void emit_scan_outputs(const ExperimentConfig& cfg, const ScanResult& scan);
void emit_bridge_outputs(const ExperimentConfig& cfg, const BridgeResult& result);
std::string line_svg(const std::vector<double>& ys, const std::string& x_label,
                     const std::string& y_label);
std::string scatter_svg(const std::vector<std::array<double, 2>>& points,
                        const std::vector<int>& series, const std::string& x_label,
                        const std::string& y_label);

}  // namespace pwd
