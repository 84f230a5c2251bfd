#include "pwd/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <thread>

#include "pwd/regularizers.hpp"
#include "pwd/verification.hpp"

namespace pwd {

std::string to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::Toy: return "toy";
        case ExperimentKind::Bridge: return "bridge";
        case ExperimentKind::Logreg: return "logreg";
        case ExperimentKind::Mlp: return "mlp";
        case ExperimentKind::Scan: return "scan";
        case ExperimentKind::PruneBaseline: return "prune";
    }
    throw std::logic_error("unknown experiment kind");
}

ExperimentKind experiment_kind_from_string(const std::string& s) {
    if (s == "toy") return ExperimentKind::Toy;
    if (s == "bridge") return ExperimentKind::Bridge;
    if (s == "logreg") return ExperimentKind::Logreg;
    if (s == "mlp") return ExperimentKind::Mlp;
    if (s == "scan") return ExperimentKind::Scan;
    if (s == "prune") return ExperimentKind::PruneBaseline;
    throw std::invalid_argument("unknown experiment kind '" + s + "'");
}

std::string to_string(OptimizerKind kind) {
    return kind == OptimizerKind::Sgd ? "sgd" : "adam";
}

OptimizerKind optimizer_kind_from_string(const std::string& s) {
    if (s == "sgd") return OptimizerKind::Sgd;
    if (s == "adam") return OptimizerKind::Adam;
    throw std::invalid_argument("unknown optimizer kind '" + s + "'");
}

namespace {

std::vector<double> logspace(double lo, double hi, std::size_t n) {
    std::vector<double> v(n);
    const double llo = std::log10(lo);
    const double step = (std::log10(hi) - llo) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) v[i] = std::pow(10.0, llo + static_cast<double>(i) * step);
    return v;
}

}  // namespace

ExperimentConfig ExperimentConfig::defaults(ExperimentKind kind) {
    ExperimentConfig cfg;
    cfg.kind = kind;
    cfg.scan.max_lrs = logspace(1e-4, 1e-1, 5);
    cfg.scan.lambdas = logspace(1e-4, 1e1, 5);
    switch (kind) {
        case ExperimentKind::Toy:
            cfg.optimizer = OptimizerKind::Sgd;
            cfg.alpha = 0.1;
            cfg.steps = 2000;
            cfg.log_every = 1;
            cfg.use_schedule = false;
            cfg.pwd.p = 0.6;
            cfg.pwd.lambda_p = 1.0;
            break;
        case ExperimentKind::Bridge:
            cfg.optimizer = OptimizerKind::Adam;
            cfg.alpha = 0.01;
            cfg.steps = 2500;
            cfg.log_every = 10;
            cfg.use_schedule = true;
            cfg.warmup_steps = 100;
            cfg.pwd.p = 0.8;
            cfg.pwd.lambda_p = 0.1;
            cfg.dataset.kind = "sparse_linear";
            cfg.dataset.n = 200;
            cfg.model.kind = "linear";
            cfg.val_fraction = 0.15;
            cfg.test_fraction = 0.15;
            cfg.scan.max_lrs = logspace(1e-3, 1e-1, 5);
            cfg.scan.lambdas = logspace(1e-3, 1e1, 5);
            break;
        case ExperimentKind::Logreg:
            cfg.optimizer = OptimizerKind::Adam;
            cfg.alpha = 0.05;
            cfg.steps = 800;
            cfg.log_every = 10;
            cfg.use_schedule = true;
            cfg.warmup_steps = 50;
            cfg.pwd.p = 2.0;
            cfg.pwd.lambda_p = 0.01;
            cfg.dataset.n = 1000;
            cfg.dataset.classes = 2;
            cfg.model.kind = "logreg";
            break;
        case ExperimentKind::Mlp:
        case ExperimentKind::Scan:
        case ExperimentKind::PruneBaseline:
            cfg.optimizer = OptimizerKind::Adam;
            cfg.alpha = 0.02;
            cfg.steps = 1500;
            cfg.log_every = 10;
            cfg.use_schedule = true;
            cfg.warmup_steps = 75;
            cfg.batch_size = 200;
            cfg.pwd.p = kind == ExperimentKind::PruneBaseline ? 2.0 : 0.8;
            cfg.pwd.lambda_p = 0.01;
            cfg.dataset.n = 2000;
            cfg.model.kind = "mlp";
            cfg.scan.max_lrs = logspace(3e-3, 3e-2, 3);
            cfg.scan.lambdas = logspace(1e-3, 1e0, 4);
            break;
    }
    cfg.scan.p_values = {cfg.pwd.p};
    return cfg;
}

namespace {

nlohmann::json pwd_config_json(const PwdConfig& p) {
    nlohmann::json j;
    j["p"] = p.p;
    j["lambda_p"] = p.lambda_p;
    j["s_cadence"] = p.s_cadence;
    if (p.p_schedule.has_value()) {
        j["p_schedule"] = {{"p_end", p.p_schedule->p_end},
                           {"decay_steps", p.p_schedule->decay_steps},
                           {"restart_period", p.p_schedule->restart_period}};
    } else {
        j["p_schedule"] = nullptr;
    }
    auto terms = nlohmann::json::array();
    for (const auto& t : p.elastic_terms) {
        terms.push_back({{"p", t.p}, {"lambda", t.lambda}});
    }
    j["elastic_terms"] = terms;
    return j;
}

PwdConfig pwd_config_from_json(const nlohmann::json& j, PwdConfig base) {
    if (j.contains("p")) base.p = j.at("p").get<double>();
    if (j.contains("lambda_p")) base.lambda_p = j.at("lambda_p").get<double>();
    if (j.contains("s_cadence")) base.s_cadence = j.at("s_cadence").get<long>();
    if (j.contains("p_schedule")) {
        if (j.at("p_schedule").is_null()) {
            base.p_schedule.reset();
        } else {
            PSchedule ps;
            const auto& pj = j.at("p_schedule");
            ps.p_end = pj.at("p_end").get<double>();
            ps.decay_steps = pj.at("decay_steps").get<long>();
            ps.restart_period = pj.value("restart_period", 0L);
            base.p_schedule = ps;
        }
    }
    if (j.contains("elastic_terms")) {
        base.elastic_terms.clear();
        for (const auto& tj : j.at("elastic_terms")) {
            base.elastic_terms.push_back({tj.at("p").get<double>(), tj.at("lambda").get<double>()});
        }
    }
    return base;
}

}  // namespace

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["kind"] = to_string(cfg.kind);
    j["seed"] = cfg.seed;
    j["out_dir"] = cfg.out_dir;
    j["steps"] = cfg.steps;
    j["log_every"] = cfg.log_every;
    j["optimizer"] = to_string(cfg.optimizer);
    j["alpha"] = cfg.alpha;
    j["use_schedule"] = cfg.use_schedule;
    j["warmup_steps"] = cfg.warmup_steps;
    j["pwd"] = pwd_config_json(cfg.pwd);
    j["toy"] = {{"variant", cfg.toy.variant}, {"w0", cfg.toy.w0}};
    j["dataset"] = {{"kind", cfg.dataset.kind},     {"n", cfg.dataset.n},
                    {"d", cfg.dataset.d},           {"k", cfg.dataset.k},
                    {"noise_std", cfg.dataset.noise_std}, {"classes", cfg.dataset.classes},
                    {"separation", cfg.dataset.separation}, {"stddev", cfg.dataset.stddev}};
    j["model"] = {{"kind", cfg.model.kind},
                  {"hidden", cfg.model.hidden},
                  {"activation", cfg.model.activation}};
    j["batch_size"] = cfg.batch_size;
    j["val_fraction"] = cfg.val_fraction;
    j["test_fraction"] = cfg.test_fraction;
    j["scan"] = {{"max_lrs", cfg.scan.max_lrs},
                 {"lambdas", cfg.scan.lambdas},
                 {"p_values", cfg.scan.p_values},
                 {"threads", cfg.scan.threads}};
    j["prune"] = {{"threshold", cfg.prune.threshold},
                  {"every", cfg.prune.every},
                  {"start_frac", cfg.prune.start_frac},
                  {"ramp_frac", cfg.prune.ramp_frac},
                  {"final_prune", cfg.prune.final_prune}};
    return j;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
    const auto kind = experiment_kind_from_string(j.at("kind").get<std::string>());
    ExperimentConfig cfg = ExperimentConfig::defaults(kind);
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("out_dir")) cfg.out_dir = j.at("out_dir").get<std::string>();
    if (j.contains("steps")) cfg.steps = j.at("steps").get<long>();
    if (j.contains("log_every")) cfg.log_every = j.at("log_every").get<long>();
    if (j.contains("optimizer")) {
        cfg.optimizer = optimizer_kind_from_string(j.at("optimizer").get<std::string>());
    }
    if (j.contains("alpha")) cfg.alpha = j.at("alpha").get<double>();
    if (j.contains("use_schedule")) cfg.use_schedule = j.at("use_schedule").get<bool>();
    if (j.contains("warmup_steps")) cfg.warmup_steps = j.at("warmup_steps").get<long>();
    if (j.contains("pwd")) cfg.pwd = pwd_config_from_json(j.at("pwd"), cfg.pwd);
    if (j.contains("toy")) {
        const auto& tj = j.at("toy");
        if (tj.contains("variant")) cfg.toy.variant = tj.at("variant").get<std::string>();
        if (tj.contains("w0")) cfg.toy.w0 = tj.at("w0").get<double>();
    }
    if (j.contains("dataset")) {
        const auto& dj = j.at("dataset");
        if (dj.contains("kind")) cfg.dataset.kind = dj.at("kind").get<std::string>();
        if (dj.contains("n")) cfg.dataset.n = dj.at("n").get<std::size_t>();
        if (dj.contains("d")) cfg.dataset.d = dj.at("d").get<std::size_t>();
        if (dj.contains("k")) cfg.dataset.k = dj.at("k").get<std::size_t>();
        if (dj.contains("noise_std")) cfg.dataset.noise_std = dj.at("noise_std").get<double>();
        if (dj.contains("classes")) cfg.dataset.classes = dj.at("classes").get<std::size_t>();
        if (dj.contains("separation")) cfg.dataset.separation = dj.at("separation").get<double>();
        if (dj.contains("stddev")) cfg.dataset.stddev = dj.at("stddev").get<double>();
    }
    if (j.contains("model")) {
        const auto& mj = j.at("model");
        if (mj.contains("kind")) cfg.model.kind = mj.at("kind").get<std::string>();
        if (mj.contains("hidden")) cfg.model.hidden = mj.at("hidden").get<std::vector<std::size_t>>();
        if (mj.contains("activation")) cfg.model.activation = mj.at("activation").get<std::string>();
    }
    if (j.contains("batch_size")) cfg.batch_size = j.at("batch_size").get<std::size_t>();
    if (j.contains("val_fraction")) cfg.val_fraction = j.at("val_fraction").get<double>();
    if (j.contains("test_fraction")) cfg.test_fraction = j.at("test_fraction").get<double>();
    if (j.contains("scan")) {
        const auto& sj = j.at("scan");
        if (sj.contains("max_lrs")) cfg.scan.max_lrs = sj.at("max_lrs").get<std::vector<double>>();
        if (sj.contains("lambdas")) cfg.scan.lambdas = sj.at("lambdas").get<std::vector<double>>();
        if (sj.contains("p_values")) cfg.scan.p_values = sj.at("p_values").get<std::vector<double>>();
        if (sj.contains("threads")) cfg.scan.threads = sj.at("threads").get<int>();
    }
    if (j.contains("prune")) {
        const auto& pj = j.at("prune");
        if (pj.contains("threshold")) cfg.prune.threshold = pj.at("threshold").get<double>();
        if (pj.contains("every")) cfg.prune.every = pj.at("every").get<long>();
        if (pj.contains("start_frac")) cfg.prune.start_frac = pj.at("start_frac").get<double>();
        if (pj.contains("ramp_frac")) cfg.prune.ramp_frac = pj.at("ramp_frac").get<double>();
        if (pj.contains("final_prune")) cfg.prune.final_prune = pj.at("final_prune").get<bool>();
    }
    return cfg;
}

// ---------------------------------------------------------------------------
// Toy runs

ToyRunResult run_toy(const ExperimentConfig& cfg) {
    if (cfg.toy.variant != "naive" && cfg.toy.variant != "pwd") {
        throw std::invalid_argument("run_toy: variant must be 'naive' or 'pwd'");
    }
    ToyRunResult result;
    const double alpha = cfg.alpha;
    const double p = cfg.pwd.p;
    const double lambda = cfg.pwd.lambda_p;
    double w = cfg.toy.w0;
    result.trajectory.push_back(w);

    ParamGroup group;
    group.name = "w";
    group.params = {w};
    group.shape = {1, 1};
    group.p = p;
    group.lambda_p = lambda;
    group.elastic_terms = cfg.pwd.elastic_terms;
    DecayCache cache;

    const bool naive = cfg.toy.variant == "naive";
    for (long t = 1; t <= cfg.steps; ++t) {
        double factor = 1.0;
        if (naive) {
            w = naive_subgradient_step(w, alpha, lambda, p, w - 1.0);
            if (!std::isfinite(w)) {
                result.verdict.nonfinite = true;
                break;
            }
        } else {
            const ParamVector delta = {w - 1.0};
            const StepDiag diag = pwd_step(group, delta, alpha, 1.0, cfg.pwd, t, cache);
            w = group.params[0];
            factor = diag.factors[0];
        }
        result.trajectory.push_back(w);
        result.factors.push_back(factor);
        if (t % cfg.log_every == 0 || t == cfg.steps) {
            RunRecord r;
            r.step = t;
            r.eta = 1.0;
            r.loss = toy_loss_and_grad(w).first;
            r.reg_loss = r.loss + lambda / p * std::pow(std::abs(w), p);
            r.sparsity = std::abs(w) < 1e-13 ? 1.0 : 0.0;
            r.current_p = p;
            result.records.push_back(r);
        }
    }

    auto& verdict = result.verdict;
    verdict.final_w = result.trajectory.back();
    for (std::size_t t = 1; t < result.trajectory.size(); ++t) {
        const double prev = result.trajectory[t - 1];
        const double cur = result.trajectory[t];
        if (prev * cur < 0.0) ++verdict.sign_changes;
        verdict.min_abs_w = std::min(verdict.min_abs_w, std::abs(cur));
        if (!verdict.converged && std::abs(cur) < 1e-8) {
            verdict.converged = true;
            verdict.converged_step = static_cast<long>(t);
        }
        if (t >= 2 && std::abs(cur) > std::abs(prev)) verdict.monotone_after_first = false;
    }
    return result;
}

// ---------------------------------------------------------------------------
// Dataset splits

namespace {

struct DataSplits {
    bool regression = false;
    std::size_t classes = 0;
    Matrix train_x, val_x, test_x;
    ParamVector train_y, val_y, test_y;
    std::vector<int> train_l, val_l, test_l;
    ParamVector w_true;
};

Matrix take_rows(const Matrix& m, std::size_t begin, std::size_t end) {
    Matrix out(end - begin, m.cols);
    std::copy(m.data.begin() + static_cast<std::ptrdiff_t>(begin * m.cols),
              m.data.begin() + static_cast<std::ptrdiff_t>(end * m.cols), out.data.begin());
    return out;
}

DataSplits make_splits(const ExperimentConfig& cfg) {
    DataSplits s;
    const std::size_t n = cfg.dataset.n;
    std::size_t n_val = static_cast<std::size_t>(std::lround(cfg.val_fraction * static_cast<double>(n)));
    std::size_t n_test = static_cast<std::size_t>(std::lround(cfg.test_fraction * static_cast<double>(n)));
    if (n_val + n_test >= n) throw std::invalid_argument("make_splits: no training rows left");
    const std::size_t n_train = n - n_val - n_test;

    if (cfg.dataset.kind == "sparse_linear") {
        auto set = gen_sparse_linear(n, cfg.dataset.d, cfg.dataset.k, cfg.dataset.noise_std, cfg.seed);
        s.regression = true;
        s.w_true = set.w_true;
        s.train_x = take_rows(set.x, 0, n_train);
        s.val_x = take_rows(set.x, n_train, n_train + n_val);
        s.test_x = take_rows(set.x, n_train + n_val, n);
        s.train_y.assign(set.y.begin(), set.y.begin() + static_cast<std::ptrdiff_t>(n_train));
        s.val_y.assign(set.y.begin() + static_cast<std::ptrdiff_t>(n_train),
                       set.y.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
        s.test_y.assign(set.y.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), set.y.end());
    } else if (cfg.dataset.kind == "blobs") {
        auto set = gen_gaussian_blobs(n, cfg.dataset.classes, cfg.dataset.separation,
                                      cfg.dataset.stddev, cfg.seed);
        s.classes = set.classes;
        s.train_x = take_rows(set.x, 0, n_train);
        s.val_x = take_rows(set.x, n_train, n_train + n_val);
        s.test_x = take_rows(set.x, n_train + n_val, n);
        s.train_l.assign(set.labels.begin(), set.labels.begin() + static_cast<std::ptrdiff_t>(n_train));
        s.val_l.assign(set.labels.begin() + static_cast<std::ptrdiff_t>(n_train),
                       set.labels.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
        s.test_l.assign(set.labels.begin() + static_cast<std::ptrdiff_t>(n_train + n_val),
                        set.labels.end());
    } else {
        throw std::invalid_argument("unknown dataset kind '" + cfg.dataset.kind + "'");
    }
    return s;
}

double mean_squared_error(const Matrix& x, const ParamVector& y, const ParamVector& w) {
    if (x.rows == 0) return std::numeric_limits<double>::quiet_NaN();
    auto r = matvec(x, w);
    double sum = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        const double d = r[i] - y[i];
        sum += d * d;
    }
    return sum / static_cast<double>(x.rows);
}

double decay_penalty(const std::vector<ParamGroup>& groups, const PwdConfig& cfg, long t,
                     double p_value) {
    double total = 0.0;
    for (const auto& g : groups) {
        if (!g.decay_eligible) continue;
        if (!g.elastic_terms.empty()) {
            for (const auto& term : g.elastic_terms) {
                if (term.lambda == 0.0) continue;
                total += pnorm_penalty(g.params, PenaltySpec{term.p, term.lambda});
            }
        } else if (g.lambda_p > 0.0) {
            const double p_eff = cfg.p_schedule.has_value() ? p_schedule_value(cfg, t) : p_value;
            total += pnorm_penalty(g.params, PenaltySpec{p_eff, g.lambda_p});
        }
    }
    return total;
}

// One training run at a fixed (max_lr, lambda, p) grid point.
ScanCellResult train_cell(const ExperimentConfig& cfg, const DataSplits& data, double max_lr,
                          double lambda, double p_value, std::size_t cell_index,
                          bool prune_enabled) {
    ScanCellResult cell;
    cell.index = cell_index;
    cell.max_lr = max_lr;
    cell.lambda_p = lambda;
    cell.p = p_value;
    try {
        Rng rng = Rng::derive(cfg.seed, cell_index + 1);

        const bool is_mlp = cfg.model.kind == "mlp";
        const bool is_logreg = cfg.model.kind == "logreg";
        const bool is_linear = cfg.model.kind == "linear";
        if (!is_mlp && !is_logreg && !is_linear) {
            throw std::invalid_argument("unknown model kind '" + cfg.model.kind + "'");
        }
        if (is_linear && !data.regression) {
            throw std::invalid_argument("linear model requires a regression dataset");
        }
        if ((is_mlp || is_logreg) && data.regression) {
            throw std::invalid_argument("classifier requires a classification dataset");
        }
        if (is_logreg && data.classes != 2) {
            throw std::invalid_argument("logreg requires exactly 2 classes");
        }

        MlpModel mlp;
        std::vector<ParamGroup> groups;
        std::optional<LinRegLoss> linreg;
        std::optional<LogRegLoss> logreg;
        if (is_mlp) {
            mlp.layer_sizes.push_back(data.train_x.cols);
            for (std::size_t h : cfg.model.hidden) mlp.layer_sizes.push_back(h);
            mlp.layer_sizes.push_back(data.classes);
            mlp.activation = cfg.model.activation == "relu" ? Activation::Relu : Activation::Tanh;
            groups = init_params(mlp, rng);
        } else {
            const std::size_t d = data.train_x.cols;
            ParamGroup g;
            g.name = "weight";
            g.shape = {1, d};
            g.params.resize(d);
            const double scale = 1.0 / std::sqrt(static_cast<double>(d));
            for (auto& w : g.params) w = scale * rng.gaussian();
            groups.push_back(std::move(g));
            if (is_linear) linreg.emplace(data.train_x, data.train_y);
            if (is_logreg) logreg.emplace(data.train_x, data.train_l);
        }

        PwdConfig pcfg = cfg.pwd;
        pcfg.p = p_value;
        pcfg.lambda_p = lambda;
        for (auto& g : groups) {
            g.p = p_value;
            g.lambda_p = lambda;
            g.elastic_terms = cfg.pwd.elastic_terms;
        }

        std::vector<AdamState> adam;
        for (const auto& g : groups) adam.emplace_back(g.params.size());
        std::vector<DecayCache> caches(groups.size());
        const Schedule sched = Schedule::cosine(max_lr, cfg.warmup_steps, cfg.steps);

        const std::size_t n_train = data.train_x.rows;
        const std::size_t batch = (cfg.batch_size == 0 || cfg.batch_size >= n_train || !is_mlp)
                                      ? n_train
                                      : cfg.batch_size;
        std::vector<std::size_t> order(n_train);
        std::iota(order.begin(), order.end(), 0);
        std::size_t cursor = n_train;  // forces a shuffle before the first minibatch

        const long prune_start =
            std::lround(cfg.prune.start_frac * static_cast<double>(cfg.steps));
        const double prune_ramp_len =
            std::max(1.0, cfg.prune.ramp_frac * static_cast<double>(cfg.steps));

        auto full_train_loss = [&]() {
            if (is_linear) return linreg->loss(groups[0].params);
            if (is_logreg) return logreg->loss(groups[0].params);
            MlpCache fc;
            const auto logits = mlp_forward(mlp, groups, data.train_x, fc);
            return mlp_loss(logits, data.train_l);
        };
        auto val_accuracy_percent = [&]() {
            if (data.val_x.rows == 0) return std::numeric_limits<double>::quiet_NaN();
            if (is_logreg) {
                LogRegLoss val(data.val_x, data.val_l);
                return 100.0 * val.accuracy(groups[0].params);
            }
            MlpCache fc;
            const auto logits = mlp_forward(mlp, groups, data.val_x, fc);
            return 100.0 * mlp_accuracy(logits, data.val_l);
        };

        Matrix batch_x;
        std::vector<int> batch_l;
        for (long t = 1; t <= cfg.steps; ++t) {
            const double eta = cfg.use_schedule ? schedule_multiplier(sched, t) : 1.0;

            std::vector<ParamVector> grads(groups.size());
            if (is_mlp) {
                MlpCache cache;
                std::vector<ParamGroup> g;
                if (batch == n_train) {
                    mlp_forward(mlp, groups, data.train_x, cache);
                    g = mlp_backward(mlp, groups, cache, data.train_l);
                } else {
                    batch_x = Matrix(batch, data.train_x.cols);
                    batch_l.resize(batch);
                    if (cursor + batch > n_train) {
                        for (std::size_t i = n_train - 1; i > 0; --i) {
                            const std::size_t j = static_cast<std::size_t>(rng.below(i + 1));
                            std::swap(order[i], order[j]);
                        }
                        cursor = 0;
                    }
                    for (std::size_t b = 0; b < batch; ++b) {
                        const std::size_t row = order[cursor + b];
                        for (std::size_t c = 0; c < data.train_x.cols; ++c) {
                            batch_x.at(b, c) = data.train_x.at(row, c);
                        }
                        batch_l[b] = data.train_l[row];
                    }
                    cursor += batch;
                    mlp_forward(mlp, groups, batch_x, cache);
                    g = mlp_backward(mlp, groups, cache, batch_l);
                }
                for (std::size_t gi = 0; gi < groups.size(); ++gi) {
                    grads[gi] = std::move(g[gi].params);
                }
            } else if (is_linear) {
                linreg->loss_and_grad(groups[0].params, grads[0]);
            } else {
                logreg->loss_and_grad(groups[0].params, grads[0]);
            }

            for (std::size_t gi = 0; gi < groups.size(); ++gi) {
                const ParamVector delta = cfg.optimizer == OptimizerKind::Adam
                                              ? adam_delta(adam[gi], grads[gi])
                                              : sgd_delta(grads[gi]);
                pwd_step(groups[gi], delta, max_lr, eta, pcfg, t, caches[gi]);
            }

            if (prune_enabled && cfg.prune.threshold > 0.0) {
                if (t >= prune_start && (t - prune_start) % std::max(cfg.prune.every, 1L) == 0) {
                    const double ramp =
                        std::min(1.0, static_cast<double>(t - prune_start) / prune_ramp_len);
                    const double threshold = cfg.prune.threshold * ramp;
                    if (threshold > 0.0) magnitude_prune(groups, threshold);
                }
                if (cfg.prune.final_prune && t == cfg.steps) {
                    magnitude_prune(groups, cfg.prune.threshold);
                }
            }

            if (t % std::max(cfg.log_every, 1L) == 0 || t == cfg.steps) {
                RunRecord r;
                r.step = t;
                r.eta = eta;
                r.loss = full_train_loss();
                r.reg_loss = r.loss + decay_penalty(groups, pcfg, t, p_value);
                r.sparsity = sparsity(groups).sparsity();
                if (!data.regression) r.acc = val_accuracy_percent();
                r.current_p =
                    pcfg.p_schedule.has_value() ? p_schedule_value(pcfg, t) : p_value;
                cell.records.push_back(r);
            }
        }

        cell.final_loss = full_train_loss();
        cell.final_sparsity = sparsity(groups).sparsity();
        std::size_t exact_zeros = 0;
        for (const auto& g : groups) {
            if (!g.decay_eligible) continue;
            for (double w : g.params) {
                if (w == 0.0) ++exact_zeros;
            }
        }
        cell.exact_zeros = exact_zeros;
        if (data.regression) {
            cell.val_mse = mean_squared_error(data.val_x, data.val_y, groups[0].params);
            cell.test_mse = mean_squared_error(data.test_x, data.test_y, groups[0].params);
            std::size_t true_zeros = 0, zero_hits = 0;
            std::size_t tp = 0, fp = 0, fn = 0;
            for (std::size_t i = 0; i < data.w_true.size(); ++i) {
                const bool truly_zero = data.w_true[i] == 0.0;
                const bool pred_nonzero = groups[0].params[i] != 0.0;
                if (truly_zero) {
                    ++true_zeros;
                    if (!pred_nonzero) ++zero_hits;
                    if (pred_nonzero) ++fp;
                } else {
                    if (pred_nonzero) ++tp;
                    else ++fn;
                }
            }
            cell.zero_rate_true_zeros =
                true_zeros == 0 ? 1.0
                                : static_cast<double>(zero_hits) / static_cast<double>(true_zeros);
            cell.support_f1 = (2 * tp + fp + fn) == 0
                                  ? 1.0
                                  : 2.0 * static_cast<double>(tp) /
                                        static_cast<double>(2 * tp + fp + fn);
        } else {
            cell.final_acc = val_accuracy_percent();
            cell.tradeoff = tradeoff_metric(cell.final_acc, cell.final_sparsity);
        }
    } catch (const std::exception& e) {
        cell.status = std::string("failed: ") + e.what();
    }
    return cell;
}

ScanResult scan_impl(const ExperimentConfig& cfg, const std::vector<double>& p_values,
                     bool prune_enabled) {
    if (cfg.scan.max_lrs.empty() || cfg.scan.lambdas.empty() || p_values.empty()) {
        throw std::invalid_argument("scan: empty grid");
    }
    const DataSplits data = make_splits(cfg);
    const std::size_t n_lr = cfg.scan.max_lrs.size();
    const std::size_t n_lam = cfg.scan.lambdas.size();
    const std::size_t total = p_values.size() * n_lr * n_lam;

    ScanResult result;
    result.cells.resize(total);

    auto run_one = [&](std::size_t idx) {
        const std::size_t pi = idx / (n_lr * n_lam);
        const std::size_t li = (idx / n_lam) % n_lr;
        const std::size_t mi = idx % n_lam;
        result.cells[idx] = train_cell(cfg, data, cfg.scan.max_lrs[li], cfg.scan.lambdas[mi],
                                       p_values[pi], idx, prune_enabled);
    };

    int threads = cfg.scan.threads;
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    threads = std::max(1, std::min<int>(threads, static_cast<int>(total)));

    if (threads == 1) {
        for (std::size_t idx = 0; idx < total; ++idx) run_one(idx);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int w = 0; w < threads; ++w) {
            pool.emplace_back([&]() {
                while (true) {
                    const std::size_t idx = next.fetch_add(1);
                    if (idx >= total) return;
                    run_one(idx);
                }
            });
        }
        for (auto& th : pool) th.join();
    }
    return result;
}

}  // namespace

ScanResult run_scan(const ExperimentConfig& cfg) {
    std::vector<double> p_values = cfg.scan.p_values;
    if (p_values.empty()) p_values = {cfg.pwd.p};
    return scan_impl(cfg, p_values, false);
}

ScanResult run_prune_baseline(const ExperimentConfig& cfg) {
    return scan_impl(cfg, {2.0}, true);
}

BridgeResult run_bridge(const ExperimentConfig& cfg) {
    if (cfg.dataset.kind != "sparse_linear" || cfg.model.kind != "linear") {
        throw std::invalid_argument("run_bridge: needs a sparse_linear dataset and linear model");
    }
    BridgeResult result;
    result.scan = scan_impl(cfg, {cfg.pwd.p}, false);

    bool found = false;
    for (const auto& cell : result.scan.cells) {
        if (cell.status != "ok" || std::isnan(cell.val_mse)) continue;
        if (!found || cell.val_mse < result.best.val_mse) {
            found = true;
            result.best.best_cell = cell.index;
            result.best.val_mse = cell.val_mse;
            result.best.test_mse = cell.test_mse;
            result.best.zero_rate_true_zeros = cell.zero_rate_true_zeros;
            result.best.support_f1 = cell.support_f1;
            result.best.exact_zeros = cell.exact_zeros;
        }
    }
    if (!found) throw std::runtime_error("run_bridge: every cell failed");
    return result;
}

ScanCellResult run_single(const ExperimentConfig& cfg) {
    ExperimentConfig single = cfg;
    single.scan.max_lrs = {cfg.alpha};
    single.scan.lambdas = {cfg.pwd.lambda_p};
    single.scan.p_values = {cfg.pwd.p};
    return scan_impl(single, {cfg.pwd.p}, false).cells.at(0);
}

}  // namespace pwd
