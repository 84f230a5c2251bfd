#pragma once

#include <optional>
#include <vector>

#include "pwd/core.hpp"
#include "pwd/regularizers.hpp"

namespace pwd {

// Adam moment buffers. Defaults follow the usual (0.9, 0.999, 1e-8).
struct AdamState {
    ParamVector m;
    ParamVector v;
    long t = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

// Plain gradient descent: the base update is the gradient itself.
ParamVector sgd_delta(const ParamVector& g);

// One Adam update with bias correction. Mutates the state (t increments by
// exactly one) and returns the unscaled step m_hat / (sqrt(v_hat) + eps).
ParamVector adam_delta(AdamState& state, const ParamVector& g);

// Linear warmup to 1 at warmup_steps, then cosine annealing down to
// min_lr/max_lr at total_steps.
struct Schedule {
    double max_lr = 1e-3;
    double min_lr = 1e-5;
    long warmup_steps = 0;
    long total_steps = 1;

    static Schedule cosine(double max_lr, long warmup_steps, long total_steps);

    bool operator==(const Schedule&) const = default;
};

// Multiplier eta_t in (0, 1] for 1 <= t <= total_steps.
double schedule_multiplier(const Schedule& sched, long t);

// Cosine decay of p from 2 down to p_end over decay_steps, optionally
// restarting to 2 every restart_period steps.
struct PSchedule {
    double p_end = 1.0;
    long decay_steps = 1;
    long restart_period = 0;  // 0 = no restarts

    bool operator==(const PSchedule&) const = default;
};

struct PwdConfig {
    double p = 2.0;
    double lambda_p = 0.0;
    long s_cadence = 1;  // refresh the decay cache every n steps
    std::optional<PSchedule> p_schedule;
    std::vector<ElasticTerm> elastic_terms;

    bool operator==(const PwdConfig&) const = default;
};

double p_schedule_value(const PwdConfig& cfg, long t);

// Per-entry decay inputs cached at refresh steps from the pre-update
// weights. numer holds |w|^(2-p) (finite at w = 0, unlike s itself); denom
// holds the lambda-weighted sum of the elastic rearrangement and is unused
// in single-p mode, where the factor is numer / (numer + eta*alpha*lambda).
struct DecayCache {
    std::vector<double> numer;
    std::vector<double> denom;
    long last_refresh = -1;
    double cached_p = 0.0;
};

struct StepDiag {
    std::vector<double> factors;
    double effective_lr = 0.0;
    ParamVector pre_step_weights;  // filled only when requested
};

// One fused base-update + decay step on a group, per-entry
//   w <- factor(w_prev) * (w_prev - eta*alpha*delta)
// with the factor anchored on the pre-update weights. Ineligible groups and
// lambda = 0 get the base update only. The cache is refreshed from w_prev
// every cfg.s_cadence steps; cadence 1 refreshes every step. Nonfinite
// results abort with the group name.
StepDiag pwd_step(ParamGroup& group, const ParamVector& delta, double alpha, double eta,
                  const PwdConfig& cfg, long step_index, DecayCache& cache,
                  bool capture_weights = false);

// Explicit subgradient update w - alpha*(grad_loss + lambda |w|^(p-2) w).
// No safeguards: diverges near w = 0 for p < 2, which is what it is for.
double naive_subgradient_step(double w, double alpha, double lambda_p, double p,
                              double grad_loss);

// Multiplicative decoupled baseline (w - eta*alpha*delta) * (1 - eta*alpha*
// lambda |w|^(p-2)). Unstable once the decay factor passes below zero.
double decoupled_multiplicative_step(double w, double delta, double alpha, double eta,
                                     double lambda_p, double p);

// Sets entries with |w| < threshold in decay-eligible groups to exact zero.
// Returns the number of newly zeroed entries. Idempotent.
std::size_t magnitude_prune(std::vector<ParamGroup>& groups, double threshold);

}  // namespace pwd
