#include "pwd/optimizers.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace pwd {

ParamVector sgd_delta(const ParamVector& g) {
    return g;
}

ParamVector adam_delta(AdamState& state, const ParamVector& g) {
    if (g.size() != state.m.size()) throw std::invalid_argument("adam_delta: size mismatch");
    state.t += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
    ParamVector delta(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g[i];
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g[i] * g[i];
        const double m_hat = state.m[i] / bc1;
        const double v_hat = state.v[i] / bc2;
        delta[i] = m_hat / (std::sqrt(v_hat) + state.eps);
    }
    return delta;
}

Schedule Schedule::cosine(double max_lr, long warmup_steps, long total_steps) {
    Schedule s;
    s.max_lr = max_lr;
    s.min_lr = max_lr / 100.0;
    s.warmup_steps = warmup_steps;
    s.total_steps = total_steps;
    return s;
}

double schedule_multiplier(const Schedule& sched, long t) {
    if (t < 1 || t > sched.total_steps) {
        throw std::invalid_argument("schedule_multiplier: step " + std::to_string(t) +
                                    " outside [1, " + std::to_string(sched.total_steps) + "]");
    }
    if (sched.warmup_steps >= sched.total_steps) {
        throw std::invalid_argument("schedule_multiplier: warmup must end before total_steps");
    }
    if (t <= sched.warmup_steps) {
        return static_cast<double>(t) / static_cast<double>(sched.warmup_steps);
    }
    const double floor = sched.min_lr / sched.max_lr;
    const double progress = static_cast<double>(t - sched.warmup_steps) /
                            static_cast<double>(sched.total_steps - sched.warmup_steps);
    return floor + (1.0 - floor) * 0.5 * (1.0 + std::cos(M_PI * progress));
}

double p_schedule_value(const PwdConfig& cfg, long t) {
    if (!cfg.p_schedule.has_value()) {
        throw std::logic_error("p_schedule_value: no p-schedule configured");
    }
    const PSchedule& ps = *cfg.p_schedule;
    if (t < 0) throw std::invalid_argument("p_schedule_value: negative step");
    long tt = t;
    if (ps.restart_period > 0) tt = t % ps.restart_period;
    const double progress =
        std::min(1.0, static_cast<double>(tt) / static_cast<double>(std::max(ps.decay_steps, 1L)));
    return ps.p_end + (2.0 - ps.p_end) * 0.5 * (1.0 + std::cos(M_PI * progress));
}

namespace {

void refresh_cache(DecayCache& cache, const ParamGroup& group, double p_eff, long step_index) {
    const std::size_t n = group.params.size();
    cache.numer.resize(n);
    if (group.elastic_terms.empty()) {
        const double q = 2.0 - p_eff;
        for (std::size_t i = 0; i < n; ++i) {
            cache.numer[i] = std::pow(std::abs(group.params[i]), q);
        }
        cache.denom.clear();
    } else {
        double q_max = 0.0;
        for (const auto& term : group.elastic_terms) {
            if (!(term.p > 0.0 && term.p <= 2.0)) {
                throw std::domain_error("pwd_step: elastic term p must lie in (0, 2]");
            }
            if (term.lambda > 0.0) q_max = std::max(q_max, 2.0 - term.p);
        }
        cache.denom.assign(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double a = std::abs(group.params[i]);
            cache.numer[i] = std::pow(a, q_max);
            double sum = 0.0;
            for (const auto& term : group.elastic_terms) {
                if (term.lambda == 0.0) continue;
                sum += term.lambda * std::pow(a, q_max - (2.0 - term.p));
            }
            cache.denom[i] = sum;
        }
    }
    cache.last_refresh = step_index;
    cache.cached_p = p_eff;
}

}  // namespace

StepDiag pwd_step(ParamGroup& group, const ParamVector& delta, double alpha, double eta,
                  const PwdConfig& cfg, long step_index, DecayCache& cache,
                  bool capture_weights) {
    if (delta.size() != group.params.size()) {
        throw std::invalid_argument("pwd_step: delta size mismatch for group '" + group.name + "'");
    }
    if (!(alpha > 0.0)) throw std::invalid_argument("pwd_step: alpha must be positive");
    if (!(eta > 0.0 && eta <= 1.0)) throw std::invalid_argument("pwd_step: eta must lie in (0, 1]");

    StepDiag diag;
    const double ea = eta * alpha;
    diag.effective_lr = ea;
    if (capture_weights) diag.pre_step_weights = group.params;

    const bool elastic = !group.elastic_terms.empty();
    double total_lambda = group.lambda_p;
    if (elastic) {
        total_lambda = 0.0;
        for (const auto& term : group.elastic_terms) total_lambda += term.lambda;
    }
    const bool decaying = group.decay_eligible && total_lambda > 0.0;

    auto& w = group.params;
    diag.factors.assign(w.size(), 1.0);

    if (!decaying) {
        for (std::size_t i = 0; i < w.size(); ++i) w[i] -= ea * delta[i];
    } else {
        const long cadence = std::max(cfg.s_cadence, 1L);
        const double p_eff =
            cfg.p_schedule.has_value() ? p_schedule_value(cfg, step_index) : group.p;
        if (cache.last_refresh < 0 || step_index - cache.last_refresh >= cadence ||
            cache.numer.size() != w.size()) {
            refresh_cache(cache, group, p_eff, step_index);
        }
        if (elastic) {
            for (std::size_t i = 0; i < w.size(); ++i) {
                const double wt = w[i] - ea * delta[i];
                const double f = cache.numer[i] / (cache.numer[i] + ea * cache.denom[i]);
                diag.factors[i] = f;
                w[i] = f * wt;
            }
        } else {
            const double lambda = group.lambda_p;
            for (std::size_t i = 0; i < w.size(); ++i) {
                const double wt = w[i] - ea * delta[i];
                const double f = cache.numer[i] / (cache.numer[i] + ea * lambda);
                diag.factors[i] = f;
                w[i] = f * wt;
            }
        }
    }

    if (!all_finite(w)) {
        throw std::runtime_error("pwd_step: nonfinite parameters in group '" + group.name +
                                 "' at step " + std::to_string(step_index));
    }
    return diag;
}

double naive_subgradient_step(double w, double alpha, double lambda_p, double p,
                              double grad_loss) {
    return w - alpha * (grad_loss + lambda_p * std::pow(std::abs(w), p - 2.0) * w);
}

double decoupled_multiplicative_step(double w, double delta, double alpha, double eta,
                                     double lambda_p, double p) {
    const double ea = eta * alpha;
    return (w - ea * delta) * (1.0 - ea * lambda_p * std::pow(std::abs(w), p - 2.0));
}

std::size_t magnitude_prune(std::vector<ParamGroup>& groups, double threshold) {
    if (!(threshold > 0.0)) throw std::invalid_argument("magnitude_prune: threshold must be positive");
    std::size_t pruned = 0;
    for (auto& g : groups) {
        if (!g.decay_eligible) continue;
        for (auto& w : g.params) {
            if (w != 0.0 && std::abs(w) < threshold) {
                w = 0.0;
                ++pruned;
            }
        }
    }
    return pruned;
}

}  // namespace pwd
