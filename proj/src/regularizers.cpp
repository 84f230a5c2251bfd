#include "pwd/regularizers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pwd {

AuxVector::AuxVector(std::vector<std::optional<double>> entries)
    : entries_(std::move(entries)) {
    for (const auto& e : entries_) {
        if (e.has_value() && !(*e > 0.0)) {
            throw std::invalid_argument("AuxVector: finite entries must be strictly positive");
        }
    }
}

AuxVector AuxVector::finite(std::vector<double> values) {
    std::vector<std::optional<double>> entries(values.begin(), values.end());
    return AuxVector(std::move(entries));
}

double AuxVector::value(std::size_t i) const {
    if (!entries_[i].has_value()) {
        throw std::domain_error("AuxVector: entry is divergent");
    }
    return *entries_[i];
}

double pnorm_penalty(const ParamVector& w, const PenaltySpec& spec) {
    if (!(spec.p > 0.0)) throw std::domain_error("pnorm_penalty: p must be positive");
    double sum = 0.0;
    for (double wi : w) sum += std::pow(std::abs(wi), spec.p);
    return spec.lambda_p / spec.p * sum;
}

double aux_K(double s, double p) {
    if (!(s > 0.0)) throw std::domain_error("aux_K: s must be positive");
    if (!(p > 0.0 && p < 2.0)) throw std::domain_error("aux_K: p must lie in (0, 2)");
    return (2.0 - p) / p * std::pow(s, p / (p - 2.0));
}

double extended_penalty(const ParamVector& w, const AuxVector& s, const PenaltySpec& spec) {
    if (w.size() != s.size()) throw std::invalid_argument("extended_penalty: length mismatch");
    if (!(spec.p > 0.0 && spec.p < 2.0)) {
        throw std::domain_error("extended_penalty: p must lie in (0, 2)");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (s.divergent(i)) {
            if (w[i] != 0.0) {
                throw std::domain_error("extended_penalty: divergent s with nonzero weight");
            }
            // s w^2 -> 0 and K(s) -> 0 in the s -> infinity limit.
            continue;
        }
        const double si = s.value(i);
        sum += si * w[i] * w[i] + aux_K(si, spec.p);
    }
    return spec.lambda_p / 2.0 * sum;
}

AuxVector optimal_s(const ParamVector& w, double p) {
    if (!(p > 0.0 && p < 2.0)) throw std::domain_error("optimal_s: p must lie in (0, 2)");
    std::vector<std::optional<double>> entries;
    entries.reserve(w.size());
    for (double wi : w) {
        if (wi == 0.0) {
            entries.emplace_back(std::nullopt);
        } else {
            entries.emplace_back(std::pow(std::abs(wi), p - 2.0));
        }
    }
    return AuxVector(std::move(entries));
}

double prox_l2(double w, double k) {
    if (k < 0.0) throw std::domain_error("prox_l2: k must be nonnegative");
    return w / (1.0 + k);
}

double prox_l1(double w, double t) {
    if (t < 0.0) throw std::domain_error("prox_l1: t must be nonnegative");
    const double mag = std::max(std::abs(w) - t, 0.0);
    return std::copysign(mag, w);
}

double pwd_decay_factor(double w_prev, double p, double k) {
    if (!(p > 0.0 && p <= 2.0)) throw std::domain_error("pwd_decay_factor: p must lie in (0, 2]");
    if (k < 0.0) throw std::domain_error("pwd_decay_factor: k must be nonnegative");
    if (k == 0.0) return 1.0;
    const double a = std::pow(std::abs(w_prev), 2.0 - p);
    return a / (a + k);
}

double elastic_decay_factor(double w_prev, const std::vector<ElasticTerm>& terms,
                            double eta_alpha) {
    if (eta_alpha < 0.0) throw std::domain_error("elastic_decay_factor: eta_alpha must be nonnegative");
    double q_max = 0.0;
    bool any_active = false;
    for (const auto& t : terms) {
        if (!(t.p > 0.0 && t.p <= 2.0)) {
            throw std::domain_error("elastic_decay_factor: term p must lie in (0, 2]");
        }
        if (t.lambda < 0.0) {
            throw std::domain_error("elastic_decay_factor: term lambda must be nonnegative");
        }
        if (t.lambda > 0.0) {
            any_active = true;
            q_max = std::max(q_max, 2.0 - t.p);
        }
    }
    if (!any_active || eta_alpha == 0.0) return 1.0;

    // Multiply numerator and denominator of 1/(1 + c sum lambda_k a^(-q_k))
    // by a^q_max; every remaining exponent is nonnegative, so nothing
    // diverges at a = 0 and the w = 0 fixed point falls out exactly.
    const double a = std::abs(w_prev);
    const double numer = std::pow(a, q_max);
    double decay_sum = 0.0;
    for (const auto& t : terms) {
        if (t.lambda == 0.0) continue;
        decay_sum += t.lambda * std::pow(a, q_max - (2.0 - t.p));
    }
    return numer / (numer + eta_alpha * decay_sum);
}

}  // namespace pwd
