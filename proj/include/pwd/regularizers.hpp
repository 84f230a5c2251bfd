#pragma once

#include <optional>
#include <vector>

#include "pwd/core.hpp"

namespace pwd {

// Penalty (lambda_p / p) * sum_i |w_i|^p. p must be positive; the extended
// formulation and aux_K additionally require p < 2 (p = 2 is the classical
// decoupled case and never goes through them).
struct PenaltySpec {
    double p = 2.0;
    double lambda_p = 0.0;
};

// Auxiliary vector of the extended penalty. An entry may be divergent
// (s -> infinity), which is the optimal value exactly at w = 0 for p < 2.
// Divergence is an explicit marker, not a floating-point infinity, so the
// zero fixed point stays auditable.
class AuxVector {
public:
    AuxVector() = default;
    explicit AuxVector(std::vector<std::optional<double>> entries);

    static AuxVector finite(std::vector<double> values);

    std::size_t size() const { return entries_.size(); }
    bool divergent(std::size_t i) const { return !entries_[i].has_value(); }
    // Throws on divergent entries.
    double value(std::size_t i) const;

private:
    std::vector<std::optional<double>> entries_;
};

double pnorm_penalty(const ParamVector& w, const PenaltySpec& spec);

// K(s) = ((2-p)/p) * s^(p/(p-2)) for s > 0 and 0 < p < 2.
double aux_K(double s, double p);

// (lambda_p/2) * sum_i [s_i w_i^2 + K(s_i)]. Divergent entries contribute 0
// where w_i == 0 and make the penalty infinite otherwise (reported as an
// error). Equals pnorm_penalty at s = optimal_s(w).
double extended_penalty(const ParamVector& w, const AuxVector& s, const PenaltySpec& spec);

// s_i = |w_i|^(p-2); w_i == 0 maps to the divergent marker. 0 < p < 2.
AuxVector optimal_s(const ParamVector& w, double p);

// prox of (k/2)|.|^2: w / (1 + k).
double prox_l2(double w, double k);

// Soft thresholding, prox of t|.|: sign(w) * max(|w| - t, 0).
double prox_l1(double w, double t);

// Multiplicative decay factor |w|^(2-p) / (|w|^(2-p) + k) with k the
// combined step-size/decay product. Always evaluated in the |w|^(2-p) form
// so that w = 0 gives factor 0 for p < 2 without dividing by zero. p = 2
// reduces to the classical 1/(1+k) for any w.
double pwd_decay_factor(double w_prev, double p, double k);

// Elastic generalization: 1 / (1 + eta_alpha * sum_k lambda_k |w|^(p_k-2)),
// computed in an overflow-safe rearrangement (all exponents nonnegative).
// A single term reduces bit-exactly to pwd_decay_factor. p_k > 2 rejected.
double elastic_decay_factor(double w_prev, const std::vector<ElasticTerm>& terms,
                            double eta_alpha);

}  // namespace pwd
