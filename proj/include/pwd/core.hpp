#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace pwd {

// Flat vector of 64-bit parameters. Length is fixed by construction and
// every library-issued update keeps all entries finite.
using ParamVector = std::vector<double>;

bool all_finite(const ParamVector& v);

// A named tensor flattened to a ParamVector. `shape` keeps the original
// rank so partition rules can tell weight matrices from bias-like tensors.
struct NamedParam {
    std::string name;
    ParamVector values;
    std::vector<std::size_t> shape;
};

// One component of an elastic decay combination. p must lie in (0, 2].
struct ElasticTerm {
    double p = 2.0;
    double lambda = 0.0;
    bool operator==(const ElasticTerm&) const = default;
};

// Parameter group with its decay settings. Groups with decay_eligible ==
// false are never modified by a decay step. A nonempty elastic_terms list
// replaces (p, lambda_p) entirely; exactly one decay mode is active.
struct ParamGroup {
    std::string name;
    ParamVector params;
    std::vector<std::size_t> shape;
    bool decay_eligible = true;
    double p = 2.0;
    double lambda_p = 0.0;
    std::vector<ElasticTerm> elastic_terms;
};

// One full SplitMix64 step applied to x; used for seeding and for deriving
// independent per-stream seeds.
std::uint64_t mix64(std::uint64_t x);

// xoshiro256++ seeded through SplitMix64. Integer output streams are
// identical on every platform for a given seed. uniform() maps the top 53
// bits of one state advance to [0, 1); gaussian() is Box-Muller on two
// consecutive uniforms (branch-free, no cached spare).
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    // Independent stream derived from (base_seed, stream); used for
    // per-cell seeding in scans.
    static Rng derive(std::uint64_t base_seed, std::uint64_t stream);

    std::uint64_t next_u64();
    double uniform();
    double gaussian();

    // Uniform integer in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n);

    bool operator==(const Rng&) const = default;

private:
    std::array<std::uint64_t, 4> state_{};
};

using EligibilityRule = std::function<bool(const NamedParam&)>;

// Default decay rule: tensors of rank >= 2 are eligible, bias-like
// (rank <= 1) tensors are not.
bool default_decay_rule(const NamedParam& p);

// Partitions named parameters into groups, one group per tensor, marking
// eligibility per rule. Names must be unique. Decay settings (p, lambda)
// are left at their inert defaults for the caller to fill in.
std::vector<ParamGroup> group_partition(std::vector<NamedParam> params,
                                        const EligibilityRule& rule = default_decay_rule);

}  // namespace pwd
