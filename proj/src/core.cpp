#include "pwd/core.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace pwd {

bool all_finite(const ParamVector& v) {
    for (double x : v) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t splitmix_next(std::uint64_t& state) {
    state += kGolden;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

}  // namespace

std::uint64_t mix64(std::uint64_t x) {
    return splitmix_next(x);
}

Rng::Rng(std::uint64_t seed) {
    std::uint64_t s = seed;
    for (auto& word : state_) word = splitmix_next(s);
}

Rng Rng::derive(std::uint64_t base_seed, std::uint64_t stream) {
    return Rng(mix64(mix64(base_seed) + (stream + 1) * kGolden));
}

std::uint64_t Rng::next_u64() {
    auto& s = state_;
    const std::uint64_t result = rotl(s[0] + s[3], 23) + s[0];
    const std::uint64_t t = s[1] << 17;
    s[2] ^= s[0];
    s[3] ^= s[1];
    s[1] ^= s[2];
    s[0] ^= s[3];
    s[2] ^= t;
    s[3] = rotl(s[3], 45);
    return result;
}

double Rng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::gaussian() {
    const double u1 = uniform();
    const double u2 = uniform();
    // 1 - u1 lies in (0, 1], so the log is finite.
    return std::sqrt(-2.0 * std::log(1.0 - u1)) * std::cos(2.0 * M_PI * u2);
}

std::uint64_t Rng::below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::below: n must be positive");
    return next_u64() % n;
}

bool default_decay_rule(const NamedParam& p) {
    return p.shape.size() >= 2;
}

std::vector<ParamGroup> group_partition(std::vector<NamedParam> params,
                                        const EligibilityRule& rule) {
    std::unordered_set<std::string> seen;
    std::vector<ParamGroup> groups;
    groups.reserve(params.size());
    for (auto& p : params) {
        if (!seen.insert(p.name).second) {
            throw std::invalid_argument("group_partition: duplicate parameter name '" + p.name + "'");
        }
        ParamGroup g;
        g.name = p.name;
        g.decay_eligible = rule(p);
        g.shape = std::move(p.shape);
        g.params = std::move(p.values);
        groups.push_back(std::move(g));
    }
    return groups;
}

}  // namespace pwd
