#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "pwd/core.hpp"
#include "pwd/linalg.hpp"

namespace pwd {

// Regression data y = X w_true + noise with a k-sparse ground truth.
struct RegressionSet {
    Matrix x;
    ParamVector y;
    ParamVector w_true;
    std::vector<std::size_t> support;  // indices of the nonzero entries
    double noise_std = 0.0;
};

// X entries i.i.d. standard normal; support chosen uniformly; nonzero
// entries have magnitude uniform in [0.5, 1.5] with random sign, so "support
// recovered" is well posed. Fully determined by the seed.
RegressionSet gen_sparse_linear(std::size_t n, std::size_t d, std::size_t k,
                                double noise_std, std::uint64_t seed);

// 2-D Gaussian clusters with class means on a circle of the given radius.
// Labels are assigned round-robin, so per-class counts differ by at most 1.
struct ClassificationSet {
    Matrix x;  // n x 2
    std::vector<int> labels;
    std::size_t classes = 0;
    std::vector<std::array<double, 2>> means;
    double stddev = 0.0;
};

ClassificationSet gen_gaussian_blobs(std::size_t n, std::size_t classes, double separation,
                                     double stddev, std::uint64_t seed);

// CSV export, header row "x0,...,x<d-1>,y" / "x0,x1,label".
void export_regression_csv(const RegressionSet& set, const std::string& path);
void export_classification_csv(const ClassificationSet& set, const std::string& path);

}  // namespace pwd
