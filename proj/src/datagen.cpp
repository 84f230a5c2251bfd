#include "pwd/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace pwd {

RegressionSet gen_sparse_linear(std::size_t n, std::size_t d, std::size_t k,
                                double noise_std, std::uint64_t seed) {
    if (k > d) throw std::invalid_argument("gen_sparse_linear: k must not exceed d");
    if (n == 0) throw std::invalid_argument("gen_sparse_linear: n must be positive");
    if (noise_std < 0.0) throw std::invalid_argument("gen_sparse_linear: negative noise_std");

    Rng rng(seed);
    RegressionSet set;
    set.noise_std = noise_std;
    set.x = Matrix(n, d);
    for (auto& e : set.x.data) e = rng.gaussian();

    // Support via partial Fisher-Yates over the index range.
    std::vector<std::size_t> idx(d);
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(d - i));
        std::swap(idx[i], idx[j]);
    }
    set.support.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(set.support.begin(), set.support.end());

    set.w_true.assign(d, 0.0);
    for (std::size_t s : set.support) {
        const double mag = 0.5 + rng.uniform();  // [0.5, 1.5)
        const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
        set.w_true[s] = sign * mag;
    }

    set.y = matvec(set.x, set.w_true);
    for (auto& yi : set.y) yi += noise_std * rng.gaussian();
    return set;
}

ClassificationSet gen_gaussian_blobs(std::size_t n, std::size_t classes, double separation,
                                     double stddev, std::uint64_t seed) {
    if (classes < 2) throw std::invalid_argument("gen_gaussian_blobs: need at least 2 classes");
    if (stddev < 0.0) throw std::invalid_argument("gen_gaussian_blobs: negative stddev");

    Rng rng(seed);
    ClassificationSet set;
    set.classes = classes;
    set.stddev = stddev;
    for (std::size_t c = 0; c < classes; ++c) {
        const double angle = 2.0 * M_PI * static_cast<double>(c) / static_cast<double>(classes);
        set.means.push_back({separation * std::cos(angle), separation * std::sin(angle)});
    }
    set.x = Matrix(n, 2);
    set.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t c = i % classes;
        set.labels[i] = static_cast<int>(c);
        set.x.at(i, 0) = set.means[c][0] + stddev * rng.gaussian();
        set.x.at(i, 1) = set.means[c][1] + stddev * rng.gaussian();
    }
    return set;
}

namespace {

std::string format_value(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    return out;
}

}  // namespace

void export_regression_csv(const RegressionSet& set, const std::string& path) {
    auto out = open_output(path);
    for (std::size_t j = 0; j < set.x.cols; ++j) out << "x" << j << ",";
    out << "y\n";
    for (std::size_t i = 0; i < set.x.rows; ++i) {
        for (std::size_t j = 0; j < set.x.cols; ++j) {
            out << format_value(set.x.at(i, j)) << ",";
        }
        out << format_value(set.y[i]) << "\n";
    }
}

void export_classification_csv(const ClassificationSet& set, const std::string& path) {
    auto out = open_output(path);
    out << "x0,x1,label\n";
    for (std::size_t i = 0; i < set.x.rows; ++i) {
        out << format_value(set.x.at(i, 0)) << "," << format_value(set.x.at(i, 1)) << ","
            << set.labels[i] << "\n";
    }
}

}  // namespace pwd
