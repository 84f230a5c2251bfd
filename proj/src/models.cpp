#include "pwd/models.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace pwd {

std::pair<double, double> toy_loss_and_grad(double w) {
    const double r = w - 1.0;
    return {0.5 * r * r, r};
}

namespace {

// Largest eigenvalue of the symmetric PSD map v -> apply(v), by power
// iteration from a fixed seeded start vector.
template <typename Apply>
double power_iteration(std::size_t dim, Apply&& apply) {
    if (dim == 0) return 0.0;
    Rng rng(0x9e3779b9u);
    std::vector<double> v(dim);
    for (auto& x : v) x = rng.gaussian();
    double eig = 0.0;
    for (int iter = 0; iter < 1000; ++iter) {
        std::vector<double> av = apply(v);
        const double norm = std::sqrt(norm2(av));
        if (norm == 0.0) return 0.0;
        for (auto& x : av) x /= norm;
        const double next = dot(av, apply(av));
        v = std::move(av);
        if (iter > 10 && std::abs(next - eig) <= 1e-13 * std::max(1.0, std::abs(next))) {
            return next;
        }
        eig = next;
    }
    return eig;
}

}  // namespace

QuadraticLoss::QuadraticLoss(Matrix a, ParamVector b) : a_(std::move(a)), b_(std::move(b)) {
    if (a_.rows != a_.cols || a_.rows != b_.size()) {
        throw std::invalid_argument("QuadraticLoss: dimension mismatch");
    }
    for (std::size_t i = 0; i < a_.rows; ++i) {
        for (std::size_t j = i + 1; j < a_.cols; ++j) {
            if (std::abs(a_.at(i, j) - a_.at(j, i)) > 1e-12 * std::max(1.0, std::abs(a_.at(i, j)))) {
                throw std::invalid_argument("QuadraticLoss: matrix must be symmetric");
            }
        }
    }
    lipschitz_ = power_iteration(a_.rows, [this](const std::vector<double>& v) {
        return matvec(a_, v);
    });
}

double QuadraticLoss::loss(const ParamVector& w) const {
    const auto aw = matvec(a_, w);
    return 0.5 * dot(w, aw) - dot(b_, w);
}

double QuadraticLoss::loss_and_grad(const ParamVector& w, ParamVector& grad) const {
    grad = matvec(a_, w);
    const double value = 0.5 * dot(w, grad) - dot(b_, w);
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] -= b_[i];
    return value;
}

LinRegLoss::LinRegLoss(Matrix x, ParamVector y) : x_(std::move(x)), y_(std::move(y)) {
    if (x_.rows != y_.size()) throw std::invalid_argument("LinRegLoss: row count mismatch");
    if (x_.rows == 0) throw std::invalid_argument("LinRegLoss: empty design matrix");
    const double n = static_cast<double>(x_.rows);
    lipschitz_ = power_iteration(x_.cols, [this, n](const std::vector<double>& v) {
        auto xv = matvec(x_, v);
        auto xtxv = matvec_transposed(x_, xv);
        for (auto& e : xtxv) e /= n;
        return xtxv;
    });
}

double LinRegLoss::loss(const ParamVector& w) const {
    auto r = matvec(x_, w);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= y_[i];
    return norm2(r) / (2.0 * static_cast<double>(x_.rows));
}

double LinRegLoss::loss_and_grad(const ParamVector& w, ParamVector& grad) const {
    auto r = matvec(x_, w);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= y_[i];
    const double n = static_cast<double>(x_.rows);
    grad = matvec_transposed(x_, r);
    for (auto& g : grad) g /= n;
    return norm2(r) / (2.0 * n);
}

LogRegLoss::LogRegLoss(Matrix x, std::vector<int> labels)
    : x_(std::move(x)), labels_(std::move(labels)) {
    if (x_.rows != labels_.size()) throw std::invalid_argument("LogRegLoss: row count mismatch");
    for (int y : labels_) {
        if (y != 0 && y != 1) throw std::invalid_argument("LogRegLoss: labels must be 0 or 1");
    }
}

namespace {

// log(1 + exp(z)) without overflow.
double log1p_exp(double z) {
    if (z > 0.0) return z + std::log1p(std::exp(-z));
    return std::log1p(std::exp(z));
}

}  // namespace

double LogRegLoss::loss(const ParamVector& w) const {
    const auto z = matvec(x_, w);
    double sum = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        // -y log(sigma) - (1-y) log(1-sigma) = log(1+exp(z)) - y z
        sum += log1p_exp(z[i]) - static_cast<double>(labels_[i]) * z[i];
    }
    return sum / static_cast<double>(z.size());
}

double LogRegLoss::loss_and_grad(const ParamVector& w, ParamVector& grad) const {
    const auto z = matvec(x_, w);
    const double n = static_cast<double>(z.size());
    double sum = 0.0;
    std::vector<double> r(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        sum += log1p_exp(z[i]) - static_cast<double>(labels_[i]) * z[i];
        const double sigma = 1.0 / (1.0 + std::exp(-z[i]));
        r[i] = sigma - static_cast<double>(labels_[i]);
    }
    grad = matvec_transposed(x_, r);
    for (auto& g : grad) g /= n;
    return sum / n;
}

double LogRegLoss::accuracy(const ParamVector& w) const {
    const auto z = matvec(x_, w);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        const int pred = z[i] > 0.0 ? 1 : 0;
        if (pred == labels_[i]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(z.size());
}

std::vector<ParamGroup> init_params(const MlpModel& model, Rng& rng) {
    if (model.layer_sizes.size() < 2) throw std::invalid_argument("init_params: need at least one layer");
    std::vector<ParamGroup> groups;
    for (std::size_t l = 0; l + 1 < model.layer_sizes.size(); ++l) {
        const std::size_t fan_in = model.layer_sizes[l];
        const std::size_t fan_out = model.layer_sizes[l + 1];
        const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));

        ParamGroup weight;
        weight.name = "layer" + std::to_string(l) + ".weight";
        weight.shape = {fan_out, fan_in};
        weight.params.resize(fan_out * fan_in);
        for (auto& w : weight.params) w = scale * rng.gaussian();
        weight.decay_eligible = true;
        groups.push_back(std::move(weight));

        ParamGroup bias;
        bias.name = "layer" + std::to_string(l) + ".bias";
        bias.shape = {fan_out};
        bias.params.assign(fan_out, 0.0);
        bias.decay_eligible = false;  // initialized at 0, must never decay
        groups.push_back(std::move(bias));
    }
    return groups;
}

namespace {

void check_mlp_params(const MlpModel& model, const std::vector<ParamGroup>& params) {
    if (params.size() != 2 * model.layers()) {
        throw std::invalid_argument("mlp: parameter group count mismatch");
    }
    for (std::size_t l = 0; l < model.layers(); ++l) {
        const std::size_t fan_in = model.layer_sizes[l];
        const std::size_t fan_out = model.layer_sizes[l + 1];
        if (params[2 * l].params.size() != fan_in * fan_out ||
            params[2 * l + 1].params.size() != fan_out) {
            throw std::invalid_argument("mlp: parameter shape mismatch at layer " + std::to_string(l));
        }
    }
}

}  // namespace

Matrix mlp_forward(const MlpModel& model, const std::vector<ParamGroup>& params,
                   const Matrix& batch, MlpCache& cache) {
    check_mlp_params(model, params);
    if (batch.cols != model.layer_sizes.front()) {
        throw std::invalid_argument("mlp_forward: batch width does not match input layer");
    }
    cache.input = batch;
    cache.activations.clear();
    cache.layer_sizes = model.layer_sizes;

    Matrix act = batch;
    for (std::size_t l = 0; l < model.layers(); ++l) {
        const auto& w = params[2 * l].params;
        const auto& b = params[2 * l + 1].params;
        const std::size_t fan_in = model.layer_sizes[l];
        const std::size_t fan_out = model.layer_sizes[l + 1];
        Matrix next(act.rows, fan_out);
        for (std::size_t i = 0; i < act.rows; ++i) {
            const double* in = act.data.data() + i * fan_in;
            for (std::size_t o = 0; o < fan_out; ++o) {
                const double* wrow = w.data() + o * fan_in;
                double z = b[o];
                for (std::size_t j = 0; j < fan_in; ++j) z += wrow[j] * in[j];
                next.at(i, o) = z;
            }
        }
        const bool last = (l + 1 == model.layers());
        if (!last) {
            if (model.activation == Activation::Tanh) {
                for (auto& z : next.data) z = std::tanh(z);
            } else {
                for (auto& z : next.data) z = std::max(z, 0.0);
            }
            cache.activations.push_back(next);
        }
        act = std::move(next);
    }
    cache.logits = act;
    return act;
}

Matrix softmax(const Matrix& logits) {
    Matrix out(logits.rows, logits.cols);
    for (std::size_t i = 0; i < logits.rows; ++i) {
        const double* row = logits.data.data() + i * logits.cols;
        double mx = row[0];
        for (std::size_t j = 1; j < logits.cols; ++j) mx = std::max(mx, row[j]);
        double sum = 0.0;
        for (std::size_t j = 0; j < logits.cols; ++j) {
            const double e = std::exp(row[j] - mx);
            out.at(i, j) = e;
            sum += e;
        }
        for (std::size_t j = 0; j < logits.cols; ++j) out.at(i, j) /= sum;
    }
    return out;
}

double mlp_loss(const Matrix& logits, const std::vector<int>& labels) {
    if (labels.size() != logits.rows) throw std::invalid_argument("mlp_loss: label count mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.rows; ++i) {
        const double* row = logits.data.data() + i * logits.cols;
        double mx = row[0];
        for (std::size_t j = 1; j < logits.cols; ++j) mx = std::max(mx, row[j]);
        double lse = 0.0;
        for (std::size_t j = 0; j < logits.cols; ++j) lse += std::exp(row[j] - mx);
        lse = mx + std::log(lse);
        sum += lse - row[labels[i]];
    }
    return sum / static_cast<double>(logits.rows);
}

double mlp_accuracy(const Matrix& logits, const std::vector<int>& labels) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < logits.rows; ++i) {
        const double* row = logits.data.data() + i * logits.cols;
        std::size_t best = 0;
        for (std::size_t j = 1; j < logits.cols; ++j) {
            if (row[j] > row[best]) best = j;
        }
        if (static_cast<int>(best) == labels[i]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(logits.rows);
}

std::vector<ParamGroup> mlp_backward(const MlpModel& model,
                                     const std::vector<ParamGroup>& params,
                                     const MlpCache& cache, const std::vector<int>& labels) {
    check_mlp_params(model, params);
    if (cache.layer_sizes != model.layer_sizes) {
        throw std::invalid_argument("mlp_backward: cache does not match this model");
    }
    if (labels.size() != cache.logits.rows) {
        throw std::invalid_argument("mlp_backward: label count mismatch");
    }

    const std::size_t batch = cache.logits.rows;
    const double inv_batch = 1.0 / static_cast<double>(batch);

    std::vector<ParamGroup> grads = params;
    for (auto& g : grads) std::fill(g.params.begin(), g.params.end(), 0.0);

    // dL/dz at the head: (softmax - onehot)/batch.
    Matrix dz = softmax(cache.logits);
    for (std::size_t i = 0; i < batch; ++i) {
        dz.at(i, labels[i]) -= 1.0;
    }
    for (auto& v : dz.data) v *= inv_batch;

    for (std::size_t l = model.layers(); l-- > 0;) {
        const Matrix& below = (l == 0) ? cache.input : cache.activations[l - 1];
        const std::size_t fan_in = model.layer_sizes[l];
        const std::size_t fan_out = model.layer_sizes[l + 1];
        auto& dw = grads[2 * l].params;
        auto& db = grads[2 * l + 1].params;
        for (std::size_t i = 0; i < batch; ++i) {
            const double* in = below.data.data() + i * fan_in;
            const double* d = dz.data.data() + i * fan_out;
            for (std::size_t o = 0; o < fan_out; ++o) {
                db[o] += d[o];
                double* wrow = dw.data() + o * fan_in;
                for (std::size_t j = 0; j < fan_in; ++j) wrow[j] += d[o] * in[j];
            }
        }
        if (l == 0) break;

        const auto& w = params[2 * l].params;
        Matrix dz_below(batch, fan_in);
        for (std::size_t i = 0; i < batch; ++i) {
            const double* d = dz.data.data() + i * fan_out;
            double* out = dz_below.data.data() + i * fan_in;
            for (std::size_t o = 0; o < fan_out; ++o) {
                const double* wrow = w.data() + o * fan_in;
                for (std::size_t j = 0; j < fan_in; ++j) out[j] += d[o] * wrow[j];
            }
        }
        const Matrix& act = cache.activations[l - 1];
        if (model.activation == Activation::Tanh) {
            for (std::size_t idx = 0; idx < dz_below.data.size(); ++idx) {
                const double a = act.data[idx];
                dz_below.data[idx] *= 1.0 - a * a;
            }
        } else {
            for (std::size_t idx = 0; idx < dz_below.data.size(); ++idx) {
                if (act.data[idx] <= 0.0) dz_below.data[idx] = 0.0;
            }
        }
        dz = std::move(dz_below);
    }
    return grads;
}

}  // namespace pwd
