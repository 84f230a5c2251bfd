#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "pwd/models.hpp"
#include "pwd/verification.hpp"

using namespace pwd;

TEST_CASE("toy loss values and gradients") {
    CHECK(toy_loss_and_grad(1.0) == std::pair{0.0, 0.0});
    CHECK(toy_loss_and_grad(0.0) == std::pair{0.5, -1.0});
    CHECK(toy_loss_and_grad(2.0) == std::pair{0.5, 1.0});
}

TEST_CASE("quadratic loss with identity matrix") {
    Matrix a(2, 2);
    a.at(0, 0) = 1.0;
    a.at(1, 1) = 1.0;
    QuadraticLoss q(a, {0.0, 0.0});
    ParamVector grad;
    CHECK(q.loss_and_grad({3.0, 4.0}, grad) == doctest::Approx(12.5));
    CHECK(grad[0] == doctest::Approx(3.0));
    CHECK(grad[1] == doctest::Approx(4.0));
}

TEST_CASE("quadratic stationary point and Lipschitz constant") {
    Matrix a(2, 2);
    a.at(0, 0) = 1.0;
    a.at(1, 1) = 2.0;
    QuadraticLoss q(a, {1.0, 2.0});
    ParamVector grad;
    q.loss_and_grad({1.0, 1.0}, grad);  // w = A^-1 b
    CHECK(std::abs(grad[0]) < 1e-12);
    CHECK(std::abs(grad[1]) < 1e-12);
    CHECK(q.lipschitz() == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("nonsymmetric matrices are rejected") {
    Matrix a(2, 2);
    a.at(0, 1) = 1.0;
    CHECK_THROWS_AS(QuadraticLoss(a, {0.0, 0.0}), std::invalid_argument);
}

TEST_CASE("quadratic gradients are L-Lipschitz with the reported constant") {
    Rng rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t d = 2 + static_cast<std::size_t>(rng.below(5));
        Matrix m(d, d);
        for (auto& e : m.data) e = rng.gaussian();
        Matrix a(d, d);
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = 0; j < d; ++j) {
                double sum = 0.0;
                for (std::size_t k = 0; k < d; ++k) sum += m.at(k, i) * m.at(k, j);
                a.at(i, j) = sum / static_cast<double>(d);
            }
        }
        ParamVector b(d);
        for (auto& e : b) e = rng.gaussian();
        QuadraticLoss q(std::move(a), std::move(b));
        ParamVector w(d), v(d), gw, gv;
        for (std::size_t i = 0; i < d; ++i) {
            w[i] = rng.gaussian();
            v[i] = rng.gaussian();
        }
        q.loss_and_grad(w, gw);
        q.loss_and_grad(v, gv);
        double diff = 0.0, dist = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            diff += (gw[i] - gv[i]) * (gw[i] - gv[i]);
            dist += (w[i] - v[i]) * (w[i] - v[i]);
        }
        CHECK(std::sqrt(diff) <= q.lipschitz() * std::sqrt(dist) * (1.0 + 1e-9));
    }
}

TEST_CASE("linear regression gradient vanishes at the least-squares solution") {
    // 3x2 system with exact solution w = (1, -2)
    Matrix x(3, 2);
    x.at(0, 0) = 1.0;
    x.at(0, 1) = 0.0;
    x.at(1, 0) = 0.0;
    x.at(1, 1) = 1.0;
    x.at(2, 0) = 1.0;
    x.at(2, 1) = 1.0;
    const ParamVector w_star = {1.0, -2.0};
    LinRegLoss m(x, matvec(x, w_star));
    ParamVector grad;
    m.loss_and_grad(w_star, grad);
    CHECK(std::sqrt(norm2(grad)) < 1e-10);
}

TEST_CASE("zero design matrix gives constant loss and zero gradient") {
    Matrix x(4, 3);
    LinRegLoss m(x, {1.0, 2.0, 3.0, 4.0});
    ParamVector grad;
    const double loss = m.loss_and_grad({5.0, -6.0, 7.0}, grad);
    CHECK(loss == doctest::Approx(30.0 / 8.0));  // ||y||^2 / (2n)
    CHECK(norm2(grad) == 0.0);
}

TEST_CASE("linear regression gradient matches finite differences") {
    Rng rng(21);
    Matrix x(20, 5);
    for (auto& e : x.data) e = rng.gaussian();
    ParamVector y(20);
    for (auto& e : y) e = rng.gaussian();
    LinRegLoss m(x, y);
    ParamVector w(5), grad;
    for (auto& e : w) e = rng.gaussian();
    m.loss_and_grad(w, grad);
    const double err = grad_check([&m](const ParamVector& v) { return m.loss(v); }, grad, w);
    CHECK(err < 1e-6);
}

TEST_CASE("logistic regression at zero weights gives ln 2") {
    Matrix x(6, 2);
    Rng rng(5);
    for (auto& e : x.data) e = rng.gaussian();
    LogRegLoss m(x, {0, 1, 0, 1, 0, 1});
    CHECK(m.loss({0.0, 0.0}) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("separable data scaled along the separator drives the loss to zero") {
    Matrix x(4, 2);
    x.at(0, 0) = 1.0;
    x.at(1, 0) = 2.0;
    x.at(2, 0) = -1.0;
    x.at(3, 0) = -2.0;
    LogRegLoss m(x, {1, 1, 0, 0});
    CHECK(m.loss({30.0, 0.0}) < 1e-3);
    CHECK(m.accuracy({30.0, 0.0}) == 1.0);
}

TEST_CASE("logistic gradient matches finite differences") {
    Rng rng(31);
    Matrix x(25, 4);
    for (auto& e : x.data) e = rng.gaussian();
    std::vector<int> labels(25);
    for (auto& l : labels) l = rng.uniform() < 0.5 ? 0 : 1;
    LogRegLoss m(x, labels);
    ParamVector w(4), grad;
    for (auto& e : w) e = rng.gaussian();
    m.loss_and_grad(w, grad);
    const double err = grad_check([&m](const ParamVector& v) { return m.loss(v); }, grad, w);
    CHECK(err < 1e-6);
}

TEST_CASE("labels outside {0,1} are rejected") {
    Matrix x(1, 1);
    CHECK_THROWS_AS(LogRegLoss(x, {2}), std::invalid_argument);
}

namespace {

std::vector<ParamGroup> mlp_groups_from(const MlpModel& model,
                                        const std::vector<ParamVector>& values) {
    Rng rng(0);
    auto groups = init_params(model, rng);
    REQUIRE(groups.size() == values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        REQUIRE(groups[i].params.size() == values[i].size());
        groups[i].params = values[i];
    }
    return groups;
}

}  // namespace

TEST_CASE("zero-parameter network produces the uniform softmax and ln(classes)") {
    MlpModel model{{2, 4, 3}};
    Rng rng(1);
    auto groups = init_params(model, rng);
    for (auto& g : groups) std::fill(g.params.begin(), g.params.end(), 0.0);
    Matrix batch(5, 2);
    for (std::size_t i = 0; i < batch.data.size(); ++i) batch.data[i] = double(i) - 3.0;
    MlpCache cache;
    const auto logits = mlp_forward(model, groups, batch, cache);
    const auto probs = softmax(logits);
    for (std::size_t i = 0; i < probs.rows; ++i) {
        for (std::size_t j = 0; j < probs.cols; ++j) {
            CHECK(probs.at(i, j) == doctest::Approx(1.0 / 3.0));
        }
    }
    CHECK(mlp_loss(logits, {0, 1, 2, 0, 1}) == doctest::Approx(std::log(3.0)));
}

// Golden values computed once by hand for a fixed 2-2-2 tanh network:
// W1 = [[0.1,-0.2],[0.3,0.4]], b1 = [0.05,-0.05],
// W2 = [[0.7,-0.6],[-0.5,0.8]], b2 = [0.01,0.02], input (0.5,-1).
TEST_CASE("hand-computed 2-2-2 tanh network forward pass") {
    MlpModel model{{2, 2, 2}};
    auto groups = mlp_groups_from(model, {{0.1, -0.2, 0.3, 0.4},
                                          {0.05, -0.05},
                                          {0.7, -0.6, -0.5, 0.8},
                                          {0.01, 0.02}});
    Matrix batch(1, 2);
    batch.at(0, 0) = 0.5;
    batch.at(0, 1) = -1.0;
    MlpCache cache;
    const auto logits = mlp_forward(model, groups, batch, cache);
    CHECK(logits.at(0, 0) == doctest::Approx(0.38870639618706815).epsilon(1e-12));
    CHECK(logits.at(0, 1) == doctest::Approx(-0.35870639618706818).epsilon(1e-12));
    const auto probs = softmax(logits);
    CHECK(probs.at(0, 0) == doctest::Approx(0.67861469844526978).epsilon(1e-12));
    CHECK(probs.at(0, 1) == doctest::Approx(0.32138530155473022).epsilon(1e-12));
    CHECK(mlp_loss(logits, {0}) == doctest::Approx(0.38770176691186542).epsilon(1e-12));
}

TEST_CASE("softmax rows sum to one within 1e-12") {
    MlpModel model{{2, 8, 4}};
    Rng rng(3);
    auto groups = init_params(model, rng);
    Matrix batch(16, 2);
    for (auto& e : batch.data) e = 3.0 * rng.gaussian();
    MlpCache cache;
    const auto probs = softmax(mlp_forward(model, groups, batch, cache));
    for (std::size_t i = 0; i < probs.rows; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < probs.cols; ++j) sum += probs.at(i, j);
        CHECK(std::abs(sum - 1.0) <= 1e-12);
    }
}

TEST_CASE("batch order permutation leaves per-sample logits unchanged") {
    MlpModel model{{2, 6, 3}};
    Rng rng(9);
    auto groups = init_params(model, rng);
    Matrix batch(4, 2);
    for (auto& e : batch.data) e = rng.gaussian();
    Matrix reversed(4, 2);
    for (std::size_t i = 0; i < 4; ++i) {
        reversed.at(i, 0) = batch.at(3 - i, 0);
        reversed.at(i, 1) = batch.at(3 - i, 1);
    }
    MlpCache c1, c2;
    const auto l1 = mlp_forward(model, groups, batch, c1);
    const auto l2 = mlp_forward(model, groups, reversed, c2);
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(l1.at(i, j) == l2.at(3 - i, j));
        }
    }
}

TEST_CASE("mlp backward matches finite differences on a 2-8-2 network") {
    MlpModel model{{2, 8, 2}};
    Rng rng(77);
    auto groups = init_params(model, rng);
    // biases get nonzero values so their gradients are exercised too
    for (auto& g : groups) {
        for (auto& w : g.params) {
            if (!g.decay_eligible) w = 0.1 * rng.gaussian();
        }
    }
    Matrix batch(16, 2);
    for (auto& e : batch.data) e = rng.gaussian();
    std::vector<int> labels(16);
    for (auto& l : labels) l = rng.uniform() < 0.5 ? 0 : 1;

    MlpCache cache;
    mlp_forward(model, groups, batch, cache);
    const auto grads = mlp_backward(model, groups, cache, labels);

    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        const auto& w0 = groups[gi].params;
        auto f = [&](const ParamVector& v) {
            auto probe = groups;
            probe[gi].params = v;
            MlpCache c;
            return mlp_loss(mlp_forward(model, probe, batch, c), labels);
        };
        const double err = grad_check(f, grads[gi].params, w0);
        CHECK(err < 1e-5);
    }
}

TEST_CASE("duplicated sample equals the single sample mean gradient") {
    MlpModel model{{2, 4, 2}};
    Rng rng(13);
    auto groups = init_params(model, rng);
    Matrix one(1, 2);
    one.at(0, 0) = 0.3;
    one.at(0, 1) = -0.7;
    Matrix two(2, 2);
    for (int i = 0; i < 2; ++i) {
        two.at(i, 0) = 0.3;
        two.at(i, 1) = -0.7;
    }
    MlpCache c1, c2;
    mlp_forward(model, groups, one, c1);
    mlp_forward(model, groups, two, c2);
    const auto g1 = mlp_backward(model, groups, c1, {1});
    const auto g2 = mlp_backward(model, groups, c2, {1, 1});
    for (std::size_t gi = 0; gi < g1.size(); ++gi) {
        for (std::size_t i = 0; i < g1[gi].params.size(); ++i) {
            CHECK(g2[gi].params[i] == doctest::Approx(g1[gi].params[i]).epsilon(1e-14));
        }
    }
}

TEST_CASE("gradients vanish when the softmax equals the one-hot target") {
    // Two logit-space symmetric samples with opposite labels cancel exactly
    // in the head when the network is symmetric; simpler: a single sample
    // with an extreme margin has softmax numerically equal to the one-hot.
    MlpModel model{{1, 2}};
    auto groups = mlp_groups_from(model, {{50.0, -50.0}, {0.0, 0.0}});
    Matrix batch(1, 1);
    batch.at(0, 0) = 20.0;
    MlpCache cache;
    mlp_forward(model, groups, batch, cache);
    const auto grads = mlp_backward(model, groups, cache, {0});
    for (const auto& g : grads) {
        for (double v : g.params) CHECK(std::abs(v) < 1e-300);
    }
}

TEST_CASE("stale or mismatched caches are rejected") {
    MlpModel model{{2, 4, 2}};
    Rng rng(2);
    auto groups = init_params(model, rng);
    Matrix batch(3, 2);
    MlpCache cache;
    mlp_forward(model, groups, batch, cache);
    CHECK_THROWS_AS(mlp_backward(model, groups, cache, {0, 1}), std::invalid_argument);
    MlpModel other{{2, 5, 2}};
    Rng rng2(2);
    auto groups2 = init_params(other, rng2);
    CHECK_THROWS_AS(mlp_backward(other, groups2, cache, {0, 1, 0}), std::invalid_argument);
    Matrix bad(3, 5);
    MlpCache c2;
    CHECK_THROWS_AS(mlp_forward(model, groups, bad, c2), std::invalid_argument);
}

TEST_CASE("init draws biases at exact zero and marks them ineligible") {
    MlpModel model{{2, 16, 4}};
    Rng rng(42);
    auto groups = init_params(model, rng);
    REQUIRE(groups.size() == 4);
    for (const auto& g : groups) {
        if (g.name.find("bias") != std::string::npos) {
            CHECK_FALSE(g.decay_eligible);
            for (double w : g.params) CHECK(w == 0.0);
        } else {
            CHECK(g.decay_eligible);
        }
    }
    Rng rng2(42);
    const auto again = init_params(model, rng2);
    for (std::size_t i = 0; i < groups.size(); ++i) {
        CHECK(groups[i].params == again[i].params);
    }
}

TEST_CASE("weight scale tracks 1/sqrt(fan_in)") {
    MlpModel model{{16, 625}};
    Rng rng(7);
    const auto groups = init_params(model, rng);
    const auto& w = groups[0].params;
    REQUIRE(w.size() == 10000);
    double sum = 0.0, sum_sq = 0.0;
    for (double x : w) {
        sum += x;
        sum_sq += x * x;
    }
    const double mean = sum / double(w.size());
    const double std = std::sqrt(sum_sq / double(w.size()) - mean * mean);
    const double target = 1.0 / 4.0;  // 1/sqrt(16)
    CHECK(std > 0.8 * target);
    CHECK(std < 1.2 * target);
}
