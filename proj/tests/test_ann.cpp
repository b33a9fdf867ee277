// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch.hpp>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <vector>

#include "ocirloc/ann.hpp"

using namespace ocirloc;

namespace {

MlpModel zero_model(std::size_t n0, std::size_t n1) {
    MlpModel m;
    m.w0 = Matrix(n1, n0);
    m.b0.assign(n1, 0.0);
    m.w1 = Matrix(2, n1);
    m.b1.assign(2, 0.0);
    return m;
}

double loss_of(const MlpModel& m, const Matrix& x, const Matrix& y, double l1) {
    return loss(m.forward_batch(x), y, m, l1);
}

/// Largest singular value by power iteration on W^T W.
double spectral_norm(const Matrix& w) {
    std::vector<double> v(w.cols, 1.0 / std::sqrt(static_cast<double>(w.cols)));
    double sigma = 0.0;
    for (int it = 0; it < 100; ++it) {
        std::vector<double> u(w.rows, 0.0);
        for (std::size_t i = 0; i < w.rows; ++i)
            for (std::size_t k = 0; k < w.cols; ++k)
                u[i] += w(i, k) * v[k];
        std::vector<double> next(w.cols, 0.0);
        for (std::size_t i = 0; i < w.rows; ++i)
            for (std::size_t k = 0; k < w.cols; ++k)
                next[k] += w(i, k) * u[i];
        double norm = 0.0;
        for (double t : next)
            norm += t * t;
        norm = std::sqrt(norm);
        for (double& t : next)
            t /= norm;
        v = next;
        double un = 0.0;
        for (double t : u)
            un += t * t;
        sigma = std::sqrt(un);
    }
    return sigma;
}

/// 100 lattice points whose position is a linear read-out of the (to be
/// standardized) inputs; the easiest task the trainer should nail.
SplitDataset linear_toy_dataset(std::uint64_t seed, double scale = 0.8) {
    std::vector<FingerprintRecord> recs;
    recs.reserve(100);
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j) {
            FingerprintRecord r;
            r.values = {(i - 4.5) / 4.5, (j - 4.5) / 4.5};
            r.label = {scale * r.values[0], scale * r.values[1]};
            recs.push_back(std::move(r));
        }
    return standardize(split(std::move(recs), seed));
}

} // namespace

TEST_CASE("selu values") {
    REQUIRE(selu(0.0) == 0.0);
    REQUIRE(selu(1.0) == Approx(1.05).epsilon(1e-15));
    REQUIRE(selu(-10.0) == Approx(-1.7534204).epsilon(1e-6));
    // continuous at zero, bounded below by -lambda*alpha
    REQUIRE(selu(-1e-12) == Approx(0.0).margin(1e-11));
    REQUIRE(selu(-700.0) > -1.05 * 1.67 - 1e-12);
    REQUIRE(selu_grad(2.0) == Approx(1.05));
    REQUIRE(selu_grad(-1.0) == Approx(1.05 * 1.67 * std::exp(-1.0)));
}

TEST_CASE("forward of the zero model is the origin") {
    const auto m = zero_model(6, 4);
    std::vector<double> input(6, 1.3);
    const auto p = m.forward(input);
    REQUIRE(p.x == 0.0);
    REQUIRE(p.y == 0.0);
}

TEST_CASE("forward hand trace through one neuron") {
    MlpModel m = zero_model(5, 1);
    m.w0(0, 0) = 1.0;
    m.w1(0, 0) = 2.0;
    std::vector<double> e1 = {1.0, 0.0, 0.0, 0.0, 0.0};
    const auto p = m.forward(e1);
    REQUIRE(p.x == Approx(2.0 * selu(1.0)).epsilon(1e-15));
    REQUIRE(p.x == Approx(2.1).epsilon(1e-12));
    REQUIRE(p.y == 0.0);

    std::vector<double> wrong(4, 0.0);
    REQUIRE_THROWS_AS(m.forward(wrong), std::invalid_argument);
}

TEST_CASE("batch forward equals per-sample forward") {
    const auto m = init_model(7, 9, 123);
    CounterRng rng(5);
    Matrix x(7, 11);
    for (double& v : x.a)
        v = rng.next_normal();
    const Matrix y = m.forward_batch(x);
    for (std::size_t j = 0; j < x.cols; ++j) {
        std::vector<double> col(7);
        for (std::size_t k = 0; k < 7; ++k)
            col[k] = x(k, j);
        const auto p = m.forward(col);
        REQUIRE(y(0, j) == Approx(p.x).epsilon(1e-12));
        REQUIRE(y(1, j) == Approx(p.y).epsilon(1e-12));
    }
}

TEST_CASE("loss values") {
    auto m = zero_model(3, 2);
    Matrix pred(2, 1), label(2, 1);

    // perfect prediction, zero weights
    REQUIRE(loss(pred, label, m, 0.001) == 0.0);

    // error (3, 4) -> 12.5
    pred(0, 0) = 3.0;
    pred(1, 0) = 4.0;
    REQUIRE(loss(pred, label, m, 0.001) == Approx(12.5).epsilon(1e-15));

    // zero error, weights {1, -2} -> 0.003
    pred(0, 0) = 0.0;
    pred(1, 0) = 0.0;
    m.w0(0, 0) = 1.0;
    m.w1(1, 1) = -2.0;
    REQUIRE(loss(pred, label, m, 0.001) == Approx(0.003).epsilon(1e-15));
}

TEST_CASE("zero-error batch with zero weights has zero gradient") {
    auto m = zero_model(4, 3);
    Matrix x(4, 5);
    for (double& v : x.a)
        v = 0.7;
    Matrix y(2, 5); // labels at the origin match the zero model's output
    const auto g = backward(m, x, y, 0.001);
    for (double v : g.w0.a)
        REQUIRE(v == 0.0);
    for (double v : g.w1.a)
        REQUIRE(v == 0.0);
    for (double v : g.b0)
        REQUIRE(v == 0.0);
    for (double v : g.b1)
        REQUIRE(v == 0.0);
}

TEST_CASE("analytic gradients match central finite differences") {
    const double h = 1e-5;
    const double l1 = 0.001;
    for (int rep = 0; rep < 10; ++rep) {
        auto m = init_model(7, 5, 1000 + rep);
        CounterRng rng(mix_key({static_cast<std::uint64_t>(rep), 0xfdull}));
        Matrix x(7, 3), y(2, 3);
        for (double& v : x.a)
            v = rng.next_normal();
        for (double& v : y.a)
            v = rng.next_normal();

        const auto g = backward(m, x, y, l1);

        auto check = [&](double* w, double analytic) {
            if (std::abs(*w) <= 1e-6)
                return; // subgradient neighborhood excluded
            const double keep = *w;
            *w = keep + h;
            const double up = loss_of(m, x, y, l1);
            *w = keep - h;
            const double dn = loss_of(m, x, y, l1);
            *w = keep;
            const double fd = (up - dn) / (2.0 * h);
            const double rel = std::abs(analytic - fd) / std::max({1.0, std::abs(analytic), std::abs(fd)});
            REQUIRE(rel <= 1e-5);
        };

        for (std::size_t i = 0; i < m.w0.a.size(); ++i)
            check(&m.w0.a[i], g.w0.a[i]);
        for (std::size_t i = 0; i < m.w1.a.size(); ++i)
            check(&m.w1.a[i], g.w1.a[i]);
        for (std::size_t i = 0; i < m.b0.size(); ++i)
            check(&m.b0[i], g.b0[i]);
        for (std::size_t i = 0; i < m.b1.size(); ++i)
            check(&m.b1[i], g.b1[i]);
    }
}

TEST_CASE("duplicating every sample leaves the gradient unchanged") {
    auto m = init_model(5, 4, 77);
    CounterRng rng(3);
    Matrix x(5, 3), y(2, 3);
    for (double& v : x.a)
        v = rng.next_normal();
    for (double& v : y.a)
        v = rng.next_normal();

    Matrix x2(5, 6), y2(2, 6);
    for (std::size_t j = 0; j < 6; ++j) {
        for (std::size_t k = 0; k < 5; ++k)
            x2(k, j) = x(k, j % 3);
        y2(0, j) = y(0, j % 3);
        y2(1, j) = y(1, j % 3);
    }

    const auto g1 = backward(m, x, y, 0.001);
    const auto g2 = backward(m, x2, y2, 0.001);
    for (std::size_t i = 0; i < g1.w0.a.size(); ++i)
        REQUIRE(g2.w0.a[i] == Approx(g1.w0.a[i]).epsilon(1e-12).margin(1e-15));
    for (std::size_t i = 0; i < g1.w1.a.size(); ++i)
        REQUIRE(g2.w1.a[i] == Approx(g1.w1.a[i]).epsilon(1e-12).margin(1e-15));
}

TEST_CASE("training solves a linear toy regression") {
    // labels span 1.6 m; the bar is 1e-3 of that scale within 500 epochs
    const auto ds = linear_toy_dataset(11);
    TrainConfig cfg;
    cfg.hidden_units = 16;
    cfg.batch_size = 128;
    cfg.batches_per_epoch = 300;
    cfg.max_epochs = 500;
    cfg.patience = 500;
    cfg.l1 = 0.0;
    cfg.learning_rate = 3e-3;
    cfg.seed = 6;

    const auto result = train(ds, cfg);
    REQUIRE(result.report.best_val_rmse_cm < 0.16);
    REQUIRE(result.report.stopped_epoch <= 500);
    REQUIRE(evaluate_rmse(result.model, ds.test) < 0.5);
}

TEST_CASE("early stopping fires exactly patience epochs after the best") {
    const auto ds = linear_toy_dataset(13);
    TrainConfig cfg;
    cfg.hidden_units = 4;
    cfg.batch_size = 8;
    cfg.batches_per_epoch = 2;
    cfg.max_epochs = 100;
    cfg.patience = 5;
    cfg.learning_rate = 0.0; // frozen model: epoch 1 is the only minimum
    cfg.seed = 2;

    const auto result = train(ds, cfg);
    REQUIRE(result.report.best_epoch == 1);
    REQUIRE(result.report.stopped_epoch == cfg.patience + 1);
    REQUIRE(result.report.val_rmse_cm.size() == cfg.patience + 1);
}

TEST_CASE("training is deterministic given the seed") {
    const auto ds = linear_toy_dataset(17);
    TrainConfig cfg;
    cfg.hidden_units = 8;
    cfg.batch_size = 8;
    cfg.batches_per_epoch = 4;
    cfg.max_epochs = 30;
    cfg.patience = 30;
    cfg.seed = 9;

    const auto a = train(ds, cfg);
    const auto b = train(ds, cfg);
    REQUIRE(a.report.val_rmse_cm == b.report.val_rmse_cm);
    REQUIRE(std::memcmp(a.model.w0.a.data(), b.model.w0.a.data(),
                        a.model.w0.a.size() * sizeof(double)) == 0);

    TrainConfig other = cfg;
    other.seed = 10;
    const auto c = train(ds, other);
    REQUIRE(a.report.val_rmse_cm != c.report.val_rmse_cm);
}

TEST_CASE("returned snapshot never trails the final epoch") {
    const auto ds = linear_toy_dataset(23);
    TrainConfig cfg;
    cfg.hidden_units = 8;
    cfg.batch_size = 8;
    cfg.batches_per_epoch = 4;
    cfg.max_epochs = 60;
    cfg.patience = 60;
    cfg.seed = 3;
    const auto result = train(ds, cfg);
    REQUIRE(result.report.best_val_rmse_cm <= result.report.val_rmse_cm.back() + 1e-12);
    REQUIRE(evaluate_rmse(result.model, ds.validation) ==
            Approx(result.report.best_val_rmse_cm).epsilon(1e-12));
}

TEST_CASE("divergence raises instead of returning junk") {
    const auto ds = linear_toy_dataset(29);
    TrainConfig cfg;
    cfg.hidden_units = 8;
    cfg.batch_size = 8;
    cfg.batches_per_epoch = 4;
    cfg.max_epochs = 50;
    cfg.patience = 50;
    cfg.optimizer = TrainConfig::Optimizer::MomentumSgd;
    cfg.learning_rate = 1e12;
    REQUIRE_THROWS_AS(train(ds, cfg), std::runtime_error);
}

TEST_CASE("evaluate_rmse closed-form cases") {
    auto m = zero_model(3, 2);
    std::vector<FingerprintRecord> recs(4);
    for (auto& r : recs) {
        r.values = {0.0, 0.0, 0.0};
        r.label = {0.0, 0.0};
    }
    REQUIRE(evaluate_rmse(m, recs) == 0.0);

    // constant offset (0.03, 0.04) m -> 5 cm
    m.b1 = {0.03, 0.04};
    REQUIRE(evaluate_rmse(m, recs) == Approx(5.0).epsilon(1e-12));

    // single record, 1 cm error on x
    m.b1 = {0.01, 0.0};
    std::vector<FingerprintRecord> one(recs.begin(), recs.begin() + 1);
    REQUIRE(evaluate_rmse(m, one) == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("rmse squared equals twice the mean MSE term") {
    const auto m = init_model(6, 5, 31);
    CounterRng rng(8);
    std::vector<FingerprintRecord> recs(40);
    for (auto& r : recs) {
        r.values.resize(6);
        for (double& v : r.values)
            v = rng.next_normal();
        r.label = {rng.next_normal(), rng.next_normal()};
    }
    const double rmse_m = evaluate_rmse(m, recs) / 100.0;

    CompensatedSum eps;
    for (const auto& r : recs) {
        const auto p = m.forward(r.values);
        const double ex = p.x - r.label.x;
        const double ey = p.y - r.label.y;
        eps.add(0.5 * (ex * ex + ey * ey));
    }
    const double mean_eps = eps.value() / static_cast<double>(recs.size());
    REQUIRE(rmse_m * rmse_m == Approx(2.0 * mean_eps).epsilon(1e-12));
}

TEST_CASE("forward is Lipschitz within the operator-norm bound") {
    for (int rep = 0; rep < 5; ++rep) {
        const auto m = init_model(8, 6, 500 + rep);
        const double bound = m.selu_lambda * spectral_norm(m.w1) * spectral_norm(m.w0);
        CounterRng rng(mix_key({static_cast<std::uint64_t>(rep), 0x11ull}));
        for (int pair = 0; pair < 20; ++pair) {
            std::vector<double> x(8), y(8);
            for (std::size_t k = 0; k < 8; ++k) {
                x[k] = 3.0 * rng.next_normal();
                y[k] = 3.0 * rng.next_normal();
            }
            const auto fx = m.forward(x);
            const auto fy = m.forward(y);
            double dx = 0.0;
            for (std::size_t k = 0; k < 8; ++k)
                dx += (x[k] - y[k]) * (x[k] - y[k]);
            const double dist_out = std::hypot(fx.x - fy.x, fx.y - fy.y);
            REQUIRE(dist_out <= bound * std::sqrt(dx) * (1.0 + 1e-9) + 1e-12);
        }
    }
}

TEST_CASE("checkpoints round-trip bit-exactly") {
    const std::string path = "test_model_roundtrip.mlp";
    const auto m = init_model(12, 7, 999);
    Standardizer st{3.5, 0.25};
    save_model(path, m, st);
    const auto [m2, st2] = load_model(path);
    std::remove(path.c_str());

    REQUIRE(m2.input_dim() == 12);
    REQUIRE(m2.hidden_dim() == 7);
    REQUIRE(m2.selu_lambda == m.selu_lambda);
    REQUIRE(st2.mean == st.mean);
    REQUIRE(st2.std_dev == st.std_dev);
    REQUIRE(std::memcmp(m2.w0.a.data(), m.w0.a.data(), m.w0.a.size() * sizeof(double)) == 0);
    REQUIRE(std::memcmp(m2.w1.a.data(), m.w1.a.data(), m.w1.a.size() * sizeof(double)) == 0);
    REQUIRE(m2.b0 == m.b0);
    REQUIRE(m2.b1 == m.b1);
}

TEST_CASE("train rejects unstandardized input") {
    auto raw = split(
        [] {
            CounterRng rng(1);
            std::vector<FingerprintRecord> recs(20);
            for (auto& r : recs) {
                r.values = {rng.next_normal(), rng.next_normal()};
                r.label = {0.0, 0.0};
            }
            return recs;
        }(),
        1);
    TrainConfig cfg;
    REQUIRE_THROWS_AS(train(raw, cfg), std::invalid_argument);
}
