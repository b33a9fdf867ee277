// SPDX-License-Identifier: Apache-2.0
//
// ocirloc: indoor optical wireless channel simulation and fingerprint localization

#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ocirloc/dataset.hpp"
#include "ocirloc/io.hpp"
#include "ocirloc/matrix.hpp"
#include "ocirloc/rng.hpp"

namespace ocirloc {

/// Scaled exponential linear unit.
inline double selu(double x, double lambda = 1.05, double alpha = 1.67) {
    return x > 0.0 ? lambda * x : lambda * (alpha * std::exp(x) - alpha);
}

inline double selu_grad(double x, double lambda = 1.05, double alpha = 1.67) {
    return x > 0.0 ? lambda : lambda * alpha * std::exp(x);
}

/// Single-hidden-layer feedforward regressor mapping a standardized
/// supervector to a 2-D position estimate.
struct MlpModel {
    Matrix w0;              // hidden x input
    std::vector<double> b0; // hidden
    Matrix w1;              // 2 x hidden
    std::vector<double> b1; // 2
    double selu_lambda = 1.05;
    double selu_alpha = 1.67;

    std::size_t input_dim() const { return w0.cols; }
    std::size_t hidden_dim() const { return w0.rows; }

    Position forward(std::span<const double> input) const {
        if (input.size() != input_dim())
            throw std::invalid_argument("MlpModel::forward: input length mismatch");
        std::vector<double> h(hidden_dim());
        for (std::size_t i = 0; i < hidden_dim(); ++i) {
            const double* wi = w0.row(i);
            double acc = b0[i];
            for (std::size_t k = 0; k < input.size(); ++k)
                acc += wi[k] * input[k];
            h[i] = selu(acc, selu_lambda, selu_alpha);
        }
        Position out{b1[0], b1[1]};
        for (std::size_t k = 0; k < hidden_dim(); ++k) {
            out.x += w1(0, k) * h[k];
            out.y += w1(1, k) * h[k];
        }
        return out;
    }

    /// Batched forward; columns are samples. Returns the 2 x M estimates.
    Matrix forward_batch(const Matrix& inputs) const {
        Matrix z = affine_cols(w0, inputs, b0);
        for (double& v : z.a)
            v = selu(v, selu_lambda, selu_alpha);
        return affine_cols(w1, z, b1);
    }
};

/// Zero-mean Gaussian init with variance 1/fan-in (the scaling SELU's
/// self-normalizing behaviour assumes); biases start at zero.
inline MlpModel init_model(std::size_t input_dim, std::size_t hidden_dim, std::uint64_t seed,
                           double lambda = 1.05, double alpha = 1.67) {
    if (input_dim == 0 || hidden_dim == 0)
        throw std::invalid_argument("init_model: zero dimension");
    MlpModel m;
    m.selu_lambda = lambda;
    m.selu_alpha = alpha;
    m.w0 = Matrix(hidden_dim, input_dim);
    m.b0.assign(hidden_dim, 0.0);
    m.w1 = Matrix(2, hidden_dim);
    m.b1.assign(2, 0.0);
    CounterRng rng(mix_key({seed, 0x1217ull}));
    const double s0 = 1.0 / std::sqrt(static_cast<double>(input_dim));
    for (double& v : m.w0.a)
        v = s0 * rng.next_normal();
    const double s1 = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
    for (double& v : m.w1.a)
        v = s1 * rng.next_normal();
    return m;
}

inline double l1_norm(const Matrix& m) {
    double acc = 0.0;
    for (double v : m.a)
        acc += std::abs(v);
    return acc;
}

/// Mini-batch objective: mean over samples of 0.5 ||error||^2 plus an L1
/// penalty on both coefficient matrices (biases exempt).
inline double loss(const Matrix& predictions, const Matrix& labels, const MlpModel& model,
                   double l1_coeff) {
    if (predictions.rows != 2 || labels.rows != 2 || predictions.cols != labels.cols)
        throw std::invalid_argument("loss: shape mismatch");
    CompensatedSum mse;
    for (std::size_t j = 0; j < predictions.cols; ++j) {
        const double ex = predictions(0, j) - labels(0, j);
        const double ey = predictions(1, j) - labels(1, j);
        mse.add(0.5 * (ex * ex + ey * ey));
    }
    return mse.value() / static_cast<double>(predictions.cols) +
           l1_coeff * (l1_norm(model.w0) + l1_norm(model.w1));
}

struct Gradients {
    Matrix w0;
    std::vector<double> b0;
    Matrix w1;
    std::vector<double> b1;
};

namespace detail {

inline double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

struct BatchPass {
    double mse = 0.0; // mean 0.5||err||^2 over the batch
    Gradients grads;
};

/// Analytic backpropagation through affine-SELU-affine with the L1
/// subgradient (sign(0) = 0).
inline BatchPass backward_pass(const MlpModel& model, const Matrix& inputs, const Matrix& labels,
                               double l1_coeff) {
    if (inputs.cols == 0 || inputs.cols != labels.cols)
        throw std::invalid_argument("backward: batch shape mismatch");
    const std::size_t m = inputs.cols;

    Matrix z = affine_cols(model.w0, inputs, model.b0); // hidden x m (pre-activation)
    Matrix h = z;
    for (double& v : h.a)
        v = selu(v, model.selu_lambda, model.selu_alpha);
    Matrix y = affine_cols(model.w1, h, model.b1); // 2 x m

    BatchPass out;
    Matrix dy(2, m);
    CompensatedSum mse;
    for (std::size_t j = 0; j < m; ++j) {
        const double ex = y(0, j) - labels(0, j);
        const double ey = y(1, j) - labels(1, j);
        mse.add(0.5 * (ex * ex + ey * ey));
        dy(0, j) = ex / static_cast<double>(m);
        dy(1, j) = ey / static_cast<double>(m);
    }
    out.mse = mse.value() / static_cast<double>(m);

    out.grads.w1 = matmul_nt(dy, h);
    out.grads.b1.assign(2, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
        out.grads.b1[0] += dy(0, j);
        out.grads.b1[1] += dy(1, j);
    }

    Matrix dh = matmul_tn(model.w1, dy); // hidden x m
    for (std::size_t i = 0; i < dh.a.size(); ++i)
        dh.a[i] *= selu_grad(z.a[i], model.selu_lambda, model.selu_alpha);

    out.grads.w0 = matmul_nt(dh, inputs);
    out.grads.b0.assign(model.hidden_dim(), 0.0);
    for (std::size_t i = 0; i < dh.rows; ++i) {
        const double* di = dh.row(i);
        double acc = 0.0;
        for (std::size_t j = 0; j < m; ++j)
            acc += di[j];
        out.grads.b0[i] = acc;
    }

    if (l1_coeff != 0.0) {
        for (std::size_t i = 0; i < model.w0.a.size(); ++i)
            out.grads.w0.a[i] += l1_coeff * sign_of(model.w0.a[i]);
        for (std::size_t i = 0; i < model.w1.a.size(); ++i)
            out.grads.w1.a[i] += l1_coeff * sign_of(model.w1.a[i]);
    }
    return out;
}

} // namespace detail

/// Gradients of the mini-batch objective with respect to all parameters.
inline Gradients backward(const MlpModel& model, const Matrix& inputs, const Matrix& labels,
                          double l1_coeff) {
    return detail::backward_pass(model, inputs, labels, l1_coeff).grads;
}

/// Test-set positional root mean squared error in centimeters.
inline double evaluate_rmse(const MlpModel& model, std::span<const FingerprintRecord> records) {
    if (records.empty())
        throw std::invalid_argument("evaluate_rmse: empty record set");
    CompensatedSum sq;
    for (const auto& rec : records) {
        const Position p = model.forward(rec.values);
        const double ex = p.x - rec.label.x;
        const double ey = p.y - rec.label.y;
        sq.add(ex * ex + ey * ey);
    }
    return 100.0 * std::sqrt(sq.value() / static_cast<double>(records.size()));
}

struct TrainConfig {
    std::size_t hidden_units = 400;      // n[1]
    std::size_t batch_size = 128;        // M
    std::size_t batches_per_epoch = 300; // B
    std::size_t max_epochs = 100000;
    std::size_t patience = 200; // epochs without a new validation minimum
    double l1 = 0.001;
    enum class Optimizer { Adam, MomentumSgd };
    Optimizer optimizer = Optimizer::Adam;
    double learning_rate = 1e-3;
    double lr_decay = 1.0; // per-epoch multiplier (1 = constant rate)
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    double momentum = 0.9;
    double selu_lambda = 1.05;
    double selu_alpha = 1.67;
    std::uint64_t seed = 1;

    void validate() const {
        if (hidden_units == 0 || batch_size == 0 || batches_per_epoch == 0 || max_epochs == 0)
            throw std::invalid_argument("TrainConfig: counts must be positive");
        if (patience == 0)
            throw std::invalid_argument("TrainConfig: patience must be positive");
        if (l1 < 0.0)
            throw std::invalid_argument("TrainConfig: l1 must be >= 0");
        if (!(learning_rate >= 0.0))
            throw std::invalid_argument("TrainConfig: bad learning rate");
        if (!(lr_decay > 0.0) || lr_decay > 1.0)
            throw std::invalid_argument("TrainConfig: lr_decay must be in (0, 1]");
    }
};

/// Epoch-by-epoch training record.
struct TrainReport {
    std::vector<double> train_rmse_cm;   // sqrt(2 * mean batch MSE term), cm
    std::vector<double> val_rmse_cm;     // positional RMSE on the validation split
    std::vector<double> train_objective; // full objective including the L1 term
    std::size_t best_epoch = 0;          // 1-based epoch of the returned snapshot
    std::size_t stopped_epoch = 0;
    double best_val_rmse_cm = 0.0;
    double wall_seconds = 0.0;
};

struct TrainResult {
    MlpModel model;
    TrainReport report;
};

namespace detail {

/// Shuffled cycling through the training set: mini-batches keep drawing from
/// a permutation and reshuffle whenever it is exhausted, so B*M per epoch is
/// well defined even when it exceeds the set size.
class BatchCursor {
  public:
    BatchCursor(std::size_t n, std::uint64_t seed)
        : order_(n), rng_(mix_key({seed, 0xbac5e5ull})) {
        std::iota(order_.begin(), order_.end(), 0);
        reshuffle();
    }

    std::size_t next() {
        if (pos_ == order_.size()) {
            reshuffle();
            pos_ = 0;
        }
        return order_[pos_++];
    }

  private:
    void reshuffle() {
        for (std::size_t i = order_.size() - 1; i > 0; --i)
            std::swap(order_[i], order_[rng_.next_below(i + 1)]);
    }

    std::vector<std::size_t> order_;
    CounterRng rng_;
    std::size_t pos_ = 0;
};

} // namespace detail

/// Mini-batch training with early stopping: runs until the validation RMSE
/// sees no new strict minimum for `patience` epochs (or max_epochs) and
/// returns the best snapshot.
inline TrainResult train(const SplitDataset& ds, const TrainConfig& cfg) {
    cfg.validate();
    if (!ds.standardized)
        throw std::invalid_argument("train: dataset must be standardized");
    if (ds.train.empty() || ds.validation.empty())
        throw std::invalid_argument("train: need training and validation data");
    const std::size_t n0 = ds.input_dim();
    for (const auto* g : {&ds.train, &ds.validation, &ds.test})
        for (const auto& rec : *g)
            if (rec.values.size() != n0)
                throw std::invalid_argument("train: inconsistent record lengths");

    const auto t_begin = std::chrono::steady_clock::now();
    MlpModel model = init_model(n0, cfg.hidden_units, cfg.seed, cfg.selu_lambda, cfg.selu_alpha);

    // optimizer state
    Matrix m_w0(model.w0.rows, model.w0.cols), v_w0(model.w0.rows, model.w0.cols);
    Matrix m_w1(model.w1.rows, model.w1.cols), v_w1(model.w1.rows, model.w1.cols);
    std::vector<double> m_b0(model.b0.size(), 0.0), v_b0(model.b0.size(), 0.0);
    std::vector<double> m_b1(model.b1.size(), 0.0), v_b1(model.b1.size(), 0.0);
    std::uint64_t step = 0;
    double epoch_lr = cfg.learning_rate;

    auto apply = [&](std::span<double> w, std::span<const double> g, std::span<double> m1,
                     std::span<double> m2) {
        if (cfg.optimizer == TrainConfig::Optimizer::Adam) {
            const double b1c = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(step));
            const double b2c = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(step));
            for (std::size_t i = 0; i < w.size(); ++i) {
                m1[i] = cfg.adam_beta1 * m1[i] + (1.0 - cfg.adam_beta1) * g[i];
                m2[i] = cfg.adam_beta2 * m2[i] + (1.0 - cfg.adam_beta2) * g[i] * g[i];
                const double mhat = m1[i] / b1c;
                const double vhat = m2[i] / b2c;
                w[i] -= epoch_lr * mhat / (std::sqrt(vhat) + cfg.adam_eps);
            }
        } else {
            for (std::size_t i = 0; i < w.size(); ++i) {
                m1[i] = cfg.momentum * m1[i] + g[i];
                w[i] -= epoch_lr * m1[i];
            }
        }
    };

    detail::BatchCursor cursor(ds.train.size(), cfg.seed);
    Matrix batch_x(n0, cfg.batch_size);
    Matrix batch_y(2, cfg.batch_size);

    TrainReport report;
    MlpModel best = model;
    double best_val = std::numeric_limits<double>::infinity();
    std::size_t best_epoch = 0;

    for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        epoch_lr = cfg.learning_rate * std::pow(cfg.lr_decay, static_cast<double>(epoch - 1));
        CompensatedSum epoch_mse, epoch_obj;
        for (std::size_t b = 0; b < cfg.batches_per_epoch; ++b) {
            for (std::size_t j = 0; j < cfg.batch_size; ++j) {
                const auto& rec = ds.train[cursor.next()];
                for (std::size_t k = 0; k < n0; ++k)
                    batch_x(k, j) = rec.values[k];
                batch_y(0, j) = rec.label.x;
                batch_y(1, j) = rec.label.y;
            }
            auto pass = detail::backward_pass(model, batch_x, batch_y, cfg.l1);
            if (!std::isfinite(pass.mse))
                throw std::runtime_error("train: objective diverged");
            epoch_mse.add(pass.mse);
            epoch_obj.add(pass.mse + cfg.l1 * (l1_norm(model.w0) + l1_norm(model.w1)));
            ++step;
            apply(model.w0.a, pass.grads.w0.a, m_w0.a, v_w0.a);
            apply(model.b0, pass.grads.b0, m_b0, v_b0);
            apply(model.w1.a, pass.grads.w1.a, m_w1.a, v_w1.a);
            apply(model.b1, pass.grads.b1, m_b1, v_b1);
        }
        const double nb = static_cast<double>(cfg.batches_per_epoch);
        report.train_rmse_cm.push_back(100.0 * std::sqrt(2.0 * epoch_mse.value() / nb));
        report.train_objective.push_back(epoch_obj.value() / nb);

        const double val = evaluate_rmse(model, ds.validation);
        report.val_rmse_cm.push_back(val);
        if (val < best_val) {
            best_val = val;
            best = model;
            best_epoch = epoch;
        }
        if (epoch - best_epoch >= cfg.patience) {
            report.stopped_epoch = epoch;
            break;
        }
        report.stopped_epoch = epoch;
    }

    report.best_epoch = best_epoch;
    report.best_val_rmse_cm = best_val;
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin).count();
    return {std::move(best), std::move(report)};
}

// ---------------------------------------------------------------------------
// Checkpoint container: shapes, SELU parameters, standardizer, then the
// little-endian float64 tensors.

inline constexpr char kModelMagic[9] = "OCMLP01\n";

inline void save_model(const std::string& path, const MlpModel& model,
                       const Standardizer& standardizer) {
    auto os = io::open_out(path);
    io::write_magic(os, kModelMagic);
    io::write_u32(os, 1);
    io::write_u32(os, static_cast<std::uint32_t>(model.input_dim()));
    io::write_u32(os, static_cast<std::uint32_t>(model.hidden_dim()));
    io::write_u32(os, 2);
    io::write_f64(os, model.selu_lambda);
    io::write_f64(os, model.selu_alpha);
    io::write_f64(os, standardizer.mean);
    io::write_f64(os, standardizer.std_dev);
    for (const auto* tensor : {&model.w0.a, &model.b0, &model.w1.a, &model.b1})
        for (double v : *tensor)
            io::write_f64(os, v);
    if (!os)
        throw std::runtime_error("save_model: write failed: " + path);
}

inline std::pair<MlpModel, Standardizer> load_model(const std::string& path) {
    auto is = io::open_in(path);
    io::expect_magic(is, kModelMagic, "load_model");
    if (io::read_u32(is) != 1)
        throw std::runtime_error("load_model: unsupported checkpoint version");
    const std::uint32_t n0 = io::read_u32(is);
    const std::uint32_t n1 = io::read_u32(is);
    const std::uint32_t n2 = io::read_u32(is);
    if (n2 != 2)
        throw std::runtime_error("load_model: unexpected output dimension");
    MlpModel model;
    model.selu_lambda = io::read_f64(is);
    model.selu_alpha = io::read_f64(is);
    Standardizer st;
    st.mean = io::read_f64(is);
    st.std_dev = io::read_f64(is);
    model.w0 = Matrix(n1, n0);
    model.b0.assign(n1, 0.0);
    model.w1 = Matrix(2, n1);
    model.b1.assign(2, 0.0);
    for (auto* tensor : {&model.w0.a, &model.b0, &model.w1.a, &model.b1})
        for (double& v : *tensor)
            v = io::read_f64(is);
    return {std::move(model), st};
}

/// Epoch curves as CSV.
inline void write_train_report_csv(const TrainReport& report, std::ostream& os) {
    os << "epoch,train_rmse_cm,val_rmse_cm,train_objective\n";
    for (std::size_t e = 0; e < report.val_rmse_cm.size(); ++e)
        os << (e + 1) << ',' << fmt_double(report.train_rmse_cm[e]) << ','
           << fmt_double(report.val_rmse_cm[e]) << ',' << fmt_double(report.train_objective[e])
           << '\n';
}

} // namespace ocirloc
