#pragma once

// Single-hidden-layer perceptron (sigmoid hidden units, softmax outputs)
// with exact backpropagation and two full-batch trainers: scaled conjugate
// gradient and gradient descent with classical momentum.

#include "devoc/error.hpp"
#include "devoc/features.hpp"
#include "devoc/random.hpp"

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace devoc {

template <typename Scalar = double>
struct Mlp {
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    Matrix w1;  // n_hidden x n_in
    Vector b1;
    Matrix w2;  // n_out x n_hidden
    Vector b2;

    Eigen::Index n_in() const { return w1.cols(); }
    Eigen::Index n_hidden() const { return w1.rows(); }
    Eigen::Index n_out() const { return w2.rows(); }
    Eigen::Index parameter_count() const { return w1.size() + b1.size() + w2.size() + b2.size(); }
};

template <typename Scalar>
struct Dataset {
    typename Mlp<Scalar>::Matrix inputs;  // one sample per row
    std::vector<int> labels;

    Eigen::Index size() const { return inputs.rows(); }
};

enum class Trainer { Scg, MomentumGd };
enum class StopReason { MinGradient, MaxEpochs, Converged };

const char* to_string(Trainer t);
const char* to_string(StopReason r);

struct TrainConfig {
    int n_hidden = 40;
    double learning_rate = 0.01;
    double momentum = 0.95;
    double min_gradient = 1e-8;
    int max_epochs = 500;
    Trainer trainer = Trainer::Scg;
    std::uint64_t seed = 1;

    void validate() const {
        if (!(learning_rate > 0)) throw Error(Errc::BadConfig, "learning_rate must be > 0");
        if (!(momentum >= 0 && momentum < 1)) throw Error(Errc::BadConfig, "momentum must be in [0, 1)");
        if (!(min_gradient > 0)) throw Error(Errc::BadConfig, "min_gradient must be > 0");
        if (max_epochs < 0) throw Error(Errc::BadConfig, "max_epochs must be >= 0");
        if (n_hidden < 1) throw Error(Errc::BadConfig, "n_hidden must be >= 1");
    }
};

template <typename Scalar>
struct TrainReport {
    int epochs_run = 0;
    Scalar final_loss = 0;
    Scalar final_gradient_norm = 0;
    StopReason stop_reason = StopReason::MaxEpochs;
    /// Loss at the start and after every accepted step.
    std::vector<Scalar> loss_history;
};

template <typename Scalar>
struct TrainResult {
    Mlp<Scalar> net;
    TrainReport<Scalar> report;
};

// ---- construction ----------------------------------------------------------

template <typename Scalar = double>
Mlp<Scalar> make_mlp(int n_in, int n_hidden, int n_out) {
    if (n_in < 1 || n_hidden < 1 || n_out < 2)
        throw Error(Errc::BadDimensions, "mlp needs n_in >= 1, n_hidden >= 1, n_out >= 2");
    Mlp<Scalar> net;
    net.w1 = Mlp<Scalar>::Matrix::Zero(n_hidden, n_in);
    net.b1 = Mlp<Scalar>::Vector::Zero(n_hidden);
    net.w2 = Mlp<Scalar>::Matrix::Zero(n_out, n_hidden);
    net.b2 = Mlp<Scalar>::Vector::Zero(n_out);
    return net;
}

/// Uniform fan-based weights in [-r, r], r = sqrt(6 / (fan_in + fan_out));
/// biases zero.
template <typename Scalar = double>
Mlp<Scalar> init_mlp(int n_hidden, int n_out, std::uint64_t seed, int n_in = kFeatureCount) {
    Mlp<Scalar> net = make_mlp<Scalar>(n_in, n_hidden, n_out);
    SplitMix64 rng(seed);
    auto fill = [&rng](auto& w) {
        const double r = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
        for (Eigen::Index i = 0; i < w.rows(); ++i)
            for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = static_cast<Scalar>((2.0 * rng.uniform() - 1.0) * r);
    };
    fill(net.w1);
    fill(net.w2);
    return net;
}

// ---- parameter vector --------------------------------------------------------

/// Order: W1 (row-major), b1, W2 (row-major), b2.
template <typename Scalar>
typename Mlp<Scalar>::Vector flatten(const Mlp<Scalar>& net) {
    typename Mlp<Scalar>::Vector theta(net.parameter_count());
    Eigen::Index o = 0;
    auto put = [&](const auto& m) {
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j) theta(o++) = m(i, j);
    };
    put(net.w1);
    put(net.b1);
    put(net.w2);
    put(net.b2);
    return theta;
}

template <typename Scalar>
void unflatten(Mlp<Scalar>& net, const typename Mlp<Scalar>::Vector& theta) {
    if (theta.size() != net.parameter_count())
        throw Error(Errc::BadDimensions, "parameter vector has the wrong length");
    Eigen::Index o = 0;
    auto take = [&](auto& m) {
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = theta(o++);
    };
    take(net.w1);
    take(net.b1);
    take(net.w2);
    take(net.b2);
}

// ---- evaluation -------------------------------------------------------------

namespace detail {

template <typename Derived>
auto logistic(const Eigen::MatrixBase<Derived>& z) {
    using S = typename Derived::Scalar;
    return z.unaryExpr([](S v) { return S(1) / (S(1) + std::exp(-v)); });
}

/// Row-wise softmax in place; returns per-row log-sum-exp.
template <typename Scalar>
typename Mlp<Scalar>::Vector softmax_rows(typename Mlp<Scalar>::Matrix& z) {
    typename Mlp<Scalar>::Vector lse(z.rows());
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
        const Scalar m = z.row(i).maxCoeff();
        z.row(i) = (z.row(i).array() - m).exp().matrix();
        const Scalar sum = z.row(i).sum();
        z.row(i) /= sum;
        lse(i) = m + std::log(sum);
    }
    return lse;
}

} // namespace detail

template <typename Scalar>
typename Mlp<Scalar>::Vector forward(const Mlp<Scalar>& net,
                                     const Eigen::Ref<const typename Mlp<Scalar>::Vector>& x) {
    if (x.size() != net.n_in()) throw Error(Errc::BadDimensions, "forward: input has the wrong length");
    if (!x.allFinite()) throw Error(Errc::NonFiniteInput, "forward: non-finite input");
    const typename Mlp<Scalar>::Vector h = detail::logistic(net.w1 * x + net.b1);
    typename Mlp<Scalar>::Matrix z = (net.w2 * h + net.b2).transpose();
    detail::softmax_rows<Scalar>(z);
    return z.transpose();
}

template <typename Scalar>
struct LossGradient {
    Scalar loss;
    typename Mlp<Scalar>::Vector grad;
};

template <typename Scalar>
void check_dataset(const Mlp<Scalar>& net, const Dataset<Scalar>& data) {
    if (data.size() == 0) throw Error(Errc::EmptyBatch, "empty batch");
    if (static_cast<Eigen::Index>(data.labels.size()) != data.size() || data.inputs.cols() != net.n_in())
        throw Error(Errc::BadDimensions, "dataset shape does not match the network");
    for (int y : data.labels)
        if (y < 0 || y >= net.n_out()) throw Error(Errc::LabelOutOfRange, "label outside [0, n_out)");
}

/// Mean cross-entropy and its exact gradient, flattened like flatten().
template <typename Scalar>
LossGradient<Scalar> loss_and_gradient(const Mlp<Scalar>& net, const Dataset<Scalar>& data) {
    using Matrix = typename Mlp<Scalar>::Matrix;
    check_dataset(net, data);
    const Eigen::Index n = data.size();

    Matrix pre = data.inputs * net.w1.transpose();
    pre.rowwise() += net.b1.transpose();
    const Matrix h = detail::logistic(pre);
    Matrix p = h * net.w2.transpose();
    p.rowwise() += net.b2.transpose();
    const Matrix z = p;
    const auto lse = detail::softmax_rows<Scalar>(p);

    Scalar loss = 0;
    for (Eigen::Index i = 0; i < n; ++i) loss += lse(i) - z(i, data.labels[i]);
    loss /= static_cast<Scalar>(n);

    Matrix dz = p;
    for (Eigen::Index i = 0; i < n; ++i) dz(i, data.labels[i]) -= Scalar(1);
    dz /= static_cast<Scalar>(n);

    const Matrix dh = ((dz * net.w2).array() * h.array() * (Scalar(1) - h.array())).matrix();

    Mlp<Scalar> g;
    g.w1 = dh.transpose() * data.inputs;
    g.b1 = dh.colwise().sum().transpose();
    g.w2 = dz.transpose() * h;
    g.b2 = dz.colwise().sum().transpose();
    return {loss, flatten(g)};
}

// ---- trainers -----------------------------------------------------------------

namespace detail {

template <typename Scalar>
struct Objective {
    Mlp<Scalar> shape;
    const Dataset<Scalar>& data;

    LossGradient<Scalar> operator()(const typename Mlp<Scalar>::Vector& theta) {
        unflatten(shape, theta);
        return loss_and_gradient(shape, data);
    }
};

inline constexpr double kConvergedDelta = 1e-12;
inline constexpr int kConvergedRun = 5;

} // namespace detail

/// Moller's scaled conjugate gradient, full batch. One epoch = one SCG
/// iteration (successful or not).
template <typename Scalar>
TrainResult<Scalar> train_scg(const Mlp<Scalar>& start, const Dataset<Scalar>& data, const TrainConfig& cfg) {
    using Vector = typename Mlp<Scalar>::Vector;
    cfg.validate();
    if (data.size() == 0) throw Error(Errc::EmptyDataset, "train_scg: empty dataset");
    check_dataset(start, data);

    detail::Objective<Scalar> objective{start, data};
    Vector w = flatten(start);
    auto [loss, grad] = objective(w);

    TrainReport<Scalar> report;
    report.loss_history.push_back(loss);

    const Scalar sigma0 = Scalar(5e-5);
    Scalar lambda = Scalar(5e-7);
    Scalar lambda_bar = 0;
    bool success = true;
    int small_changes = 0;
    const Eigen::Index restart = w.size();

    Vector r = -grad;
    Vector p = r;
    Vector s(w.size());
    Scalar delta = 0;

    while (true) {
        if (grad.norm() <= cfg.min_gradient) {
            report.stop_reason = StopReason::MinGradient;
            break;
        }
        if (report.epochs_run >= cfg.max_epochs) {
            report.stop_reason = StopReason::MaxEpochs;
            break;
        }
        if (small_changes >= detail::kConvergedRun || lambda > Scalar(1e100)) {
            report.stop_reason = StopReason::Converged;
            break;
        }
        ++report.epochs_run;

        if (p.dot(r) <= 0) {
            p = r;
            success = true;
        }
        const Scalar p2 = p.squaredNorm();
        if (success) {
            const Scalar sigma = sigma0 / std::sqrt(p2);
            const Vector probe = w + sigma * p;
            s = (objective(probe).grad - grad) / sigma;
            delta = p.dot(s);
        }
        delta += (lambda - lambda_bar) * p2;
        if (delta <= 0) {
            lambda_bar = Scalar(2) * (lambda - delta / p2);
            delta = -delta + lambda * p2;
            lambda = lambda_bar;
        }

        const Scalar mu = p.dot(r);
        const Scalar alpha = mu / delta;
        const Vector w_new = w + alpha * p;
        auto trial = objective(w_new);
        const Scalar comparison = Scalar(2) * delta * (loss - trial.loss) / (mu * mu);

        if (std::isfinite(trial.loss) && comparison >= 0) {
            const Scalar previous = loss;
            w = w_new;
            loss = trial.loss;
            grad = std::move(trial.grad);
            const Vector r_old = r;
            r = -grad;
            lambda_bar = 0;
            success = true;
            report.loss_history.push_back(loss);
            small_changes = std::abs(previous - loss) < detail::kConvergedDelta ? small_changes + 1 : 0;

            if (report.epochs_run % restart == 0) {
                p = r;
            } else {
                const Scalar beta = (r.squaredNorm() - r.dot(r_old)) / mu;
                p = r + beta * p;
            }
            if (comparison >= Scalar(0.75)) lambda *= Scalar(0.25);
        } else {
            lambda_bar = lambda;
            success = false;
        }
        if (comparison < Scalar(0.25) || !std::isfinite(comparison))
            lambda += delta * (Scalar(1) - (std::isfinite(comparison) ? comparison : Scalar(0))) / p2;
    }

    TrainResult<Scalar> out{start, std::move(report)};
    unflatten(out.net, w);
    out.report.final_loss = loss;
    out.report.final_gradient_norm = grad.norm();
    return out;
}

/// Full-batch gradient descent: v <- momentum * v - lr * grad; theta <- theta + v.
template <typename Scalar>
TrainResult<Scalar> train_momentum(const Mlp<Scalar>& start, const Dataset<Scalar>& data, const TrainConfig& cfg) {
    using Vector = typename Mlp<Scalar>::Vector;
    cfg.validate();
    if (data.size() == 0) throw Error(Errc::EmptyDataset, "train_momentum: empty dataset");
    check_dataset(start, data);

    detail::Objective<Scalar> objective{start, data};
    Vector theta = flatten(start);
    auto [loss, grad] = objective(theta);
    Vector velocity = Vector::Zero(theta.size());

    TrainReport<Scalar> report;
    report.loss_history.push_back(loss);
    int small_changes = 0;
    const auto lr = static_cast<Scalar>(cfg.learning_rate);
    const auto momentum = static_cast<Scalar>(cfg.momentum);

    while (true) {
        if (grad.norm() <= cfg.min_gradient) {
            report.stop_reason = StopReason::MinGradient;
            break;
        }
        if (report.epochs_run >= cfg.max_epochs) {
            report.stop_reason = StopReason::MaxEpochs;
            break;
        }
        if (small_changes >= detail::kConvergedRun) {
            report.stop_reason = StopReason::Converged;
            break;
        }
        ++report.epochs_run;
        velocity = momentum * velocity - lr * grad;
        theta += velocity;
        const Scalar previous = loss;
        auto next = objective(theta);
        loss = next.loss;
        grad = std::move(next.grad);
        report.loss_history.push_back(loss);
        small_changes = std::abs(previous - loss) < detail::kConvergedDelta ? small_changes + 1 : 0;
    }

    TrainResult<Scalar> out{start, std::move(report)};
    unflatten(out.net, theta);
    out.report.final_loss = loss;
    out.report.final_gradient_norm = grad.norm();
    return out;
}

template <typename Scalar>
TrainResult<Scalar> train(const Mlp<Scalar>& start, const Dataset<Scalar>& data, const TrainConfig& cfg) {
    return cfg.trainer == Trainer::Scg ? train_scg(start, data, cfg) : train_momentum(start, data, cfg);
}

// ---- model files ----------------------------------------------------------------

struct LabeledModel {
    Mlp<double> net;
    std::vector<std::string> labels;
};

inline constexpr std::string_view kModelMagic = "DEVOC-MLP";
inline constexpr int kModelVersion = 1;

std::string serialize_model(const Mlp<double>& net, const std::vector<std::string>& labels);
LabeledModel parse_model(std::string_view text);
void save_model(const std::filesystem::path& path, const Mlp<double>& net, const std::vector<std::string>& labels);
LabeledModel load_model(const std::filesystem::path& path);

} // namespace devoc
