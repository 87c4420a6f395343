#include <doctest.h>

#include "devoc/error.hpp"
#include "devoc/nn.hpp"
#include "devoc/random.hpp"

#include <cmath>
#include <cstring>
#include <filesystem>

using namespace devoc;
using Net = Mlp<double>;

namespace {

Errc code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no devoc::Error thrown");
    return Errc::IoFailure;
}

Dataset<double> random_batch(int n, int n_in, int n_out, std::uint64_t seed) {
    SplitMix64 rng(seed);
    Dataset<double> d;
    d.inputs.resize(n, n_in);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n_in; ++j) d.inputs(i, j) = rng.uniform();
        d.labels.push_back(rng.uniform_int(0, n_out - 1));
    }
    return d;
}

// Padded XOR: the first two of 32 inputs carry the bits.
Dataset<double> xor_data() {
    Dataset<double> d;
    d.inputs = Net::Matrix::Zero(4, 32);
    const int bits[4][2] = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
    for (int i = 0; i < 4; ++i) {
        d.inputs(i, 0) = bits[i][0];
        d.inputs(i, 1) = bits[i][1];
        d.labels.push_back(bits[i][0] ^ bits[i][1]);
    }
    return d;
}

bool bit_equal(const Net& a, const Net& b) {
    const auto fa = flatten(a), fb = flatten(b);
    return fa.size() == fb.size() && std::memcmp(fa.data(), fb.data(), sizeof(double) * fa.size()) == 0;
}

double max_rel_error(const Net& net, const Dataset<double>& data) {
    const auto analytic = loss_and_gradient(net, data).grad;
    Net probe = net;
    auto theta = flatten(net);
    double worst = 0;
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        const double h = 1e-5;
        const double keep = theta(i);
        theta(i) = keep + h;
        unflatten(probe, theta);
        const double up = loss_and_gradient(probe, data).loss;
        theta(i) = keep - h;
        unflatten(probe, theta);
        const double down = loss_and_gradient(probe, data).loss;
        theta(i) = keep;
        const double numeric = (up - down) / (2 * h);
        const double denom = std::max({std::abs(numeric), std::abs(analytic(i)), 1e-7});
        worst = std::max(worst, std::abs(numeric - analytic(i)) / denom);
    }
    return worst;
}

} // namespace

TEST_CASE("init") {
    const Net a = init_mlp(40, 5, 7);
    const Net b = init_mlp(40, 5, 7);
    CHECK(bit_equal(a, b));
    CHECK_FALSE(bit_equal(a, init_mlp(40, 5, 8)));
    CHECK(a.n_in() == 32);
    CHECK(a.n_hidden() == 40);
    CHECK(a.n_out() == 5);
    CHECK(a.parameter_count() == 40 * 32 + 40 + 5 * 40 + 5);
    const double r1 = std::sqrt(6.0 / (32 + 40));
    const double r2 = std::sqrt(6.0 / (40 + 5));
    CHECK(a.w1.cwiseAbs().maxCoeff() <= r1);
    CHECK(a.w2.cwiseAbs().maxCoeff() <= r2);
    CHECK(a.b1.isZero());
    CHECK(a.b2.isZero());
    CHECK(code_of([] { init_mlp(40, 1, 1); }) == Errc::BadDimensions);
    CHECK(code_of([] { init_mlp(0, 3, 1); }) == Errc::BadDimensions);
}

TEST_CASE("forward") {
    Net zero = make_mlp(32, 40, 4);
    Net::Vector x = Net::Vector::Constant(32, 0.3);
    const auto p = forward(zero, x);
    for (Eigen::Index i = 0; i < 4; ++i) CHECK(p(i) == doctest::Approx(0.25));

    const Net net = init_mlp(40, 5, 3);
    SplitMix64 rng(11);
    for (int t = 0; t < 50; ++t) {
        for (Eigen::Index i = 0; i < 32; ++i) x(i) = 20 * rng.uniform() - 10;
        const auto q = forward(net, x);
        CHECK(std::abs(q.sum() - 1.0) <= 1e-9);
        CHECK(q.minCoeff() > 0);
        CHECK(q.maxCoeff() < 1);
    }

    // Equal output rows: uniform regardless of the hidden activations.
    Net tiny = make_mlp(2, 2, 2);
    tiny.w1 << 1.5, -2, 0.25, 3;
    tiny.w2 << 0.7, -1.1, 0.7, -1.1;
    Net::Vector x2(2);
    x2 << 0.9, -0.4;
    const auto u = forward(tiny, x2);
    CHECK(u(0) == doctest::Approx(0.5));
    CHECK(u(1) == doctest::Approx(0.5));

    // Shift invariance of softmax.
    Net shifted = net;
    shifted.b2.array() += 3.75;
    for (Eigen::Index i = 0; i < 32; ++i) x(i) = rng.uniform();
    CHECK((forward(net, x) - forward(shifted, x)).cwiseAbs().maxCoeff() <= 1e-12);

    x(3) = std::nan("");
    CHECK(code_of([&] { forward(net, x); }) == Errc::NonFiniteInput);
    CHECK(code_of([&] { forward(net, Net::Vector::Zero(31)); }) == Errc::BadDimensions);
}

TEST_CASE("loss_and_gradient") {
    const Net net = init_mlp(40, 5, 21);
    const auto batch = random_batch(8, 32, 5, 4);

    SUBCASE("finite differences") { CHECK(max_rel_error(net, batch) < 1e-4); }

    SUBCASE("duplicated sample has the same mean gradient") {
        Dataset<double> one;
        one.inputs = batch.inputs.topRows(1);
        one.labels = {batch.labels[0]};
        Dataset<double> two;
        two.inputs.resize(2, 32);
        two.inputs.row(0) = one.inputs.row(0);
        two.inputs.row(1) = one.inputs.row(0);
        two.labels = {one.labels[0], one.labels[0]};
        const auto g1 = loss_and_gradient(net, one);
        const auto g2 = loss_and_gradient(net, two);
        CHECK(std::abs(g1.loss - g2.loss) <= 1e-14);
        CHECK((g1.grad - g2.grad).cwiseAbs().maxCoeff() <= 1e-14);
    }

    SUBCASE("balanced two-class batch with identical inputs") {
        const Net two = init_mlp(6, 2, 5);
        Dataset<double> d;
        d.inputs.resize(2, 32);
        d.inputs.row(0).setConstant(0.4);
        d.inputs.row(1).setConstant(0.4);
        d.labels = {0, 1};
        const auto g = loss_and_gradient(two, d).grad;
        const Eigen::Index nb2 = g.size() - 2;
        CHECK(std::abs(g(nb2) + g(nb2 + 1)) <= 1e-15);
        CHECK(max_rel_error(two, d) < 1e-4);
    }

    SUBCASE("errors") {
        Dataset<double> empty;
        empty.inputs.resize(0, 32);
        CHECK(code_of([&] { loss_and_gradient(net, empty); }) == Errc::EmptyBatch);
        auto bad = batch;
        bad.labels[2] = 5;
        CHECK(code_of([&] { loss_and_gradient(net, bad); }) == Errc::LabelOutOfRange);
        bad.labels[2] = -1;
        CHECK(code_of([&] { loss_and_gradient(net, bad); }) == Errc::LabelOutOfRange);
    }

    SUBCASE("float instantiation") {
        const Mlp<float> f = init_mlp<float>(8, 3, 2);
        Dataset<float> d;
        d.inputs = Mlp<float>::Matrix::Constant(3, 32, 0.5f);
        d.labels = {0, 1, 2};
        CHECK(std::isfinite(loss_and_gradient(f, d).loss));
    }
}

TEST_CASE("train_scg") {
    // Linearly separable: class = first input above 0.5.
    Dataset<double> toy;
    toy.inputs = Net::Matrix::Zero(4, 32);
    toy.inputs(0, 0) = 0.0;
    toy.inputs(1, 0) = 0.2;
    toy.inputs(2, 0) = 0.8;
    toy.inputs(3, 0) = 1.0;
    toy.labels = {0, 0, 1, 1};
    const Net start = init_mlp(40, 2, 3);
    TrainConfig cfg;
    cfg.max_epochs = 200;

    SUBCASE("solves the toy problem") {
        // The problem is solvable: plain momentum descent gets there too.
        TrainConfig gd = cfg;
        gd.trainer = Trainer::MomentumGd;
        gd.max_epochs = 3000;
        gd.learning_rate = 0.5;
        gd.momentum = 0.9;
        CHECK(train_momentum(start, toy, gd).report.final_loss < 0.01);

        const auto res = train_scg(start, toy, cfg);
        CHECK(res.report.final_loss < 0.01);
        CHECK(res.report.epochs_run <= 200);
        CHECK((res.report.stop_reason == StopReason::MinGradient || res.report.stop_reason == StopReason::Converged));
        const auto& hist = res.report.loss_history;
        for (std::size_t i = 1; i < hist.size(); ++i) CHECK(hist[i] <= hist[i - 1]);
        if (res.report.stop_reason == StopReason::MinGradient)
            CHECK(loss_and_gradient(res.net, toy).grad.norm() <= cfg.min_gradient);
        CHECK(res.report.final_loss == doctest::Approx(loss_and_gradient(res.net, toy).loss).epsilon(1e-12));
    }
    SUBCASE("zero epochs") {
        TrainConfig zero = cfg;
        zero.max_epochs = 0;
        const auto res = train_scg(start, toy, zero);
        CHECK(bit_equal(res.net, start));
        CHECK(res.report.stop_reason == StopReason::MaxEpochs);
        CHECK(res.report.epochs_run == 0);
    }
    SUBCASE("already at a flat point") {
        // All-equal balanced dataset with zero output weights: the gradient
        // vanishes identically.
        Net flat = make_mlp(32, 4, 2);
        Dataset<double> d;
        d.inputs = Net::Matrix::Zero(2, 32);
        d.labels = {0, 1};
        const auto res = train_scg(flat, d, cfg);
        CHECK(res.report.stop_reason == StopReason::MinGradient);
        CHECK(res.report.epochs_run == 0);
        CHECK(res.report.final_gradient_norm <= 1e-8);
    }
    SUBCASE("errors") {
        Dataset<double> empty;
        empty.inputs.resize(0, 32);
        CHECK(code_of([&] { train_scg(start, empty, cfg); }) == Errc::EmptyDataset);
        TrainConfig bad = cfg;
        bad.momentum = 1.0;
        CHECK(code_of([&] { train_scg(start, toy, bad); }) == Errc::BadConfig);
    }
    SUBCASE("deterministic") {
        const auto a = train_scg(start, toy, cfg);
        const auto b = train_scg(start, toy, cfg);
        CHECK(bit_equal(a.net, b.net));
        CHECK(a.report.loss_history == b.report.loss_history);
    }
}

TEST_CASE("train_momentum") {
    SUBCASE("one plain step") {
        const Net start = init_mlp(10, 3, 9);
        const auto data = random_batch(6, 32, 3, 1);
        TrainConfig cfg;
        cfg.trainer = Trainer::MomentumGd;
        cfg.momentum = 0;
        cfg.learning_rate = 0.01;
        cfg.max_epochs = 1;
        const auto g = loss_and_gradient(start, data).grad;
        const auto res = train_momentum(start, data, cfg);
        CHECK(res.report.epochs_run == 1);
        const auto expected = (flatten(start) - 0.01 * g).eval();
        CHECK((flatten(res.net) - expected).cwiseAbs().maxCoeff() <= 1e-15);
    }
    SUBCASE("two steps accumulate velocity") {
        const Net start = init_mlp(10, 3, 9);
        const auto data = random_batch(6, 32, 3, 1);
        TrainConfig cfg;
        cfg.max_epochs = 2;
        Net manual = start;
        auto theta = flatten(start);
        Net::Vector v = Net::Vector::Zero(theta.size());
        for (int k = 0; k < 2; ++k) {
            unflatten(manual, theta);
            v = 0.95 * v - 0.01 * loss_and_gradient(manual, data).grad;
            theta += v;
        }
        CHECK((flatten(train_momentum(start, data, cfg).net) - theta).cwiseAbs().maxCoeff() <= 1e-15);
    }
    SUBCASE("xor loss keeps falling") {
        const auto data = xor_data();
        const Net start = init_mlp(40, 2, 5);
        TrainConfig cfg;
        cfg.trainer = Trainer::MomentumGd;
        cfg.max_epochs = 500;
        const auto res = train_momentum(start, data, cfg);
        REQUIRE(res.report.loss_history.size() == 501);
        CHECK(res.report.loss_history[500] < res.report.loss_history[50]);
        const auto again = train_momentum(start, data, cfg);
        CHECK(again.report.loss_history == res.report.loss_history);
        CHECK(bit_equal(again.net, res.net));
    }
    SUBCASE("zero epochs") {
        const Net start = init_mlp(10, 3, 9);
        TrainConfig cfg;
        cfg.max_epochs = 0;
        const auto res = train_momentum(start, random_batch(4, 32, 3, 2), cfg);
        CHECK(bit_equal(res.net, start));
        CHECK(res.report.stop_reason == StopReason::MaxEpochs);
    }
}

TEST_CASE("train dispatch") {
    const Net start = init_mlp(10, 3, 9);
    const auto data = random_batch(6, 32, 3, 1);
    TrainConfig cfg;
    cfg.max_epochs = 5;
    CHECK(bit_equal(train(start, data, cfg).net, train_scg(start, data, cfg).net));
    cfg.trainer = Trainer::MomentumGd;
    CHECK(bit_equal(train(start, data, cfg).net, train_momentum(start, data, cfg).net));
}

TEST_CASE("model files") {
    const Net net = init_mlp(40, 3, 77);
    Net trained = net;
    trained.b1.setConstant(1.0 / 3.0);
    trained.b2(1) = -2.5e-300;
    const std::vector<std::string> labels{"ka", "kha", "ga"};
    const std::string text = serialize_model(trained, labels);
    CHECK(text.rfind("DEVOC-MLP v1\ndims 32 40 3\nlayout row-major W1 b1 W2 b2\nlabels ka,kha,ga\n", 0) == 0);

    const LabeledModel back = parse_model(text);
    CHECK(bit_equal(back.net, trained));
    CHECK(back.labels == labels);

    const auto path = std::filesystem::temp_directory_path() / "devoc_nn_test.mlp";
    save_model(path, trained, labels);
    CHECK(bit_equal(load_model(path).net, trained));
    std::filesystem::remove(path);

    CHECK(code_of([&] { parse_model(text.substr(0, text.size() / 2)); }) == Errc::MalformedModelFile);
    CHECK(code_of([&] { parse_model(text + "0.5\n"); }) == Errc::MalformedModelFile);
    CHECK(code_of([&] { parse_model("DEVOC-MLP v2\n" + text.substr(text.find('\n') + 1)); }) ==
          Errc::VersionMismatch);
    CHECK(code_of([&] { parse_model("NOT-A-MODEL\n"); }) == Errc::MalformedModelFile);
    std::string wrong_labels = text;
    wrong_labels.replace(wrong_labels.find("ka,kha,ga"), 9, "ka,kha");
    CHECK(code_of([&] { parse_model(wrong_labels); }) == Errc::MalformedModelFile);
    CHECK(code_of([&] { load_model("/nonexistent/devoc.mlp"); }) == Errc::IoFailure);
}
