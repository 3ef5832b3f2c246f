#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "gradcheck.hpp"
#include "rrmlab/errors.hpp"
#include "rrmlab/nn.hpp"

using namespace rrm;
using namespace rrm::nn;

TEST_CASE("forward pass") {
    const std::vector<int> dims{3, 4, 2};
    Mlp zero(dims);
    CHECK(zero.forward_one(Vector::Constant(3, 5.0)).isZero(0.0));
    CHECK(zero.parameter_count() == 3 * 4 + 4 + 4 * 2 + 2);

    Rng rng(3);
    const std::vector<int> lin_dims{3, 2};
    Mlp lin(lin_dims, rng);
    lin.layers()[0].bias << 0.5, -1.0;
    Vector x(3);
    x << 1.0, -2.0, 0.25;
    const Matrix& w = lin.layers()[0].weight;
    for (int r = 0; r < 2; ++r) {
        double expected = lin.layers()[0].bias[r];
        for (int c = 0; c < 3; ++c) expected += w(r, c) * x[c];
        CHECK(lin.forward_one(x)[r] == doctest::Approx(expected).epsilon(1e-15));
    }

    // rectifier: a hidden unit with negative preactivation forwards 0
    const std::vector<int> relu_dims{1, 1, 1};
    Mlp relu(relu_dims);
    relu.layers()[0].weight(0, 0) = 1.0;
    relu.layers()[1].weight(0, 0) = 1.0;
    CHECK(relu.forward_one(Vector::Constant(1, -3.0))[0] == 0.0);
    CHECK(relu.forward_one(Vector::Constant(1, 3.0))[0] == 3.0);

    CHECK_THROWS_AS(lin.forward_one(Vector::Zero(4)), ContractViolation);
    const std::vector<int> bad{3};
    CHECK_THROWS_AS(Mlp{std::span<const int>(bad)}, ContractViolation);
}

TEST_CASE("glorot init stays within bounds and is seeded") {
    const std::vector<int> dims{10, 30, 5};
    Rng a(9), b(9);
    Mlp na(dims, a), nb(dims, b);
    CHECK(na.layers()[0].weight == nb.layers()[0].weight);
    CHECK(na.layers()[0].weight.cwiseAbs().maxCoeff() <= std::sqrt(6.0 / 40.0));
    CHECK(na.layers()[1].weight.cwiseAbs().maxCoeff() <= std::sqrt(6.0 / 35.0));
    CHECK(na.layers()[0].bias.isZero(0.0));
}

TEST_CASE("backward pass") {
    // f(x) = w.x: df/dw = x
    const std::vector<int> dims{3, 1};
    Rng rng(2);
    Mlp net(dims, rng);
    Matrix x(3, 1);
    x << 0.3, -1.2, 2.0;
    MlpCache cache;
    net.forward(x, &cache);
    const MlpGrads g = net.backward(cache, Matrix::Ones(1, 1));
    CHECK(g[0].weight(0, 0) == doctest::Approx(0.3));
    CHECK(g[0].weight(0, 1) == doctest::Approx(-1.2));
    CHECK(g[0].weight(0, 2) == doctest::Approx(2.0));
    CHECK(g[0].bias[0] == 1.0);

    const std::vector<int> deep{4, 6, 3};
    Mlp d(deep, rng);
    MlpCache c2;
    d.forward(Matrix::Random(4, 5), &c2);
    for (const DenseLayer& l : d.backward(c2, Matrix::Zero(3, 5))) {
        CHECK(l.weight.isZero(0.0));
        CHECK(l.bias.isZero(0.0));
    }
    CHECK_THROWS_AS(d.backward(c2, Matrix::Zero(2, 5)), ContractViolation);
}

TEST_CASE("finite-difference gradient check on random small nets") {
    Rng rng = make_stream(2024, "gradcheck-unit");
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) worst = std::max(worst, testing::random_gradcheck(rng).max_rel_error);
    CHECK(worst < 1e-5);
}

TEST_CASE("adam") {
    const std::vector<int> dims{2, 2};
    Mlp net(dims);
    AdamConfig cfg;
    cfg.lr = 1e-3;
    Adam opt(net, cfg);
    MlpGrads ones = zero_grads(net);
    ones[0].weight.setOnes();
    ones[0].bias.setOnes();
    opt.step(net, ones);
    const double expected = -1e-3 * 1.0 / (1.0 + cfg.eps);
    CHECK(net.layers()[0].weight(0, 0) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(net.layers()[0].bias(1) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(opt.steps() == 1);

    Rng rng(1);
    Mlp still(dims, rng);
    const Matrix before = still.layers()[0].weight;
    Adam idle(still, cfg);
    for (int i = 0; i < 10; ++i) idle.step(still, zero_grads(still));
    CHECK(still.layers()[0].weight == before);

    auto run = [&] {
        Rng r(5);
        Mlp m(std::vector<int>{3, 4, 1}, r);
        Adam o(m, AdamConfig{});
        for (int i = 0; i < 20; ++i) {
            MlpCache c;
            const Matrix out = m.forward(Matrix::Constant(3, 2, 0.5), &c);
            o.step(m, m.backward(c, out));
        }
        return m.layers()[1].weight;
    };
    CHECK(run() == run());

    double p = 0.0;
    ScalarAdam sa(cfg);
    sa.step(p, 1.0);
    CHECK(p == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("softmax and logsumexp") {
    const std::vector<double> zeros{0.0, 0.0};
    CHECK(logsumexp(zeros) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    const std::vector<double> big{1000.0, 1000.0, -5.0};
    CHECK(std::isfinite(logsumexp(big)));
    CHECK(logsumexp(big) >= 1000.0);

    Rng rng(8);
    std::normal_distribution<double> n(0.0, 20.0);
    for (int t = 0; t < 100; ++t) {
        Vector x(7);
        for (int i = 0; i < 7; ++i) x[i] = n(rng);
        const Vector p = softmax(x);
        CHECK(std::abs(p.sum() - 1.0) < 1e-12);
        const Vector q = softmax((x.array() + 123.0).matrix());
        CHECK((p - q).cwiseAbs().maxCoeff() < 1e-12);
        std::vector<double> xs(x.data(), x.data() + 7);
        CHECK(logsumexp(xs) >= x.maxCoeff());
    }
    Matrix logits(3, 2);
    logits << 1, 4, 2, 4, 3, 0;
    const Matrix pc = softmax_columns(logits);
    CHECK((pc.col(0) - softmax(logits.col(0))).norm() < 1e-15);
    CHECK(logsumexp_columns(logits)[1] == doctest::Approx(std::log(2 * std::exp(4.0) + 1.0)));

    Vector tie(3);
    tie << 2.0, 5.0, 5.0;
    CHECK(argmax(tie) == 1);
}

TEST_CASE("soft update") {
    const std::vector<int> dims{2, 2};
    Mlp target(dims), source(dims);
    source.layers()[0].weight.setConstant(10.0);
    soft_update(target, source, 0.1);
    CHECK(target.layers()[0].weight(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("checkpoint round trip and corruption") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "rrmlab_nn_test";
    fs::create_directories(dir);
    Rng rng(12);
    Checkpoint ck;
    ck.meta = R"({"kind":"logits"})";
    ck.nets.emplace_back(std::vector<int>{4, 5, 3}, rng);
    ck.nets.emplace_back(std::vector<int>{4, 2}, rng);
    const std::string path = (dir / "a.rrmn").string();
    save_checkpoint(path, ck);
    const Checkpoint back = load_checkpoint(path);
    CHECK(back.meta == ck.meta);
    REQUIRE(back.nets.size() == 2);
    CHECK(back.nets[0].layers()[1].weight == ck.nets[0].layers()[1].weight);
    CHECK(back.nets[1].dims() == std::vector<int>{4, 2});

    const auto size = fs::file_size(path);
    fs::resize_file(path, size - 7);
    CHECK_THROWS_AS(load_checkpoint(path), FormatError);
    {
        std::ofstream os(path, std::ios::binary);
        os << "NOPE";
    }
    CHECK_THROWS_AS(load_checkpoint(path), FormatError);
    CHECK_THROWS_AS(load_checkpoint((dir / "missing.rrmn").string()), FormatError);
    fs::remove_all(dir);
}
