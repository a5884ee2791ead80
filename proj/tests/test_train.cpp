#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "support.hpp"

using namespace hsn;
using namespace hsn::testing;

namespace {

/// Two well separated Gaussian blobs in 4 dimensions.
struct Blobs {
    Graph graph;
    Matrix x;
    std::vector<int> labels;
    SplitMasks masks;
};

Blobs make_blobs(std::size_t n, double gap, std::mt19937_64& rng) {
    Blobs b;
    b.graph = fixtures::cycle(n);
    b.x = random_matrix(n, 4, rng, 0.3);
    b.labels.resize(n);
    for (std::size_t v = 0; v < n; ++v) {
        b.labels[v] = static_cast<int>(v % 2);
        b.x(v, 0) += b.labels[v] ? gap : -gap;
        if (v % 5 == 3) b.masks.val.push_back(v);
        else if (v % 5 == 4) b.masks.test.push_back(v);
        else b.masks.train.push_back(v);
    }
    return b;
}

}  // namespace

TEST(Gradients, EveryOpMatchesFiniteDifferences) {
    const auto suite = gradient_suite(20, 0);
    EXPECT_GE(suite.size(), 30u);
    for (const auto& c : suite) {
        EXPECT_EQ(c.instances, 20u) << c.op;
        EXPECT_LT(c.max_error, 1e-5) << c.op;
    }
}

TEST(Gradients, SquaredNormOfProduct) {
    std::mt19937_64 rng(1);
    const Matrix x = random_matrix(6, 3, rng);
    ParamTensor theta("theta", random_matrix(3, 2, rng));
    Tape t;
    t.backward(ad::squared_norm(ad::matmul(t.constant(x), t.param(theta))));
    const Matrix expect = matmul(matmul_tn(x, x), theta.value()) * 2.0;
    EXPECT_LT(max_abs_diff(theta.grad(), expect), 1e-12);
}

TEST(Gradients, WaveletBackwardIsDenseTranspose) {
    std::mt19937_64 rng(2);
    const Graph g = random_weighted_graph(9, 0.3, rng);
    const WaveletBank bank(g, 3);
    const Matrix p = dense_lazy_walk(g);
    for (std::size_t k = 0; k <= 3; ++k) {
        ParamTensor x("x", random_matrix(9, 2, rng));
        const Matrix w = random_matrix(9, 2, rng);
        Tape t;
        t.backward(ad::weighted_sum(ad::wavelet(bank, k, t.param(x)), w));
        const Matrix psi = k == 0 ? Matrix::identity(9) - p
                                  : dense_power(p, std::size_t{1} << (k - 1)) - dense_power(p, std::size_t{1} << k);
        EXPECT_LT(max_abs_diff(x.grad(), matmul(psi.transpose(), w)), 1e-12) << "k=" << k;
    }
}

TEST(Gradients, SoftmaxIsShiftInvariant) {
    std::mt19937_64 rng(3);
    const Matrix z = random_matrix(5, 4, rng);
    Matrix shifted = z;
    for (std::size_t r = 0; r < 5; ++r)
        for (std::size_t c = 0; c < 4; ++c) shifted(r, c) += 10.0 * static_cast<double>(r);
    Tape t;
    EXPECT_LT(max_abs_diff(ad::row_softmax(t.constant(z)).value(), ad::row_softmax(t.constant(shifted)).value()), 1e-14);
}

TEST(CrossEntropy, ConfidentAndUniformLogits) {
    Tape t;
    const std::vector<int> labels{0, 2, 1};
    const std::vector<Node> mask{0, 1, 2};
    Matrix z(3, 3);
    for (std::size_t v = 0; v < 3; ++v) z(v, labels[v]) = 100.0;
    EXPECT_LT(ad::masked_cross_entropy(t.constant(z), labels, mask).value()(0, 0), 1e-12);
    EXPECT_NEAR(ad::masked_cross_entropy(t.constant(Matrix(3, 3)), labels, mask).value()(0, 0), std::log(3.0), 1e-15);
}

TEST(CrossEntropy, Errors) {
    Tape t;
    const std::vector<int> labels{0, 1};
    const std::vector<Node> none;
    const std::vector<Node> all{0, 1};
    EXPECT_THROW(ad::masked_cross_entropy(t.constant(Matrix(2, 2)), labels, none), EmptyMask);
    Matrix bad(2, 2);
    bad(0, 0) = std::nan("");
    EXPECT_THROW(ad::masked_cross_entropy(t.constant(bad), labels, all), NonFiniteLoss);
    const std::vector<int> out_of_range{0, 5};
    EXPECT_THROW(ad::masked_cross_entropy(t.constant(Matrix(2, 2)), out_of_range, all), BadClassIds);
}

TEST(TapeRules, BackwardOnlyOnceAndOnlyFromScalar) {
    ParamTensor p("p", Matrix(2, 2, 1.0));
    Tape t;
    Var x = t.param(p);
    EXPECT_THROW(t.backward(x), DimensionMismatch);
    Var s = ad::sum({x});
    Var l = ad::squared_norm(s);
    t.backward(l);
    EXPECT_THROW(t.backward(l), TapeConsumed);
}

TEST(Accuracy, TiesGoToLowestClass) {
    const std::vector<int> labels{0, 1, 2, 0, 1};
    const std::vector<Node> mask{0, 1, 2, 3, 4};
    EXPECT_EQ(argmax_rows(Matrix(5, 3)), std::vector<int>(5, 0));
    EXPECT_DOUBLE_EQ(accuracy(Matrix(5, 3), labels, mask), 0.4);
    EXPECT_EQ(argmax_rows(Matrix{{0.0, 2.0, 2.0}}), std::vector<int>{1});
    EXPECT_THROW(accuracy(Matrix(5, 3), labels, std::vector<Node>{}), EmptyMask);
}

TEST(Accuracy, UntrainedModelIsNearChance) {
    std::mt19937_64 rng(4);
    const Graph g = fixtures::erdos_renyi_connected(500, 0.02, rng);
    const Matrix x = random_matrix(500, 8, rng);
    std::uniform_int_distribution<int> cls(0, 4);
    std::vector<int> labels(500);
    for (int& y : labels) y = cls(rng);
    std::vector<Node> all(500);
    std::iota(all.begin(), all.end(), Node{0});
    GcnModel model(8, 16, 5, rng);
    EXPECT_NEAR(evaluate(model, g, x, labels, all), 0.2, 0.1);
}

TEST(SplitMasksRules, Validation) {
    EXPECT_NO_THROW((SplitMasks{{0, 1}, {2}, {3}}.validate(4)));
    EXPECT_NO_THROW((SplitMasks{{0}, {}, {1}}.validate(2)));
    EXPECT_THROW((SplitMasks{{}, {2}, {3}}.validate(4)), EmptyMask);
    EXPECT_THROW((SplitMasks{{0}, {2}, {}}.validate(4)), EmptyMask);
    EXPECT_THROW((SplitMasks{{0, 1}, {1}, {3}}.validate(4)), InvalidArgument);
    EXPECT_THROW((SplitMasks{{0}, {2}, {4}}.validate(4)), InvalidArgument);
}

TEST(TrainConfigRules, Validation) {
    TrainConfig c;
    EXPECT_NO_THROW(c.validate());
    c.learning_rate = -1;
    EXPECT_THROW(c.validate(), InvalidArgument);
    c = {};
    c.patience = 0;
    EXPECT_THROW(c.validate(), InvalidArgument);
    c = {};
    c.beta2 = 1.0;
    EXPECT_THROW(c.validate(), InvalidArgument);
    EXPECT_EQ(parse_optimizer("sgd"), TrainConfig::Optimizer::SGD);
    EXPECT_EQ(parse_optimizer("adam"), TrainConfig::Optimizer::Adam);
    EXPECT_THROW(parse_optimizer("rmsprop"), ParseError);
}

TEST(OptimizerStep, WeightDecayReachesEveryParameter) {
    TrainConfig cfg;
    ParamTensor w("w", Matrix(1, 1, 1.0)), b("b", Matrix(1, 1, -2.0));
    Optimizer opt(cfg, {&w, &b});
    opt.zero_grad();
    opt.step();
    // First Adam step moves each entry by lr * g / (|g| + eps) with g = wd * w.
    const double gw = 5e-4 * 1.0, gb = 5e-4 * -2.0;
    EXPECT_NEAR(w.value()(0, 0), 1.0 - 1e-2 * gw / (std::abs(gw) + 1e-8), 1e-12);
    EXPECT_NEAR(b.value()(0, 0), -2.0 - 1e-2 * gb / (std::abs(gb) + 1e-8), 1e-12);
}

TEST(OptimizerStep, SgdFollowsGradient) {
    TrainConfig cfg;
    cfg.optimizer = TrainConfig::Optimizer::SGD;
    cfg.learning_rate = 0.5;
    cfg.weight_decay = 0.0;
    ParamTensor w("w", Matrix{{1.0, 2.0}});
    Optimizer opt(cfg, {&w});
    opt.zero_grad();
    w.grad() = Matrix{{0.2, -0.4}};
    opt.step();
    EXPECT_NEAR(w.value()(0, 0), 0.9, 1e-15);
    EXPECT_NEAR(w.value()(0, 1), 2.2, 1e-15);
}

TEST(Fit, SeparableDataReachesPerfectTrainingAccuracy) {
    std::mt19937_64 rng(5);
    const Blobs b = make_blobs(60, 2.0, rng);
    LinearHead model(4, 2, rng);
    TrainConfig cfg;
    cfg.learning_rate = 0.1;
    fit(model, b.graph, b.x, b.labels, b.masks, cfg);
    EXPECT_DOUBLE_EQ(evaluate(model, b.graph, b.x, b.labels, b.masks.train), 1.0);
}

TEST(Fit, ZeroLearningRateLeavesParametersUnchanged) {
    std::mt19937_64 rng(6);
    const Blobs b = make_blobs(30, 1.0, rng);
    GcnModel model(4, 8, 2, rng);
    const auto before = model.snapshot();
    TrainConfig cfg;
    cfg.learning_rate = 0.0;
    cfg.max_epochs = 20;
    const auto r = fit(model, b.graph, b.x, b.labels, b.masks, cfg);
    EXPECT_EQ(model.snapshot(), before);
    for (const auto& m : r.history) EXPECT_EQ(m.train_loss, r.history.front().train_loss);
}

TEST(Fit, DeterministicForFixedSeed) {
    auto run = [] {
        std::mt19937_64 rng(7);
        const Blobs b = make_blobs(40, 0.5, rng);
        ModelConfig mc = ModelConfig::defaults(Preset::ScGcn);
        auto model = make_model(mc, 4, 2, rng);
        TrainConfig cfg;
        cfg.max_epochs = 15;
        const auto r = fit(*model, b.graph, b.x, b.labels, b.masks, cfg);
        std::ostringstream out;
        write_metrics_csv(out, r);
        return std::make_pair(out.str(), model->snapshot());
    };
    const auto a = run(), b = run();
    EXPECT_EQ(a.first, b.first);
    EXPECT_EQ(a.second, b.second);
}

TEST(Fit, ConvexHeadWithSmallStepsHasNonIncreasingLoss) {
    std::mt19937_64 rng(8);
    Blobs b = make_blobs(50, 0.3, rng);
    b.masks.val.clear();
    LinearHead model(4, 2, rng);
    TrainConfig cfg;
    cfg.optimizer = TrainConfig::Optimizer::SGD;
    cfg.learning_rate = 0.1;
    cfg.weight_decay = 0.0;
    cfg.max_epochs = 100;
    const auto r = fit(model, b.graph, b.x, b.labels, b.masks, cfg);
    ASSERT_EQ(r.history.size(), 100u);
    for (std::size_t e = 1; e < r.history.size(); ++e)
        EXPECT_LE(r.history[e].train_loss, r.history[e - 1].train_loss + 1e-15);
}

TEST(Fit, EarlyStoppingRestoresBestValidationParameters) {
    std::mt19937_64 rng(9);
    Blobs b = make_blobs(60, 2.0, rng);
    // Flipped validation labels: validation loss grows as training improves.
    for (Node v : b.masks.val) b.labels[v] = 1 - b.labels[v];
    LinearHead model(4, 2, rng);
    TrainConfig cfg;
    cfg.learning_rate = 0.05;
    cfg.patience = 10;
    const auto r = fit(model, b.graph, b.x, b.labels, b.masks, cfg);
    ASSERT_TRUE(r.stopped_early);
    EXPECT_EQ(r.history.size(), r.best_epoch + cfg.patience + 1);
    Tape t;
    const double val = ad::masked_cross_entropy(t.constant(model.predict(b.graph, b.x)), b.labels, b.masks.val)
                           .value()(0, 0);
    EXPECT_DOUBLE_EQ(val, r.history[r.best_epoch].val_loss);
    for (const auto& m : r.history) EXPECT_GE(m.val_loss, r.history[r.best_epoch].val_loss);
}

TEST(Fit, MetricsCsvHasOneRowPerEpoch) {
    std::mt19937_64 rng(10);
    const Blobs b = make_blobs(20, 1.0, rng);
    LinearHead model(4, 2, rng);
    TrainConfig cfg;
    cfg.max_epochs = 7;
    std::ostringstream out;
    write_metrics_csv(out, fit(model, b.graph, b.x, b.labels, b.masks, cfg));
    const std::string s = out.str();
    EXPECT_EQ(s.rfind("epoch,train_loss,train_acc,val_loss,val_acc\n", 0), 0u);
    EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 8);
}

TEST(Models, PresetsAndShapes) {
    EXPECT_EQ(parse_preset("gcn"), Preset::GcnBaseline);
    EXPECT_EQ(parse_preset("sc-gcn"), Preset::ScGcn);
    EXPECT_EQ(parse_preset("gsan"), Preset::Gsan);
    EXPECT_THROW(parse_preset("gat"), ParseError);
    std::mt19937_64 rng(11);
    const Graph g = random_weighted_graph(12, 0.3, rng);
    const Matrix x = random_matrix(12, 5, rng);
    for (Preset p : {Preset::GcnBaseline, Preset::ScGcn, Preset::Gsan}) {
        auto m = make_model(ModelConfig::defaults(p), 5, 3, rng);
        const Matrix y = m->predict(g, x);
        EXPECT_EQ(y.rows(), 12u);
        EXPECT_EQ(y.cols(), 3u);
        EXPECT_EQ(m->name(), preset_name(p));
    }
    EXPECT_EQ(ModelConfig::defaults(Preset::Gsan).alpha, 0.1);
    EXPECT_EQ(ModelConfig::defaults(Preset::ScGcn).alpha, 0.35);
}

TEST(Models, GsanPredictFillsAttentionState) {
    std::mt19937_64 rng(12);
    const Graph g = random_weighted_graph(12, 0.3, rng);
    auto m = make_model(ModelConfig::defaults(Preset::Gsan), 5, 3, rng);
    AttentionState st;
    m->predict(g, random_matrix(12, 5, rng), &st);
    ASSERT_EQ(st.heads.size(), 4u);
    EXPECT_EQ(st.heads[0].alpha.cols(), 6u);
}

TEST(Models, SnapshotRestoreRoundTrip) {
    std::mt19937_64 rng(13);
    GcnModel m(3, 4, 2, rng);
    const auto snap = m.snapshot();
    for (auto* p : m.parameters()) p->value() = Matrix(p->value().rows(), p->value().cols(), 7.0);
    m.restore(snap);
    EXPECT_EQ(m.snapshot(), snap);
}
