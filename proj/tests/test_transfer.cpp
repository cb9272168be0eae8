#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "weakcat/errors.hpp"
#include "weakcat/transfer.hpp"

using namespace weakcat;

namespace {

// O(n^2) pair-counting oracle with half credit for ties
double auc_brute_force(const std::vector<double>& scores,
                       const std::vector<std::uint8_t>& labels) {
    double concordant = 0, ties = 0;
    std::size_t n_pos = 0, n_neg = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!labels[i]) continue;
        ++n_pos;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j]) continue;
            if (scores[i] > scores[j]) concordant += 1;
            else if (scores[i] == scores[j]) ties += 1;
        }
    }
    for (auto y : labels) n_neg += y ? 0 : 1;
    return (concordant + 0.5 * ties) / (double(n_pos) * double(n_neg));
}

ProbeDataset two_class_2d(std::size_t per_class, double gap, std::uint64_t seed) {
    Rng rng(seed);
    ProbeDataset data;
    data.dim = 2;
    data.n_classes = 2;
    for (std::size_t i = 0; i < 2 * per_class; ++i) {
        std::uint32_t c = i % 2;
        double cx = c == 0 ? -gap : gap;
        data.features.push_back(cx + 0.3 * rng.normal());
        data.features.push_back(0.3 * rng.normal());
        data.classes.push_back(c);
        ++data.n;
    }
    return data;
}

} // namespace

TEST_CASE("roc_auc fixed values") {
    CHECK(roc_auc(std::vector<double>{0.9, 0.8, 0.2, 0.1},
                  std::vector<std::uint8_t>{1, 1, 0, 0}) == 1.0);
    CHECK(roc_auc(std::vector<double>{0.5, 0.5, 0.5, 0.5},
                  std::vector<std::uint8_t>{1, 0, 1, 0}) == 0.5);
    // 3 of 4 pairs concordant, none tied
    CHECK(roc_auc(std::vector<double>{0.8, 0.4, 0.6, 0.2},
                  std::vector<std::uint8_t>{1, 1, 0, 0}) == 0.75);
}

TEST_CASE("roc_auc rejects single-class labels") {
    CHECK_THROWS_AS(roc_auc(std::vector<double>{0.1, 0.2},
                            std::vector<std::uint8_t>{1, 1}),
                    DegenerateLabels);
}

TEST_CASE("roc_auc equals the brute-force pair count, ties included") {
    Rng rng(17);
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t n = 2 + rng.uniform_index(1000);
        std::vector<double> scores(n);
        std::vector<std::uint8_t> labels(n);
        // coarse grid to force plenty of ties
        for (std::size_t i = 0; i < n; ++i) {
            scores[i] = double(rng.uniform_index(8)) / 4.0;
            labels[i] = rng.uniform_index(2) ? 1 : 0;
        }
        labels[0] = 1;
        labels[1] = 0;
        CHECK(roc_auc(scores, labels) == auc_brute_force(scores, labels));
    }
}

TEST_CASE("roc_auc score-negation symmetry for tie-free scores") {
    Rng rng(18);
    for (int trial = 0; trial < 20; ++trial) {
        std::size_t n = 10 + rng.uniform_index(50);
        std::vector<double> scores(n);
        std::vector<std::uint8_t> labels(n);
        for (std::size_t i = 0; i < n; ++i) {
            scores[i] = rng.uniform_real(); // ties have probability ~0
            labels[i] = rng.uniform_index(2) ? 1 : 0;
        }
        labels[0] = 1;
        labels[1] = 0;
        std::vector<double> negated = scores;
        for (auto& s : negated) s = -s;
        CHECK(roc_auc(scores, labels) + roc_auc(negated, labels) ==
              doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("train_probe separates a linearly separable 2-class set") {
    auto data = two_class_2d(40, 2.0, 7);
    ProbeConfig cfg;
    cfg.seed = 1;
    auto trained = train_probe(data, ProbeHead::softmax_head, cfg);
    auto acc = topk_class_accuracy(trained.probe, data, {1});
    CHECK(acc.at(1) == 1.0);
    // training loss trends down
    CHECK(trained.epoch_losses.back() < trained.epoch_losses.front());
}

TEST_CASE("train_probe on an all-one-class dataset predicts that class") {
    ProbeDataset data;
    data.dim = 2;
    data.n_classes = 2;
    Rng rng(8);
    for (int i = 0; i < 30; ++i) {
        data.features.push_back(rng.normal());
        data.features.push_back(rng.normal());
        data.classes.push_back(1);
        ++data.n;
    }
    ProbeConfig cfg;
    cfg.epochs = 100;
    auto trained = train_probe(data, ProbeHead::softmax_head, cfg);
    for (std::size_t i = 0; i < data.n; ++i) {
        auto logits = trained.probe.logits(data.row(i));
        CHECK(logits[1] > logits[0]);
    }
}

TEST_CASE("probe training is seed-deterministic") {
    auto data = two_class_2d(20, 1.0, 9);
    ProbeConfig cfg;
    cfg.seed = 42;
    cfg.epochs = 20;
    auto a = train_probe(data, ProbeHead::softmax_head, cfg);
    auto b = train_probe(data, ProbeHead::softmax_head, cfg);
    CHECK(a.probe.weights == b.probe.weights);
    CHECK(a.probe.bias == b.probe.bias);
}

TEST_CASE("probe gradients match finite differences for both heads") {
    Rng rng(10);
    for (int trial = 0; trial < 10; ++trial) {
        ProbeDataset data;
        data.dim = 3;
        bool sigmoid = trial % 2;
        if (sigmoid)
            data.n_attrs = 4;
        else
            data.n_classes = 4;
        for (int i = 0; i < 6; ++i) {
            for (int d = 0; d < 3; ++d) data.features.push_back(rng.uniform_range(-1, 1));
            if (sigmoid)
                for (int a = 0; a < 4; ++a)
                    data.attributes.push_back(rng.uniform_index(2) ? 1 : 0);
            else
                data.classes.push_back(std::uint32_t(rng.uniform_index(4)));
            ++data.n;
        }
        LinearProbe probe;
        probe.head = sigmoid ? ProbeHead::sigmoid_head : ProbeHead::softmax_head;
        probe.in_dim = 3;
        probe.out_dim = 4;
        probe.weights.resize(12);
        for (auto& w : probe.weights) w = rng.uniform_range(-1, 1);
        probe.bias.resize(4);
        for (auto& b : probe.bias) b = rng.uniform_range(-1, 1);

        std::vector<std::size_t> batch = {0, 1, 2, 3, 4, 5};
        std::vector<double> dw, db;
        probe_gradients(probe, data, batch, dw, db);
        const double h = 1e-4;
        auto check_coord = [&](double& param, double analytic) {
            double saved = param;
            param = saved + h;
            double up = probe_loss(probe, data, batch);
            param = saved - h;
            double down = probe_loss(probe, data, batch);
            param = saved;
            double numeric = (up - down) / (2 * h);
            double denom = std::max({std::abs(numeric), std::abs(analytic), 1e-3});
            CHECK(std::abs(numeric - analytic) / denom < 1e-4);
        };
        for (std::size_t i = 0; i < probe.weights.size(); ++i)
            check_coord(probe.weights[i], dw[i]);
        for (std::size_t i = 0; i < probe.bias.size(); ++i)
            check_coord(probe.bias[i], db[i]);
    }
}

TEST_CASE("topk_class_accuracy trivial and exhaustive cases") {
    auto data = two_class_2d(25, 2.0, 11);
    ProbeConfig cfg;
    auto trained = train_probe(data, ProbeHead::softmax_head, cfg);
    auto acc = topk_class_accuracy(trained.probe, data, {1, 2});
    CHECK(acc.at(1) == 1.0); // perfect probe
    CHECK(acc.at(2) == 1.0); // k = C is always exhaustive

    // monotone in k on a random probe
    Rng rng(12);
    ProbeDataset noisy;
    noisy.dim = 2;
    noisy.n_classes = 6;
    for (int i = 0; i < 100; ++i) {
        noisy.features.push_back(rng.normal());
        noisy.features.push_back(rng.normal());
        noisy.classes.push_back(std::uint32_t(rng.uniform_index(6)));
        ++noisy.n;
    }
    LinearProbe random_probe;
    random_probe.head = ProbeHead::softmax_head;
    random_probe.in_dim = 2;
    random_probe.out_dim = 6;
    random_probe.weights.resize(12);
    for (auto& w : random_probe.weights) w = rng.normal();
    random_probe.bias.assign(6, 0.0);
    auto macc = topk_class_accuracy(random_probe, noisy, {1, 2, 3, 4, 5, 6});
    for (std::size_t k = 2; k <= 6; ++k) CHECK(macc.at(k) >= macc.at(k - 1));
    CHECK(macc.at(6) == 1.0);
}

TEST_CASE("random probe accuracy is about k/C on a balanced set") {
    // independent features and classes: top-k hits the truth with rate k/C
    Rng rng(13);
    ProbeDataset data;
    data.dim = 4;
    data.n_classes = 5;
    const std::size_t n = 4000;
    for (std::size_t i = 0; i < n; ++i) {
        for (int d = 0; d < 4; ++d) data.features.push_back(rng.normal());
        data.classes.push_back(std::uint32_t(i % 5));
        ++data.n;
    }
    LinearProbe probe;
    probe.head = ProbeHead::softmax_head;
    probe.in_dim = 4;
    probe.out_dim = 5;
    probe.weights.resize(20);
    for (auto& w : probe.weights) w = rng.normal();
    probe.bias.assign(5, 0.0);
    auto acc = topk_class_accuracy(probe, data, {1, 2});
    // 3 sigma for a Bernoulli(k/5) mean over 4000 samples
    double sigma1 = std::sqrt(0.2 * 0.8 / double(n));
    CHECK(std::abs(acc.at(1) - 0.2) < 3 * sigma1 + 1e-9);
    double sigma2 = std::sqrt(0.4 * 0.6 / double(n));
    CHECK(std::abs(acc.at(2) - 0.4) < 3 * sigma2 + 1e-9);
}

TEST_CASE("topk_attribute_recall hand-built instance") {
    // 4 samples, 5 attributes, identity-ish scores
    ProbeDataset data;
    data.dim = 5;
    data.n_attrs = 5;
    std::vector<std::vector<std::uint8_t>> truth = {
        {1, 1, 0, 0, 0}, {0, 0, 1, 0, 0}, {1, 0, 0, 1, 1}, {0, 0, 0, 0, 0}};
    std::vector<std::vector<double>> feats = {
        {5, 4, 3, 2, 1}, {1, 2, 5, 4, 3}, {5, 1, 2, 4, 3}, {1, 2, 3, 4, 5}};
    for (int i = 0; i < 4; ++i) {
        for (double f : feats[i]) data.features.push_back(f);
        for (auto t : truth[i]) data.attributes.push_back(t);
        ++data.n;
    }
    LinearProbe probe; // identity probe: score = feature
    probe.head = ProbeHead::sigmoid_head;
    probe.in_dim = 5;
    probe.out_dim = 5;
    probe.weights.assign(25, 0.0);
    for (int i = 0; i < 5; ++i) probe.weights[i * 5 + i] = 1.0;
    probe.bias.assign(5, 0.0);

    // hand-computed: sample 0 top-2 = {a0,a1}, recall 1; sample 1 top-2 = {a2,a3},
    // recall 1; sample 2 top-2 = {a0,a3}, truth {a0,a3,a4} -> 2/3; sample 3 skipped
    auto recall = topk_attribute_recall(probe, data, {2, 5}, {});
    CHECK(recall.at("").at(2) == doctest::Approx((1.0 + 1.0 + 2.0 / 3.0) / 3.0));
    CHECK(recall.at("").at(5) == 1.0); // k = A recovers everything

    // counting empty-truth samples as zero shrinks the mean
    auto strict = topk_attribute_recall(probe, data, {5}, {}, true);
    CHECK(strict.at("").at(5) == doctest::Approx(3.0 / 4.0));
}

TEST_CASE("topk_attribute_recall with groups") {
    ProbeDataset data;
    data.dim = 4;
    data.n_attrs = 4;
    data.n = 1;
    data.features = {4, 3, 2, 1};
    data.attributes = {1, 0, 0, 1};
    LinearProbe probe;
    probe.head = ProbeHead::sigmoid_head;
    probe.in_dim = 4;
    probe.out_dim = 4;
    probe.weights.assign(16, 0.0);
    for (int i = 0; i < 4; ++i) probe.weights[i * 4 + i] = 1.0;
    probe.bias.assign(4, 0.0);

    std::vector<std::string> groups = {"texture", "texture", "shape", "shape"};
    auto recall = topk_attribute_recall(probe, data, {1}, groups);
    CHECK(recall.at("texture").at(1) == 1.0); // a0 tops its group and is true
    CHECK(recall.at("shape").at(1) == 0.0);   // a2 tops the group but a3 is true
}

TEST_CASE("per_class_auc one-vs-rest on a separable set") {
    auto data = two_class_2d(30, 2.0, 19);
    ProbeConfig cfg;
    auto trained = train_probe(data, ProbeHead::softmax_head, cfg);
    auto aucs = per_class_auc(trained.probe, data);
    REQUIRE(aucs.size() == 2);
    CHECK(aucs[0] > 0.95);
    CHECK(aucs[1] > 0.95);
}
