#include <doctest.h>

#include <cmath>
#include <numeric>
#include <set>

#include "weakcat/trainer.hpp"

using namespace weakcat;

namespace {

EmbeddingModel precomputed_model(std::uint32_t dim, std::uint32_t k, std::uint64_t seed) {
    EmbeddingModel model;
    ExtractorArch arch;
    arch.kind = ExtractorKind::precomputed;
    arch.output_dim = dim;
    model.extractor = FeatureExtractor(arch);
    Rng rng(seed);
    model.word_matrix = WordEmbeddingMatrix::random_init(dim, k, rng);
    return model;
}

std::vector<TrainingSample> random_dataset(std::size_t n, std::uint32_t dim,
                                           std::uint32_t k, std::uint64_t seed,
                                           bool zero_features = false) {
    Rng rng(seed);
    std::vector<TrainingSample> out;
    for (std::size_t i = 0; i < n; ++i) {
        TrainingSample s;
        s.record_id = "r" + std::to_string(i);
        s.item_id = "i" + std::to_string(i);
        s.input.resize(dim);
        if (!zero_features)
            for (auto& v : s.input) v = float(rng.uniform_range(-1.0, 1.0));
        std::set<std::uint32_t> bag;
        std::size_t len = 1 + rng.uniform_index(3);
        while (bag.size() < len) bag.insert(std::uint32_t(rng.uniform_index(k)));
        s.labels.assign(bag.begin(), bag.end());
        out.push_back(std::move(s));
    }
    return out;
}

// 4 well-separated clusters, one word each
std::vector<TrainingSample> cluster_dataset(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<TrainingSample> out;
    for (std::size_t i = 0; i < n; ++i) {
        std::uint32_t c = std::uint32_t(i % 4);
        TrainingSample s;
        s.record_id = "r" + std::to_string(i);
        s.item_id = "c" + std::to_string(c);
        s.input.assign(8, 0.0f);
        s.input[c] = 2.0f;
        for (auto& v : s.input) v += float(0.05 * rng.normal());
        s.labels = {c};
        out.push_back(std::move(s));
    }
    return out;
}

} // namespace

TEST_CASE("run_epoch with lr 0 leaves parameters unchanged") {
    auto samples = random_dataset(50, 4, 10, 1);
    auto model = precomputed_model(4, 10, 2);
    auto before = model.word_matrix.data;
    auto index = build_inverted_index(samples, 10);
    TrainConfig tc;
    tc.initial_lr = 0.0;
    SamplerConfig sc;
    sc.n_negatives = 3;
    Rng rng(3);
    run_epoch(model, index, samples, tc, sc, Phase::head_only, rng);
    CHECK(model.word_matrix.data == before);
}

TEST_CASE("run_epoch is deterministic under a fixed seed") {
    auto samples = random_dataset(60, 4, 12, 4);
    auto index = build_inverted_index(samples, 12);
    TrainConfig tc;
    SamplerConfig sc;
    sc.n_negatives = 4;

    auto m1 = precomputed_model(4, 12, 7);
    auto m2 = precomputed_model(4, 12, 7);
    Rng r1(9), r2(9);
    double l1 = run_epoch(m1, index, samples, tc, sc, Phase::head_only, r1);
    double l2 = run_epoch(m2, index, samples, tc, sc, Phase::head_only, r2);
    CHECK(l1 == l2);
    CHECK(m1.word_matrix.data == m2.word_matrix.data);
}

TEST_CASE("loss strictly decreases on a tiny dataset") {
    // single sample, single word, K small enough for full-softmax validation
    std::vector<TrainingSample> samples(1);
    samples[0].record_id = "r0";
    samples[0].item_id = "i0";
    samples[0].input = {1.0f, 0.5f};
    samples[0].labels = {0};
    auto model = precomputed_model(2, 3, 11);
    auto index = build_inverted_index(samples, 3);
    TrainConfig tc;
    tc.epoch_fraction = 1.0;
    tc.batch_size = 1;
    SamplerConfig sc;
    sc.n_negatives = 2;
    Rng rng(12);
    double prev = validate(model, samples, sc);
    for (int epoch = 0; epoch < 50; ++epoch) {
        run_epoch(model, index, samples, tc, sc, Phase::head_only, rng);
        double cur = validate(model, samples, sc);
        CHECK(cur < prev);
        prev = cur;
    }
}

TEST_CASE("validate is deterministic and exact on zero logits") {
    auto samples = random_dataset(20, 3, 8, 21);
    auto model = precomputed_model(3, 8, 22);
    SamplerConfig sc;
    CHECK(validate(model, samples, sc) == validate(model, samples, sc));

    // W = 0: every term is ln(K) under the full softmax
    for (auto& v : model.word_matrix.data) v = 0.0;
    CHECK(validate(model, samples, sc) == doctest::Approx(std::log(8.0)).epsilon(1e-12));
}

TEST_CASE("sampled validation converges to the full softmax as negatives grow") {
    auto samples = random_dataset(10, 3, 40, 31);
    auto model = precomputed_model(3, 40, 32);
    SamplerConfig sc;
    double full = validate(model, samples, sc); // K <= 512: full softmax

    // manual sampled evaluation with every other word as negative = full
    double manual = 0.0;
    std::size_t terms = 0;
    Rng rng(33);
    for (const auto& s : samples) {
        auto z = model.extractor.forward(s.input);
        for (auto label : s.labels) {
            SamplerConfig all;
            all.n_negatives = 39;
            auto negs = sample_negatives(label, s.labels, all, 40, rng);
            std::vector<std::uint32_t> cands = {label};
            cands.insert(cands.end(), negs.begin(), negs.end());
            manual += sampled_loss(z, 0, cands, model.word_matrix);
            ++terms;
        }
    }
    manual /= double(terms);
    CHECK(manual == doctest::Approx(full).epsilon(1e-12));
}

TEST_CASE("fit: LR schedule and early stop with a frozen loss") {
    // all-zero features freeze every gradient, so validation never improves
    auto train = random_dataset(100, 4, 6, 41, /*zero_features=*/true);
    auto valid = random_dataset(10, 4, 6, 42, /*zero_features=*/true);
    auto model = precomputed_model(4, 6, 43);
    TrainConfig tc;
    tc.max_epochs = 500;
    SamplerConfig sc;
    sc.n_negatives = 3;
    auto log = fit(train, valid, model, tc, sc);

    // 1 improving epoch (vs +inf) + 20 non-improving ones, then stop
    REQUIRE(log.records.size() == 21);
    for (const auto& rec : log.records) {
        if (rec.epoch <= 11)
            CHECK(rec.lr == 0.1);
        else
            CHECK(rec.lr == doctest::Approx(0.01).epsilon(1e-12));
    }
    CHECK(log.best_epoch == 1);
}

TEST_CASE("fit: head-only phase never touches theta") {
    auto train = random_dataset(80, 5, 8, 51);
    auto valid = random_dataset(8, 5, 8, 52);
    ExtractorArch arch;
    arch.kind = ExtractorKind::mlp;
    arch.input_dim = 5;
    arch.output_dim = 4;
    arch.hidden = {6};
    EmbeddingModel model;
    Rng rng(53);
    model.extractor = FeatureExtractor::random_init(arch, rng);
    model.word_matrix = WordEmbeddingMatrix::random_init(4, 8, rng);
    auto theta_before = model.extractor.params();

    TrainConfig tc;
    tc.max_epochs = 10;
    tc.head_only_epochs = 100; // never leaves phase 1
    SamplerConfig sc;
    sc.n_negatives = 3;
    auto log = fit(train, valid, model, tc, sc);
    CHECK(model.extractor.params() == theta_before);
    CHECK(std::any_of(log.records.begin(), log.records.end(), [](const EpochRecord& r) {
        return r.phase == Phase::head_only;
    }));
}

TEST_CASE("fit returns the best-validation parameters and is deterministic") {
    auto train = random_dataset(120, 4, 10, 61);
    auto valid = random_dataset(12, 4, 10, 62);
    TrainConfig tc;
    tc.max_epochs = 30;
    tc.stop_patience_epochs = 30;
    SamplerConfig sc;
    sc.n_negatives = 4;

    auto m1 = precomputed_model(4, 10, 63);
    auto m2 = precomputed_model(4, 10, 63);
    auto log1 = fit(train, valid, m1, tc, sc);
    auto log2 = fit(train, valid, m2, tc, sc);
    CHECK(m1.word_matrix.data == m2.word_matrix.data);
    REQUIRE(log1.records.size() == log2.records.size());
    for (std::size_t i = 0; i < log1.records.size(); ++i)
        CHECK(log1.records[i].valid_loss == log2.records[i].valid_loss);

    double min_valid = log1.records.front().valid_loss;
    for (const auto& r : log1.records) min_valid = std::min(min_valid, r.valid_loss);
    CHECK(log1.best_validation == min_valid);
    CHECK(validate(m1, valid, sc) == doctest::Approx(min_valid).epsilon(1e-12));
}

TEST_CASE("fit halves the validation loss on a separable dataset") {
    auto all = cluster_dataset(200, 71);
    std::vector<TrainingSample> train(all.begin(), all.begin() + 180);
    std::vector<TrainingSample> valid(all.begin() + 180, all.end());
    auto model = precomputed_model(8, 4, 72);
    TrainConfig tc;
    tc.max_epochs = 120;
    tc.epoch_fraction = 0.5;
    SamplerConfig sc;
    sc.n_negatives = 3;
    auto log = fit(train, valid, model, tc, sc);
    CHECK(log.best_validation < 0.5 * log.initial_validation);
}
