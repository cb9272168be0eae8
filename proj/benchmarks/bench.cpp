#include <benchmark/benchmark.h>

#include <numeric>

#include "weakcat/corpus.hpp"
#include "weakcat/model.hpp"
#include "weakcat/retrieval.hpp"
#include "weakcat/sampler.hpp"

namespace {

using namespace weakcat;

std::vector<TrainingSample> bench_samples(std::size_t n, std::size_t k, std::size_t dim) {
    Rng rng(99);
    std::vector<TrainingSample> out;
    for (std::size_t i = 0; i < n; ++i) {
        TrainingSample s;
        s.record_id = "r" + std::to_string(i);
        s.item_id = "i" + std::to_string(i / 2);
        s.input.resize(dim);
        for (auto& v : s.input) v = float(rng.uniform_range(-1.0, 1.0));
        std::set<std::uint32_t> bag;
        while (bag.size() < 5) bag.insert(std::uint32_t(rng.uniform_index(k)));
        s.labels.assign(bag.begin(), bag.end());
        out.push_back(std::move(s));
    }
    return out;
}

void BM_Tokenize(benchmark::State& state) {
    PreprocessConfig config;
    for (const auto& w : builtin_stopwords("en")) config.stopwords.insert(w);
    std::vector<std::string> fields = {
        "Classic Blue Striped Cotton Shirt with Long Sleeves",
        "A timeless shirt for the modern wardrobe, 100% organic cotton, size XL."};
    for (auto _ : state)
        benchmark::DoNotOptimize(preprocess_text(fields, config));
}
BENCHMARK(BM_Tokenize);

void BM_SamplePair(benchmark::State& state) {
    auto samples = bench_samples(5000, 1000, 8);
    auto index = build_inverted_index(samples, 1000);
    Rng rng(1);
    for (auto _ : state) benchmark::DoNotOptimize(sample_pair(index, rng));
}
BENCHMARK(BM_SamplePair);

void BM_SampledGradients(benchmark::State& state) {
    Rng rng(2);
    auto w = WordEmbeddingMatrix::random_init(64, 30000, rng);
    std::vector<double> z(64);
    for (auto& v : z) v = rng.uniform_range(-1.0, 1.0);
    std::vector<std::uint32_t> cands(11);
    std::iota(cands.begin(), cands.end(), 100u);
    for (auto _ : state) benchmark::DoNotOptimize(sampled_gradients(z, 0, cands, w));
}
BENCHMARK(BM_SampledGradients);

void BM_RetrievalQuery(benchmark::State& state) {
    Rng rng(3);
    RetrievalIndex index(64);
    for (int i = 0; i < int(state.range(0)); ++i) {
        std::vector<double> e(64);
        for (auto& v : e) v = rng.uniform_range(-1.0, 1.0);
        index.insert("i" + std::to_string(i), "r" + std::to_string(i), std::move(e));
    }
    std::vector<double> q = index.rows()[0].embedding;
    for (auto _ : state) benchmark::DoNotOptimize(query(index, q, 20));
}
BENCHMARK(BM_RetrievalQuery)->Arg(1000)->Arg(10000);

} // namespace

BENCHMARK_MAIN();
