#pragma once

#include <cstdint>
#include <vector>

#include "weakcat/corpus.hpp"
#include "weakcat/rng.hpp"

namespace weakcat {

// word -> positions of samples whose bag contains it; immutable after build
struct InvertedIndex {
    std::vector<std::vector<std::uint32_t>> postings;
    std::vector<std::uint32_t> active_words;
};

struct SamplerConfig {
    std::size_t n_negatives = 10;
    std::uint64_t seed = 0;
    bool exclude_bag_words_from_negatives = false;
};

InvertedIndex build_inverted_index(const std::vector<TrainingSample>& samples,
                                   std::size_t vocab_size);

struct Pair {
    std::uint32_t word;
    std::uint32_t sample_position;
};

// uniform over active words, then uniform over that word's images
Pair sample_pair(const InvertedIndex& index, Rng& rng);

// n_negatives distinct words, never the positive, uniform without replacement
std::vector<std::uint32_t> sample_negatives(std::uint32_t positive,
                                            const std::vector<std::uint32_t>& bag,
                                            const SamplerConfig& config,
                                            std::size_t vocab_size, Rng& rng);

} // namespace weakcat
