#include "weakcat/sampler.hpp"

#include <algorithm>
#include <unordered_set>

#include "weakcat/errors.hpp"

namespace weakcat {

InvertedIndex build_inverted_index(const std::vector<TrainingSample>& samples,
                                   std::size_t vocab_size) {
    InvertedIndex idx;
    idx.postings.resize(vocab_size);
    for (std::uint32_t pos = 0; pos < samples.size(); ++pos) {
        for (auto label : samples[pos].labels) {
            if (label >= vocab_size) throw IndexOutOfRange("label exceeds vocabulary size");
            idx.postings[label].push_back(pos);
        }
    }
    for (std::uint32_t w = 0; w < vocab_size; ++w)
        if (!idx.postings[w].empty()) idx.active_words.push_back(w);
    return idx;
}

Pair sample_pair(const InvertedIndex& index, Rng& rng) {
    if (index.active_words.empty()) throw EmptyIndex("no word has any image");
    std::uint32_t word = index.active_words[rng.uniform_index(index.active_words.size())];
    const auto& posting = index.postings[word];
    return {word, posting[rng.uniform_index(posting.size())]};
}

std::vector<std::uint32_t> sample_negatives(std::uint32_t positive,
                                            const std::vector<std::uint32_t>& bag,
                                            const SamplerConfig& config,
                                            std::size_t vocab_size, Rng& rng) {
    std::unordered_set<std::uint32_t> excluded;
    excluded.insert(positive);
    if (config.exclude_bag_words_from_negatives)
        excluded.insert(bag.begin(), bag.end());

    const std::size_t eligible = vocab_size - excluded.size();
    if (eligible < config.n_negatives)
        throw NotEnoughCandidates("fewer eligible words than requested negatives");

    std::vector<std::uint32_t> out;
    out.reserve(config.n_negatives);
    if (config.n_negatives * 2 >= eligible) {
        // dense case: partial Fisher-Yates over the explicit eligible set
        std::vector<std::uint32_t> pool;
        pool.reserve(eligible);
        for (std::uint32_t w = 0; w < vocab_size; ++w)
            if (!excluded.count(w)) pool.push_back(w);
        for (std::size_t i = 0; i < config.n_negatives; ++i) {
            std::size_t j = i + rng.uniform_index(pool.size() - i);
            std::swap(pool[i], pool[j]);
            out.push_back(pool[i]);
        }
    } else {
        // sparse case: rejection sampling
        std::unordered_set<std::uint32_t> taken;
        while (out.size() < config.n_negatives) {
            auto w = static_cast<std::uint32_t>(rng.uniform_index(vocab_size));
            if (excluded.count(w) || !taken.insert(w).second) continue;
            out.push_back(w);
        }
    }
    return out;
}

} // namespace weakcat
