#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "weakcat/corpus.hpp"

namespace weakcat {

// desk-scale stand-in for a crawled catalog: feature clusters with
// cluster-correlated visual words plus uniformly sprinkled noise words
struct SyntheticSpec {
    std::size_t clusters = 8;
    std::size_t words_per_cluster = 5;
    std::size_t noise_words = 60;
    std::size_t n_samples = 4000;
    std::size_t feature_dim = 16;
    double cluster_word_rate = 0.8; // P(a cluster word enters the bag)
    double noise_rate = 0.1;        // P(a noise word enters the bag)
    double feature_sigma = 0.1;
    std::size_t images_per_item = 2;
    std::uint64_t seed = 0;
};

std::vector<CatalogRecord> generate_catalog(const SyntheticSpec& spec);
void write_catalog(const std::vector<CatalogRecord>& records, const std::string& path);

// cluster tag embedded in a synthetic item_id ("c3-item17" -> "c3")
std::string synthetic_cluster_of(const std::string& item_id);

} // namespace weakcat
