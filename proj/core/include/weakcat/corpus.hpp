#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "weakcat/errors.hpp"
#include "weakcat/io.hpp"

namespace weakcat {

// one product image with its raw text fields; image input is kept as a flat
// vector (precomputed features or a flattened raw tensor)
struct CatalogRecord {
    std::string record_id;
    std::string item_id;
    std::string source_id;
    std::vector<std::string> text_fields;
    std::vector<float> input;
    bool precomputed_features = true;
};

struct PreprocessConfig {
    std::unordered_set<std::string> stopwords; // union of the selected languages
    std::unordered_set<std::string> blacklist;
    std::size_t min_token_length = 1; // in code points
    std::size_t vocabulary_max_size = 30000;
    double validation_fraction = 0.005;
    std::uint64_t seed = 0;
};

// built-in stopword lists; languages: "en", "fr"
const std::vector<std::string>& builtin_stopwords(const std::string& language);
const std::vector<std::string>& builtin_blacklist();

class Vocabulary {
public:
    Vocabulary() = default;
    Vocabulary(std::vector<std::string> tokens, std::vector<std::uint64_t> freqs,
               std::size_t max_size);

    std::size_t size() const { return tokens_.size(); }
    const std::vector<std::string>& tokens() const { return tokens_; }
    const std::string& token(std::size_t i) const { return tokens_[i]; }
    std::uint64_t frequency(std::size_t i) const { return freqs_[i]; }
    // -1 if absent
    std::int64_t index_of(const std::string& token) const;
    Fingerprint fingerprint() const { return fingerprint_tokens(tokens_); }

    void save(const std::string& path, const std::string& config_fingerprint) const;
    static Vocabulary load(const std::string& path);

private:
    std::vector<std::string> tokens_;
    std::vector<std::uint64_t> freqs_;
    std::unordered_map<std::string, std::size_t> index_;
    std::size_t max_size_ = 0;
};

struct TrainingSample {
    std::string record_id;
    std::string item_id;
    std::vector<float> input;
    std::vector<std::uint32_t> labels; // sorted, duplicate-free, non-empty
};

// lowercase, split on maximal runs of alphabetic characters, filter
std::vector<std::string> preprocess_text(const std::vector<std::string>& text_fields,
                                         const PreprocessConfig& config);

// document frequency (once per bag); top max_size by (freq desc, token asc)
Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& token_bags,
                            const PreprocessConfig& config);

struct DatasetBuild {
    std::vector<TrainingSample> samples;
    std::size_t dropped_records = 0;
};

DatasetBuild build_dataset(const std::vector<CatalogRecord>& records,
                           const Vocabulary& vocab, const PreprocessConfig& config);

struct Split {
    std::vector<TrainingSample> train;
    std::vector<TrainingSample> valid;
    std::size_t uncovered_labels = 0; // labels in valid missing from train after repair
};

Split split_validation(const std::vector<TrainingSample>& samples,
                       const PreprocessConfig& config, std::size_t vocab_size);

// line-delimited JSON catalog; throws ParseError with 1-based line numbers
std::vector<CatalogRecord> read_catalog(const std::string& path);
void append_catalog(std::vector<CatalogRecord>& out, const std::string& path);

// dataset binary format ("WCAT")
void save_dataset(const std::string& path, const std::vector<TrainingSample>& samples,
                  std::uint32_t vocab_size);
struct Dataset {
    std::vector<TrainingSample> samples;
    std::uint32_t vocab_size = 0;
};
Dataset load_dataset(const std::string& path);

// fingerprint over the preprocessing knobs, stored in the vocabulary file
std::string config_fingerprint(const PreprocessConfig& config);

} // namespace weakcat
