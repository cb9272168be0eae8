#include "weakcat/synthetic.hpp"

#include <fstream>

#include <json.hpp>

#include "weakcat/rng.hpp"

namespace weakcat {

namespace {

// purely alphabetic id so the tokenizer keeps it intact
std::string alpha_id(std::size_t n) {
    std::string s;
    s.push_back(static_cast<char>('a' + n / 26 % 26));
    s.push_back(static_cast<char>('a' + n % 26));
    return s;
}

} // namespace

std::string synthetic_cluster_of(const std::string& item_id) {
    auto dash = item_id.find('-');
    return dash == std::string::npos ? item_id : item_id.substr(0, dash);
}

std::vector<CatalogRecord> generate_catalog(const SyntheticSpec& spec) {
    Rng rng(Rng::derive(spec.seed, 0x53594e54)); // "SYNT"

    std::vector<std::vector<std::string>> cluster_words(spec.clusters);
    for (std::size_t c = 0; c < spec.clusters; ++c)
        for (std::size_t w = 0; w < spec.words_per_cluster; ++w)
            cluster_words[c].push_back("vis" + alpha_id(c) + alpha_id(w));
    std::vector<std::string> noise_words;
    for (std::size_t w = 0; w < spec.noise_words; ++w)
        noise_words.push_back("noz" + alpha_id(w));

    std::vector<std::vector<double>> centers(spec.clusters,
                                             std::vector<double>(spec.feature_dim));
    for (auto& center : centers)
        for (auto& v : center) v = rng.normal();

    std::vector<CatalogRecord> records;
    std::size_t item = 0;
    while (records.size() < spec.n_samples) {
        std::size_t cluster = item % spec.clusters;

        std::vector<std::string> bag;
        for (const auto& w : cluster_words[cluster])
            if (rng.uniform_real() < spec.cluster_word_rate) bag.push_back(w);
        if (bag.empty())
            bag.push_back(cluster_words[cluster][rng.uniform_index(spec.words_per_cluster)]);
        for (const auto& w : noise_words)
            if (rng.uniform_real() < spec.noise_rate) bag.push_back(w);

        std::string text;
        for (std::size_t i = 0; i < bag.size(); ++i) {
            if (i) text.push_back(' ');
            text += bag[i];
        }
        std::string item_id =
            "c" + std::to_string(cluster) + "-item" + std::to_string(item);

        for (std::size_t img = 0;
             img < spec.images_per_item && records.size() < spec.n_samples; ++img) {
            CatalogRecord rec;
            rec.record_id = "r" + std::to_string(records.size());
            rec.item_id = item_id;
            rec.source_id = "synthetic";
            rec.text_fields = {text};
            rec.precomputed_features = true;
            rec.input.resize(spec.feature_dim);
            for (std::size_t d = 0; d < spec.feature_dim; ++d)
                rec.input[d] = static_cast<float>(centers[cluster][d] +
                                                  spec.feature_sigma * rng.normal());
            records.push_back(std::move(rec));
        }
        ++item;
    }
    return records;
}

void write_catalog(const std::vector<CatalogRecord>& records, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open for writing: " + path);
    for (const auto& rec : records) {
        nlohmann::ordered_json j;
        j["record_id"] = rec.record_id;
        j["item_id"] = rec.item_id;
        j["source_id"] = rec.source_id;
        j["text_fields"] = rec.text_fields;
        j["features"] = rec.input;
        out << j.dump() << '\n';
    }
}

} // namespace weakcat
