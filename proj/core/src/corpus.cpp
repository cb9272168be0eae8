#include "weakcat/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "weakcat/rng.hpp"

namespace weakcat {

namespace {

// alphabetic code points: ASCII plus the common European letter blocks;
// symbols and punctuation (e.g. U+2014 em-dash) are separators
bool is_alpha_cp(char32_t cp) {
    if ((cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z')) return true;
    if (cp >= 0xC0 && cp <= 0xFF && cp != 0xD7 && cp != 0xF7) return true; // Latin-1
    if (cp >= 0x100 && cp <= 0x24F) return true;                          // Latin Ext
    if (cp >= 0x370 && cp <= 0x3FF) return true;                          // Greek
    if (cp >= 0x400 && cp <= 0x4FF) return true;                          // Cyrillic
    return false;
}

char32_t lower_cp(char32_t cp) {
    if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
    if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20; // Latin-1 uppercase
    return cp;
}

void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | cp >> 6));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xE0 | cp >> 12));
        out.push_back(static_cast<char>(0x80 | (cp >> 6 & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

// decodes one code point; ill-formed bytes come back as U+FFFD (a separator)
char32_t next_cp(const std::string& s, std::size_t& i) {
    unsigned char c = s[i];
    if (c < 0x80) {
        ++i;
        return c;
    }
    int extra = c >= 0xF0 ? 3 : c >= 0xE0 ? 2 : c >= 0xC0 ? 1 : -1;
    if (extra < 0 || i + extra >= s.size()) {
        ++i;
        return 0xFFFD;
    }
    char32_t cp = c & (0x3F >> extra);
    for (int k = 1; k <= extra; ++k) {
        unsigned char cc = s[i + k];
        if ((cc & 0xC0) != 0x80) {
            ++i;
            return 0xFFFD;
        }
        cp = cp << 6 | (cc & 0x3F);
    }
    i += extra + 1;
    return cp;
}

// code points, not bytes
std::size_t utf8_length(const std::string& s) {
    std::size_t n = 0;
    for (unsigned char c : s)
        if ((c & 0xC0) != 0x80) ++n;
    return n;
}

} // namespace

std::vector<std::string> preprocess_text(const std::vector<std::string>& text_fields,
                                         const PreprocessConfig& config) {
    std::string joined;
    for (std::size_t i = 0; i < text_fields.size(); ++i) {
        if (i) joined.push_back(' ');
        joined += text_fields[i];
    }

    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        if (cur.empty()) return;
        std::string tok;
        tok.swap(cur);
        if (utf8_length(tok) < config.min_token_length) return;
        if (config.stopwords.count(tok) || config.blacklist.count(tok)) return;
        out.push_back(std::move(tok));
    };
    std::size_t i = 0;
    while (i < joined.size()) {
        char32_t cp = next_cp(joined, i);
        if (is_alpha_cp(cp))
            append_utf8(cur, lower_cp(cp));
        else
            flush();
    }
    flush();
    return out;
}

Vocabulary::Vocabulary(std::vector<std::string> tokens, std::vector<std::uint64_t> freqs,
                       std::size_t max_size)
    : tokens_(std::move(tokens)), freqs_(std::move(freqs)), max_size_(max_size) {
    index_.reserve(tokens_.size());
    for (std::size_t i = 0; i < tokens_.size(); ++i) index_[tokens_[i]] = i;
}

std::int64_t Vocabulary::index_of(const std::string& token) const {
    auto it = index_.find(token);
    return it == index_.end() ? -1 : static_cast<std::int64_t>(it->second);
}

Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& token_bags,
                            const PreprocessConfig& config) {
    std::unordered_map<std::string, std::uint64_t> df;
    std::unordered_set<std::string> seen;
    for (const auto& bag : token_bags) {
        seen.clear();
        for (const auto& tok : bag)
            if (seen.insert(tok).second) ++df[tok];
    }
    if (df.empty()) throw EmptyCorpus("no token survived preprocessing");

    std::vector<std::pair<std::string, std::uint64_t>> ranked(df.begin(), df.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (ranked.size() > config.vocabulary_max_size)
        ranked.resize(config.vocabulary_max_size);

    std::vector<std::string> tokens;
    std::vector<std::uint64_t> freqs;
    tokens.reserve(ranked.size());
    freqs.reserve(ranked.size());
    for (auto& [tok, f] : ranked) {
        tokens.push_back(std::move(tok));
        freqs.push_back(f);
    }
    return Vocabulary(std::move(tokens), std::move(freqs), config.vocabulary_max_size);
}

DatasetBuild build_dataset(const std::vector<CatalogRecord>& records,
                           const Vocabulary& vocab, const PreprocessConfig& config) {
    DatasetBuild out;
    for (const auto& rec : records) {
        auto tokens = preprocess_text(rec.text_fields, config);
        std::set<std::uint32_t> bag;
        for (const auto& tok : tokens) {
            std::int64_t idx = vocab.index_of(tok);
            if (idx >= 0) bag.insert(static_cast<std::uint32_t>(idx));
        }
        if (bag.empty()) {
            ++out.dropped_records;
            continue;
        }
        TrainingSample s;
        s.record_id = rec.record_id;
        s.item_id = rec.item_id;
        s.input = rec.input;
        s.labels.assign(bag.begin(), bag.end());
        out.samples.push_back(std::move(s));
    }
    return out;
}

Split split_validation(const std::vector<TrainingSample>& samples,
                       const PreprocessConfig& config, std::size_t vocab_size) {
    const std::size_t n = samples.size();
    if (n < 2) throw DegenerateSplit("need at least 2 samples to split");
    std::size_t n_valid = static_cast<std::size_t>(
        std::llround(config.validation_fraction * static_cast<double>(n)));
    if (n_valid < 1) n_valid = 1;
    if (n_valid >= n) throw DegenerateSplit("validation split would empty the training set");

    Rng rng(Rng::derive(config.seed, 0x53504c49)); // "SPLI"
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    rng.shuffle(perm);

    std::vector<std::size_t> valid_idx(perm.begin(), perm.begin() + n_valid);
    std::vector<std::size_t> train_idx(perm.begin() + n_valid, perm.end());

    // label coverage: every label in valid must also appear in train
    std::vector<std::uint64_t> train_count(vocab_size, 0);
    for (auto i : train_idx)
        for (auto l : samples[i].labels) ++train_count[l];

    auto first_uncovered = [&]() -> std::ptrdiff_t {
        for (std::size_t v = 0; v < valid_idx.size(); ++v)
            for (auto l : samples[valid_idx[v]].labels)
                if (train_count[l] == 0) return static_cast<std::ptrdiff_t>(v);
        return -1;
    };

    const std::size_t max_attempts = vocab_size * 4;
    for (std::size_t attempt = 0; attempt < max_attempts; ++attempt) {
        std::ptrdiff_t bad = first_uncovered();
        if (bad < 0) break;
        // pick a train sample whose removal keeps all its labels covered
        std::size_t pick = rng.uniform_index(train_idx.size());
        bool safe = true;
        for (auto l : samples[train_idx[pick]].labels)
            if (train_count[l] < 2) { safe = false; break; }
        if (!safe) continue;
        std::size_t moving_in = valid_idx[static_cast<std::size_t>(bad)];
        std::size_t moving_out = train_idx[pick];
        for (auto l : samples[moving_in].labels) ++train_count[l];
        for (auto l : samples[moving_out].labels) --train_count[l];
        valid_idx[static_cast<std::size_t>(bad)] = moving_out;
        train_idx[pick] = moving_in;
    }

    std::sort(train_idx.begin(), train_idx.end());
    std::sort(valid_idx.begin(), valid_idx.end());

    Split split;
    for (auto i : train_idx) split.train.push_back(samples[i]);
    for (auto i : valid_idx) split.valid.push_back(samples[i]);

    std::set<std::uint32_t> uncovered;
    for (const auto& s : split.valid)
        for (auto l : s.labels)
            if (train_count[l] == 0) uncovered.insert(l);
    split.uncovered_labels = uncovered.size();
    return split;
}

namespace {

void flatten_json_numbers(const nlohmann::json& j, std::vector<float>& out,
                          std::size_t line) {
    if (j.is_number()) {
        out.push_back(j.get<float>());
    } else if (j.is_array()) {
        for (const auto& e : j) flatten_json_numbers(e, out, line);
    } else {
        throw ParseError("image/features must be numeric arrays", line);
    }
}

} // namespace

void append_catalog(std::vector<CatalogRecord>& out, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open catalog: " + path);
    std::unordered_set<std::string> seen_ids;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string("malformed record: ") + e.what(), lineno);
        }
        CatalogRecord rec;
        try {
            rec.record_id = j.at("record_id").get<std::string>();
            rec.item_id = j.at("item_id").get<std::string>();
            rec.source_id = j.value("source_id", std::string());
            rec.text_fields = j.at("text_fields").get<std::vector<std::string>>();
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string("missing or bad field: ") + e.what(), lineno);
        }
        if (!seen_ids.insert(rec.record_id).second)
            throw ParseError("duplicate record_id: " + rec.record_id, lineno);
        if (rec.text_fields.empty())
            throw ParseError("record needs at least one text field", lineno);

        bool has_features = j.contains("features");
        bool has_image = j.contains("image");
        if (has_features == has_image)
            throw ParseError("record needs exactly one of 'features' or 'image'", lineno);
        rec.precomputed_features = has_features;
        flatten_json_numbers(j.at(has_features ? "features" : "image"), rec.input, lineno);
        if (rec.input.empty()) throw ParseError("empty image input", lineno);
        for (float v : rec.input) {
            if (!std::isfinite(v)) throw ParseError("non-finite image input value", lineno);
            if (has_image && (v < 0.0f || v > 1.0f))
                throw ParseError("raw image values must lie in [0,1]", lineno);
        }
        out.push_back(std::move(rec));
    }
}

std::vector<CatalogRecord> read_catalog(const std::string& path) {
    std::vector<CatalogRecord> out;
    append_catalog(out, path);
    return out;
}

void Vocabulary::save(const std::string& path, const std::string& cfg_fp) const {
    nlohmann::ordered_json j;
    j["format"] = "weakcat-vocab";
    j["version"] = 1;
    j["max_size"] = max_size_;
    j["config_fingerprint"] = cfg_fp;
    j["token_fingerprint"] = fingerprint_hex(fingerprint());
    auto& arr = j["tokens"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < tokens_.size(); ++i)
        arr.push_back({tokens_[i], freqs_[i]});
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open for writing: " + path);
    out << j.dump() << '\n';
}

Vocabulary Vocabulary::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open vocabulary: " + path);
    nlohmann::json j;
    try {
        in >> j;
        if (j.at("format") != "weakcat-vocab" || j.at("version") != 1)
            throw CorruptFile("not a weakcat vocabulary file: " + path);
        std::vector<std::string> tokens;
        std::vector<std::uint64_t> freqs;
        for (const auto& e : j.at("tokens")) {
            tokens.push_back(e.at(0).get<std::string>());
            freqs.push_back(e.at(1).get<std::uint64_t>());
        }
        Vocabulary v(std::move(tokens), std::move(freqs),
                     j.at("max_size").get<std::size_t>());
        auto stored = j.at("token_fingerprint").get<std::string>();
        if (stored != fingerprint_hex(v.fingerprint()))
            throw CorruptFile("vocabulary fingerprint mismatch: " + path);
        return v;
    } catch (const nlohmann::json::exception& e) {
        throw CorruptFile("bad vocabulary file " + path + ": " + e.what());
    }
}

void save_dataset(const std::string& path, const std::vector<TrainingSample>& samples,
                  std::uint32_t vocab_size) {
    BinWriter w(path);
    w.bytes("WCAT", 4);
    w.u16(1); // format version
    w.u32(vocab_size);
    w.u64(samples.size());
    for (const auto& s : samples) {
        w.str16(s.record_id);
        w.str16(s.item_id);
        if (s.labels.size() > 0xffff) throw Error("too many labels in one sample");
        w.u16(static_cast<std::uint16_t>(s.labels.size()));
        for (auto l : s.labels) w.u32(l);
        w.u32(static_cast<std::uint32_t>(s.input.size()));
        for (float v : s.input) w.f32(v);
    }
    w.close();
}

Dataset load_dataset(const std::string& path) {
    BinReader r(path);
    char magic[4];
    r.bytes(magic, 4);
    if (std::memcmp(magic, "WCAT", 4) != 0)
        throw CorruptFile("not a weakcat dataset: " + path);
    if (r.u16() != 1) throw CorruptFile("unsupported dataset version: " + path);
    Dataset ds;
    ds.vocab_size = r.u32();
    std::uint64_t n = r.u64();
    ds.samples.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        TrainingSample s;
        s.record_id = r.str16();
        s.item_id = r.str16();
        std::uint16_t nl = r.u16();
        s.labels.resize(nl);
        for (auto& l : s.labels) {
            l = r.u32();
            if (l >= ds.vocab_size) throw CorruptFile("label out of range: " + path);
        }
        if (nl == 0) throw CorruptFile("empty label set in dataset: " + path);
        std::uint32_t nf = r.u32();
        s.input.resize(nf);
        for (auto& v : s.input) v = r.f32();
        ds.samples.push_back(std::move(s));
    }
    return ds;
}

std::string config_fingerprint(const PreprocessConfig& config) {
    std::vector<std::string> parts;
    parts.push_back("min_len=" + std::to_string(config.min_token_length));
    parts.push_back("max_size=" + std::to_string(config.vocabulary_max_size));
    std::vector<std::string> sw(config.stopwords.begin(), config.stopwords.end());
    std::sort(sw.begin(), sw.end());
    for (auto& s : sw) parts.push_back("sw:" + s);
    std::vector<std::string> bl(config.blacklist.begin(), config.blacklist.end());
    std::sort(bl.begin(), bl.end());
    for (auto& s : bl) parts.push_back("bl:" + s);
    return fingerprint_hex(fingerprint_tokens(parts));
}

} // namespace weakcat
