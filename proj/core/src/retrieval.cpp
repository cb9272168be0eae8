#include "weakcat/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <thread>

#include "weakcat/errors.hpp"

namespace weakcat {

void RetrievalIndex::insert(std::string item_id, std::string record_id,
                            std::vector<double> embedding) {
    if (dim_ == 0) dim_ = static_cast<std::uint32_t>(embedding.size());
    if (embedding.size() != dim_)
        throw DimensionMismatch("embedding length does not match index");
    double norm_sq = 0.0;
    for (double v : embedding) norm_sq += v * v;
    if (norm_sq == 0.0)
        throw ZeroEmbedding("zero embedding for record " + record_id);
    double norm = std::sqrt(norm_sq);
    for (auto& v : embedding) v /= norm;
    rows_.push_back({std::move(item_id), std::move(record_id), std::move(embedding)});
}

RetrievalIndex build_index(const EmbeddingModel& model,
                           const std::vector<TrainingSample>& gallery) {
    RetrievalIndex index(model.word_matrix.dim);
    for (const auto& sample : gallery)
        index.insert(sample.item_id, sample.record_id, extract(model, sample.input));
    return index;
}

namespace {

// full ranking, ties broken by insertion position; skip_record may be empty
std::vector<Hit> ranked(const RetrievalIndex& index, std::span<const double> embedding,
                        const std::string& skip_record) {
    std::vector<Hit> hits;
    hits.reserve(index.size());
    for (std::size_t r = 0; r < index.size(); ++r) {
        const auto& row = index.rows()[r];
        if (!skip_record.empty() && row.record_id == skip_record) continue;
        double sim = 0.0;
        for (std::size_t i = 0; i < embedding.size(); ++i)
            sim += embedding[i] * row.embedding[i];
        hits.push_back({r, sim});
    }
    std::stable_sort(hits.begin(), hits.end(),
                     [](const Hit& a, const Hit& b) { return a.similarity > b.similarity; });
    return hits;
}

} // namespace

std::vector<Hit> query(const RetrievalIndex& index, std::span<const double> embedding,
                       std::size_t k) {
    if (embedding.size() != index.dim())
        throw DimensionMismatch("query embedding length does not match index");
    auto hits = ranked(index, embedding, {});
    if (hits.size() > k) hits.resize(k);
    return hits;
}

std::size_t worker_threads() {
    std::size_t n = std::thread::hardware_concurrency();
    if (n == 0) n = 1;
    if (const char* env = std::getenv("WEAKCAT_THREADS")) {
        char* end = nullptr;
        long cap = std::strtol(env, &end, 10);
        if (end != env && cap >= 1 && static_cast<std::size_t>(cap) < n)
            n = static_cast<std::size_t>(cap);
    }
    return n;
}

std::map<std::size_t, double> topk_accuracy(const RetrievalIndex& index,
                                            const EmbeddingModel& model,
                                            const std::vector<RetrievalQuery>& queries,
                                            const std::vector<std::size_t>& ks,
                                            bool exclude_self) {
    std::size_t max_k = 0;
    for (auto k : ks) max_k = std::max(max_k, k);

    // per query and per k: 1 if a same-item row appears in the top k
    std::vector<std::vector<char>> score(queries.size(), std::vector<char>(ks.size(), 0));
    auto evaluate = [&](std::size_t q) {
        const auto& query_rec = queries[q];
        auto z = extract(model, query_rec.sample.input);
        double norm_sq = 0.0;
        for (double v : z) norm_sq += v * v;
        if (norm_sq == 0.0) throw ZeroEmbedding("zero query embedding");
        double inv = 1.0 / std::sqrt(norm_sq);
        for (auto& v : z) v *= inv;

        auto hits = ranked(index, z, exclude_self ? query_rec.sample.record_id : "");
        std::size_t first_match = hits.size();
        for (std::size_t r = 0; r < hits.size() && r < max_k; ++r) {
            if (index.rows()[hits[r].row].item_id == query_rec.item_id) {
                first_match = r;
                break;
            }
        }
        for (std::size_t ki = 0; ki < ks.size(); ++ki)
            score[q][ki] = first_match < ks[ki] ? 1 : 0;
    };

    std::size_t n_workers = std::min(worker_threads(), std::max<std::size_t>(queries.size(), 1));
    if (n_workers <= 1) {
        for (std::size_t q = 0; q < queries.size(); ++q) evaluate(q);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < n_workers; ++w)
            pool.emplace_back([&, w] {
                for (std::size_t q = w; q < queries.size(); q += n_workers) evaluate(q);
            });
        for (auto& t : pool) t.join();
    }

    std::map<std::size_t, double> out;
    for (std::size_t ki = 0; ki < ks.size(); ++ki) {
        double sum = 0.0;
        for (std::size_t q = 0; q < queries.size(); ++q) sum += score[q][ki];
        out[ks[ki]] = sum / static_cast<double>(queries.size());
    }
    return out;
}

void RetrievalIndex::save(const std::string& path) const {
    BinWriter w(path);
    w.bytes("WIDX", 4);
    w.u16(1);
    w.u32(dim_);
    w.u64(rows_.size());
    for (const auto& row : rows_) {
        w.str16(row.item_id);
        w.str16(row.record_id);
        for (double v : row.embedding) w.f64(v);
    }
    w.close();
}

RetrievalIndex RetrievalIndex::load(const std::string& path) {
    BinReader r(path);
    char magic[4];
    r.bytes(magic, 4);
    if (std::memcmp(magic, "WIDX", 4) != 0)
        throw CorruptFile("not a weakcat index: " + path);
    if (r.u16() != 1) throw CorruptFile("unsupported index version: " + path);
    RetrievalIndex index(r.u32());
    std::uint64_t n = r.u64();
    for (std::uint64_t i = 0; i < n; ++i) {
        IndexRow row;
        row.item_id = r.str16();
        row.record_id = r.str16();
        row.embedding.resize(index.dim_);
        for (auto& v : row.embedding) v = r.f64();
        index.rows_.push_back(std::move(row));
    }
    return index;
}

} // namespace weakcat
