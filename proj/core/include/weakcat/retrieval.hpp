#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "weakcat/model.hpp"
#include "weakcat/corpus.hpp"

namespace weakcat {

struct IndexRow {
    std::string item_id;
    std::string record_id;
    std::vector<double> embedding; // unit norm
};

// gallery of L2-normalized embeddings; immutable after build
class RetrievalIndex {
public:
    RetrievalIndex() = default;
    explicit RetrievalIndex(std::uint32_t dim) : dim_(dim) {}

    std::uint32_t dim() const { return dim_; }
    std::size_t size() const { return rows_.size(); }
    const std::vector<IndexRow>& rows() const { return rows_; }

    // rejects zero vectors, normalizes everything else
    void insert(std::string item_id, std::string record_id, std::vector<double> embedding);

    void save(const std::string& path) const;
    static RetrievalIndex load(const std::string& path);

private:
    std::uint32_t dim_ = 0;
    std::vector<IndexRow> rows_;
};

RetrievalIndex build_index(const EmbeddingModel& model,
                           const std::vector<TrainingSample>& gallery);

struct Hit {
    std::size_t row;
    double similarity;
};

// exact top-k by cosine; ties broken by insertion position
std::vector<Hit> query(const RetrievalIndex& index, std::span<const double> embedding,
                       std::size_t k);

struct RetrievalQuery {
    TrainingSample sample;
    std::string item_id;
};

// fraction of queries with a same-item gallery row among the top k
std::map<std::size_t, double> topk_accuracy(const RetrievalIndex& index,
                                            const EmbeddingModel& model,
                                            const std::vector<RetrievalQuery>& queries,
                                            const std::vector<std::size_t>& ks,
                                            bool exclude_self);

// worker cap from WEAKCAT_THREADS (>= 1)
std::size_t worker_threads();

} // namespace weakcat
