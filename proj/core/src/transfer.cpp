#include "weakcat/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "weakcat/errors.hpp"

namespace weakcat {

std::vector<double> LinearProbe::logits(std::span<const double> x) const {
    if (x.size() != in_dim) throw DimensionMismatch("probe input length mismatch");
    std::vector<double> out(out_dim);
    for (std::size_t o = 0; o < out_dim; ++o) {
        const double* row = weights.data() + o * in_dim;
        double acc = bias[o];
        for (std::size_t i = 0; i < in_dim; ++i) acc += row[i] * x[i];
        out[o] = acc;
    }
    return out;
}

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// numerically stable BCE on a logit
double bce_logit(double logit, double y) {
    // log(1+e^x) computed without overflow
    double softplus = logit > 0 ? logit + std::log1p(std::exp(-logit))
                                : std::log1p(std::exp(logit));
    return softplus - y * logit;
}

double stable_log_sum_exp(const std::vector<double>& v) {
    double m = *std::max_element(v.begin(), v.end());
    double s = 0.0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s);
}

} // namespace

double probe_loss(const LinearProbe& probe, const ProbeDataset& data,
                  std::span<const std::size_t> batch) {
    double total = 0.0;
    for (auto idx : batch) {
        auto logits = probe.logits(data.row(idx));
        if (probe.head == ProbeHead::softmax_head) {
            total += stable_log_sum_exp(logits) - logits[data.classes[idx]];
        } else {
            double sample_loss = 0.0;
            const std::uint8_t* y = data.attributes.data() + idx * data.n_attrs;
            for (std::size_t a = 0; a < data.n_attrs; ++a)
                sample_loss += bce_logit(logits[a], y[a]);
            total += sample_loss / static_cast<double>(data.n_attrs);
        }
    }
    return total / static_cast<double>(batch.size());
}

void probe_gradients(const LinearProbe& probe, const ProbeDataset& data,
                     std::span<const std::size_t> batch,
                     std::vector<double>& dweights, std::vector<double>& dbias) {
    dweights.assign(probe.weights.size(), 0.0);
    dbias.assign(probe.bias.size(), 0.0);
    for (auto idx : batch) {
        auto logits = probe.logits(data.row(idx));
        auto x = data.row(idx);
        std::vector<double> dlogit(probe.out_dim);
        if (probe.head == ProbeHead::softmax_head) {
            double lse = stable_log_sum_exp(logits);
            for (std::size_t o = 0; o < probe.out_dim; ++o)
                dlogit[o] = std::exp(logits[o] - lse);
            dlogit[data.classes[idx]] -= 1.0;
        } else {
            const std::uint8_t* y = data.attributes.data() + idx * data.n_attrs;
            for (std::size_t a = 0; a < data.n_attrs; ++a)
                dlogit[a] = (sigmoid(logits[a]) - y[a]) / static_cast<double>(data.n_attrs);
        }
        for (std::size_t o = 0; o < probe.out_dim; ++o) {
            double* row = dweights.data() + o * probe.in_dim;
            for (std::size_t i = 0; i < probe.in_dim; ++i) row[i] += dlogit[o] * x[i];
            dbias[o] += dlogit[o];
        }
    }
    double inv = 1.0 / static_cast<double>(batch.size());
    for (auto& v : dweights) v *= inv;
    for (auto& v : dbias) v *= inv;
}

ProbeTraining train_probe(const ProbeDataset& data, ProbeHead head,
                          const ProbeConfig& config) {
    if (data.n < 1) throw Error("empty probe dataset");
    ProbeTraining result;
    auto& probe = result.probe;
    probe.head = head;
    probe.in_dim = data.dim;
    probe.out_dim = head == ProbeHead::softmax_head ? data.n_classes : data.n_attrs;
    if (probe.out_dim == 0) throw Error("probe head does not match dataset targets");

    Rng rng(Rng::derive(config.seed, 0x50524f42)); // "PROB"
    double bound = 1.0 / std::sqrt(static_cast<double>(data.dim));
    probe.weights.resize(probe.out_dim * probe.in_dim);
    for (auto& v : probe.weights) v = rng.uniform_range(-bound, bound);
    probe.bias.assign(probe.out_dim, 0.0);

    std::vector<std::size_t> perm(data.n);
    std::iota(perm.begin(), perm.end(), 0u);
    std::vector<double> dw, db;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(perm);
        double epoch_loss = 0.0;
        std::size_t n_batches = 0;
        for (std::size_t start = 0; start < data.n; start += config.batch_size) {
            std::size_t len = std::min(config.batch_size, data.n - start);
            std::span<const std::size_t> batch(perm.data() + start, len);
            double loss = probe_loss(probe, data, batch);
            if (!std::isfinite(loss)) throw NonFiniteLoss("non-finite probe loss");
            epoch_loss += loss;
            ++n_batches;
            probe_gradients(probe, data, batch, dw, db);
            for (std::size_t i = 0; i < probe.weights.size(); ++i)
                probe.weights[i] -= config.lr * dw[i];
            for (std::size_t i = 0; i < probe.bias.size(); ++i)
                probe.bias[i] -= config.lr * db[i];
        }
        result.epoch_losses.push_back(epoch_loss / static_cast<double>(n_batches));
    }
    return result;
}

namespace {

// indices of the k largest scores, ties toward lower index
std::vector<std::size_t> topk_indices(const std::vector<double>& scores,
                                      const std::vector<std::size_t>& pool,
                                      std::size_t k) {
    std::vector<std::size_t> order = pool;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scores[a] > scores[b];
    });
    if (order.size() > k) order.resize(k);
    return order;
}

} // namespace

std::map<std::size_t, double> topk_class_accuracy(const LinearProbe& probe,
                                                  const ProbeDataset& data,
                                                  const std::vector<std::size_t>& ks) {
    std::vector<std::size_t> all(probe.out_dim);
    std::iota(all.begin(), all.end(), 0u);
    std::map<std::size_t, double> acc;
    for (auto k : ks) acc[k] = 0.0;
    for (std::size_t i = 0; i < data.n; ++i) {
        auto logits = probe.logits(data.row(i));
        // rank of the true class under (score desc, index asc)
        std::size_t truth = data.classes[i];
        std::size_t rank = 0;
        for (std::size_t c = 0; c < logits.size(); ++c) {
            if (c == truth) continue;
            if (logits[c] > logits[truth] || (logits[c] == logits[truth] && c < truth))
                ++rank;
        }
        for (auto k : ks)
            if (rank < k) acc[k] += 1.0;
    }
    for (auto& [k, v] : acc) v /= static_cast<double>(data.n);
    return acc;
}

std::map<std::string, std::map<std::size_t, double>> topk_attribute_recall(
    const LinearProbe& probe, const ProbeDataset& data,
    const std::vector<std::size_t>& ks, const std::vector<std::string>& groups,
    bool count_empty_as_zero) {
    std::map<std::string, std::vector<std::size_t>> group_attrs;
    if (groups.empty()) {
        auto& pooled = group_attrs[""];
        for (std::size_t a = 0; a < data.n_attrs; ++a) pooled.push_back(a);
    } else {
        if (groups.size() != data.n_attrs)
            throw Error("group map size does not match attribute count");
        for (std::size_t a = 0; a < data.n_attrs; ++a)
            group_attrs[groups[a]].push_back(a);
    }

    std::map<std::string, std::map<std::size_t, double>> out;
    for (const auto& [name, attrs] : group_attrs) {
        std::map<std::size_t, double> recall;
        std::map<std::size_t, std::size_t> counted;
        for (auto k : ks) recall[k] = 0.0;
        for (std::size_t i = 0; i < data.n; ++i) {
            const std::uint8_t* y = data.attributes.data() + i * data.n_attrs;
            std::set<std::size_t> truth;
            for (auto a : attrs)
                if (y[a]) truth.insert(a);
            if (truth.empty() && !count_empty_as_zero) continue;
            auto logits = probe.logits(data.row(i));
            for (auto k : ks) {
                ++counted[k];
                if (truth.empty()) continue;
                auto top = topk_indices(logits, attrs, k);
                std::size_t found = 0;
                for (auto a : top)
                    if (truth.count(a)) ++found;
                recall[k] += static_cast<double>(found) / static_cast<double>(truth.size());
            }
        }
        for (auto& [k, v] : recall)
            if (counted[k]) v /= static_cast<double>(counted[k]);
        out[name] = std::move(recall);
    }
    return out;
}

double roc_auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
    if (scores.size() != labels.size()) throw DimensionMismatch("scores/labels mismatch");
    std::size_t n_pos = 0;
    for (auto y : labels) n_pos += y ? 1 : 0;
    std::size_t n_neg = scores.size() - n_pos;
    if (n_pos == 0 || n_neg == 0)
        throw DegenerateLabels("AUC needs at least one positive and one negative");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scores[a] < scores[b];
    });

    // average ranks within tie blocks, 1-based
    double pos_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        double avg_rank = 0.5 * static_cast<double>(i + 1 + j); // mean of i+1..j
        for (std::size_t t = i; t < j; ++t)
            if (labels[order[t]]) pos_rank_sum += avg_rank;
        i = j;
    }
    double u = pos_rank_sum - 0.5 * static_cast<double>(n_pos) * (n_pos + 1);
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

std::vector<double> per_class_auc(const LinearProbe& probe, const ProbeDataset& data) {
    std::vector<std::vector<double>> class_scores(probe.out_dim,
                                                  std::vector<double>(data.n));
    for (std::size_t i = 0; i < data.n; ++i) {
        auto logits = probe.logits(data.row(i));
        for (std::size_t c = 0; c < probe.out_dim; ++c) class_scores[c][i] = logits[c];
    }
    std::vector<double> out(probe.out_dim);
    std::vector<std::uint8_t> binary(data.n);
    for (std::size_t c = 0; c < probe.out_dim; ++c) {
        if (data.multilabel()) {
            for (std::size_t i = 0; i < data.n; ++i)
                binary[i] = data.attributes[i * data.n_attrs + c];
        } else {
            for (std::size_t i = 0; i < data.n; ++i)
                binary[i] = data.classes[i] == c ? 1 : 0;
        }
        out[c] = roc_auc(class_scores[c], binary);
    }
    return out;
}

} // namespace weakcat
