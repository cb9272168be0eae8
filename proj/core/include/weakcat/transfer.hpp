#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "weakcat/rng.hpp"

namespace weakcat {

// frozen embeddings with either class indices or a binary attribute matrix
struct ProbeDataset {
    std::size_t n = 0;
    std::size_t dim = 0;
    std::vector<double> features; // n x dim, row-major

    std::vector<std::uint32_t> classes; // multi-class targets, size n
    std::size_t n_classes = 0;

    std::vector<std::uint8_t> attributes; // multi-label targets, n x n_attrs
    std::size_t n_attrs = 0;

    bool multilabel() const { return n_attrs > 0; }
    std::span<const double> row(std::size_t i) const {
        return {features.data() + i * dim, dim};
    }
};

enum class ProbeHead : std::uint8_t { softmax_head, sigmoid_head };

struct LinearProbe {
    ProbeHead head = ProbeHead::softmax_head;
    std::size_t in_dim = 0, out_dim = 0;
    std::vector<double> weights; // out x in, row-major
    std::vector<double> bias;

    std::vector<double> logits(std::span<const double> x) const;
};

struct ProbeConfig {
    double lr = 0.01;
    std::size_t batch_size = 32;
    int epochs = 200;
    std::uint64_t seed = 0;
};

struct ProbeTraining {
    LinearProbe probe;
    std::vector<double> epoch_losses;
};

ProbeTraining train_probe(const ProbeDataset& data, ProbeHead head,
                          const ProbeConfig& config);

// loss and gradient of one mini-batch; exposed for gradient checking
double probe_loss(const LinearProbe& probe, const ProbeDataset& data,
                  std::span<const std::size_t> batch);
void probe_gradients(const LinearProbe& probe, const ProbeDataset& data,
                     std::span<const std::size_t> batch,
                     std::vector<double>& dweights, std::vector<double>& dbias);

std::map<std::size_t, double> topk_class_accuracy(const LinearProbe& probe,
                                                  const ProbeDataset& data,
                                                  const std::vector<std::size_t>& ks);

// groups[a] names attribute a's group; empty vector pools everything into ""
std::map<std::string, std::map<std::size_t, double>> topk_attribute_recall(
    const LinearProbe& probe, const ProbeDataset& data,
    const std::vector<std::size_t>& ks, const std::vector<std::string>& groups,
    bool count_empty_as_zero = false);

// Mann-Whitney with average-rank tie handling, O(n log n)
double roc_auc(std::span<const double> scores, std::span<const std::uint8_t> labels);

// one-vs-rest AUC per class on the probe's class scores
std::vector<double> per_class_auc(const LinearProbe& probe, const ProbeDataset& data);

} // namespace weakcat
