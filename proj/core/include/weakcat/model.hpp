#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "weakcat/io.hpp"
#include "weakcat/rng.hpp"

namespace weakcat {

enum class ExtractorKind : std::uint8_t { precomputed = 0, linear = 1, mlp = 2 };

ExtractorKind extractor_kind_from_string(const std::string& s);
std::string to_string(ExtractorKind kind);

struct ExtractorArch {
    ExtractorKind kind = ExtractorKind::precomputed;
    std::uint32_t input_dim = 0;  // ignored for precomputed
    std::uint32_t output_dim = 0; // I
    std::vector<std::uint32_t> hidden; // mlp only
};

// pluggable f(x, theta); precomputed is the identity on stored features
class FeatureExtractor {
public:
    FeatureExtractor() = default;
    explicit FeatureExtractor(ExtractorArch arch);
    static FeatureExtractor random_init(ExtractorArch arch, Rng& rng);

    const ExtractorArch& arch() const { return arch_; }
    std::uint32_t output_dim() const { return arch_.output_dim; }
    std::size_t param_count() const { return params_.size(); }
    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }

    std::vector<double> forward(std::span<const float> input) const;

    // activations cached for backprop; acts[0] is the input, acts[l] the
    // post-activation output of layer l
    struct Trace {
        std::vector<std::vector<double>> acts;
    };
    std::vector<double> forward_trace(std::span<const float> input, Trace& trace) const;
    // accumulates d(loss)/d(theta) into dparams given d(loss)/dz
    void backward(const Trace& trace, std::span<const double> dz,
                  std::vector<double>& dparams) const;

private:
    struct Layer {
        std::uint32_t in, out;
        bool relu;
        std::size_t offset; // into params_: weights (out x in, row-major) then bias
    };
    ExtractorArch arch_;
    std::vector<Layer> layers_;
    std::vector<double> params_;
};

struct WordEmbeddingMatrix {
    std::uint32_t dim = 0;   // I
    std::uint32_t vocab = 0; // K
    std::vector<double> data; // column-major, column k = embedding of word k

    WordEmbeddingMatrix() = default;
    WordEmbeddingMatrix(std::uint32_t dim, std::uint32_t vocab)
        : dim(dim), vocab(vocab), data(std::size_t(dim) * vocab, 0.0) {}
    static WordEmbeddingMatrix random_init(std::uint32_t dim, std::uint32_t vocab, Rng& rng);

    double* col(std::uint32_t k) { return data.data() + std::size_t(k) * dim; }
    const double* col(std::uint32_t k) const { return data.data() + std::size_t(k) * dim; }
};

struct EmbeddingModel {
    FeatureExtractor extractor;
    WordEmbeddingMatrix word_matrix;
    Fingerprint vocab_fingerprint{};
};

std::vector<double> extract(const EmbeddingModel& model, std::span<const float> input);

// logits restricted to the candidate words: logit_j = w_{cand[j]} . z
std::vector<double> scores(std::span<const double> z,
                           std::span<const std::uint32_t> candidates,
                           const WordEmbeddingMatrix& w);

// max-subtracted, sums to 1
std::vector<double> softmax(std::span<const double> logits);

// -log softmax(scores)[positive_slot], per sample
double sampled_loss(std::span<const double> z, std::size_t positive_slot,
                    std::span<const std::uint32_t> candidates,
                    const WordEmbeddingMatrix& w);

struct SampledGradients {
    // w_cols[j] is the gradient of column candidates[j]
    std::vector<std::vector<double>> w_cols;
    std::vector<double> z_grad;
    double loss = 0.0;
};

SampledGradients sampled_gradients(std::span<const double> z, std::size_t positive_slot,
                                   std::span<const std::uint32_t> candidates,
                                   const WordEmbeddingMatrix& w);

struct ModelGradients {
    SampledGradients sampled;
    std::vector<double> theta_grad; // empty for precomputed
};

ModelGradients compute_gradients(const EmbeddingModel& model,
                                 std::span<const float> input,
                                 std::size_t positive_slot,
                                 std::span<const std::uint32_t> candidates);

// checkpoint format "WMDL": f64 parameters, round-trips bit-exactly
void save_checkpoint(const EmbeddingModel& model, const std::string& path);
EmbeddingModel load_checkpoint(const std::string& path,
                               const Fingerprint* expected_vocab = nullptr);

} // namespace weakcat
