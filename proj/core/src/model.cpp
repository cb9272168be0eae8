#include "weakcat/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "weakcat/errors.hpp"

namespace weakcat {

ExtractorKind extractor_kind_from_string(const std::string& s) {
    if (s == "precomputed") return ExtractorKind::precomputed;
    if (s == "linear") return ExtractorKind::linear;
    if (s == "mlp") return ExtractorKind::mlp;
    throw Error("unknown extractor kind: " + s);
}

std::string to_string(ExtractorKind kind) {
    switch (kind) {
        case ExtractorKind::precomputed: return "precomputed";
        case ExtractorKind::linear: return "linear";
        case ExtractorKind::mlp: return "mlp";
    }
    throw Error("bad extractor kind");
}

FeatureExtractor::FeatureExtractor(ExtractorArch arch) : arch_(std::move(arch)) {
    if (arch_.output_dim == 0) throw DimensionMismatch("extractor output_dim must be > 0");
    if (arch_.kind == ExtractorKind::precomputed) return;
    if (arch_.input_dim == 0) throw DimensionMismatch("extractor input_dim must be > 0");

    std::vector<std::uint32_t> dims;
    dims.push_back(arch_.input_dim);
    if (arch_.kind == ExtractorKind::mlp)
        for (auto h : arch_.hidden) dims.push_back(h);
    dims.push_back(arch_.output_dim);

    std::size_t offset = 0;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        bool relu = l + 2 < dims.size(); // no activation on the final affine
        layers_.push_back({dims[l], dims[l + 1], relu, offset});
        offset += std::size_t(dims[l]) * dims[l + 1] + dims[l + 1];
    }
    params_.assign(offset, 0.0);
}

FeatureExtractor FeatureExtractor::random_init(ExtractorArch arch, Rng& rng) {
    FeatureExtractor fe(std::move(arch));
    for (const auto& layer : fe.layers_) {
        double bound = 1.0 / std::sqrt(static_cast<double>(layer.in));
        std::size_t n = std::size_t(layer.in) * layer.out + layer.out;
        for (std::size_t i = 0; i < n; ++i)
            fe.params_[layer.offset + i] = rng.uniform_range(-bound, bound);
    }
    return fe;
}

std::vector<double> FeatureExtractor::forward(std::span<const float> input) const {
    Trace trace;
    return forward_trace(input, trace);
}

std::vector<double> FeatureExtractor::forward_trace(std::span<const float> input,
                                                    Trace& trace) const {
    trace.acts.clear();
    std::vector<double> x(input.begin(), input.end());
    if (arch_.kind == ExtractorKind::precomputed) {
        if (x.size() != arch_.output_dim)
            throw DimensionMismatch("precomputed feature length does not match model");
        trace.acts.push_back(x);
        return x;
    }
    if (x.size() != arch_.input_dim)
        throw DimensionMismatch("input length does not match extractor");
    trace.acts.push_back(x);
    for (const auto& layer : layers_) {
        std::vector<double> y(layer.out);
        const double* w = params_.data() + layer.offset;
        const double* b = w + std::size_t(layer.in) * layer.out;
        for (std::uint32_t o = 0; o < layer.out; ++o) {
            double acc = b[o];
            const double* row = w + std::size_t(o) * layer.in;
            for (std::uint32_t i = 0; i < layer.in; ++i) acc += row[i] * x[i];
            y[o] = layer.relu ? std::max(acc, 0.0) : acc;
        }
        trace.acts.push_back(y);
        x = std::move(y);
    }
    return x;
}

void FeatureExtractor::backward(const Trace& trace, std::span<const double> dz,
                                std::vector<double>& dparams) const {
    if (arch_.kind == ExtractorKind::precomputed) return;
    if (dparams.size() != params_.size()) dparams.assign(params_.size(), 0.0);

    std::vector<double> delta(dz.begin(), dz.end());
    for (std::size_t l = layers_.size(); l-- > 0;) {
        const auto& layer = layers_[l];
        const auto& out = trace.acts[l + 1];
        const auto& in = trace.acts[l];
        if (layer.relu)
            for (std::uint32_t o = 0; o < layer.out; ++o)
                if (out[o] <= 0.0) delta[o] = 0.0;

        double* dw = dparams.data() + layer.offset;
        double* db = dw + std::size_t(layer.in) * layer.out;
        const double* w = params_.data() + layer.offset;
        std::vector<double> din(layer.in, 0.0);
        for (std::uint32_t o = 0; o < layer.out; ++o) {
            double* dwr = dw + std::size_t(o) * layer.in;
            const double* wr = w + std::size_t(o) * layer.in;
            for (std::uint32_t i = 0; i < layer.in; ++i) {
                dwr[i] += delta[o] * in[i];
                din[i] += delta[o] * wr[i];
            }
            db[o] += delta[o];
        }
        delta = std::move(din);
    }
}

WordEmbeddingMatrix WordEmbeddingMatrix::random_init(std::uint32_t dim, std::uint32_t vocab,
                                                     Rng& rng) {
    WordEmbeddingMatrix w(dim, vocab);
    double bound = 1.0 / std::sqrt(static_cast<double>(dim));
    for (auto& v : w.data) v = rng.uniform_range(-bound, bound);
    return w;
}

std::vector<double> extract(const EmbeddingModel& model, std::span<const float> input) {
    auto z = model.extractor.forward(input);
    for (double v : z)
        if (!std::isfinite(v)) throw NonFiniteLoss("non-finite extractor output");
    return z;
}

std::vector<double> scores(std::span<const double> z,
                           std::span<const std::uint32_t> candidates,
                           const WordEmbeddingMatrix& w) {
    if (z.size() != w.dim) throw DimensionMismatch("z length does not match embedding dim");
    std::vector<double> out(candidates.size());
    for (std::size_t j = 0; j < candidates.size(); ++j) {
        if (candidates[j] >= w.vocab) throw IndexOutOfRange("candidate word out of range");
        const double* col = w.col(candidates[j]);
        double acc = 0.0;
        for (std::size_t i = 0; i < z.size(); ++i) acc += col[i] * z[i];
        out[j] = acc;
    }
    return out;
}

std::vector<double> softmax(std::span<const double> logits) {
    double m = logits[0];
    for (double v : logits) m = std::max(m, v);
    std::vector<double> p(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - m);
        sum += p[i];
    }
    for (auto& v : p) v /= sum;
    return p;
}

double sampled_loss(std::span<const double> z, std::size_t positive_slot,
                    std::span<const std::uint32_t> candidates,
                    const WordEmbeddingMatrix& w) {
    auto logits = scores(z, candidates, w);
    double m = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double v : logits) sum += std::exp(v - m);
    return std::log(sum) - (logits[positive_slot] - m);
}

SampledGradients sampled_gradients(std::span<const double> z, std::size_t positive_slot,
                                   std::span<const std::uint32_t> candidates,
                                   const WordEmbeddingMatrix& w) {
    auto logits = scores(z, candidates, w);
    auto p = softmax(logits);

    SampledGradients g;
    g.loss = -std::log(p[positive_slot]);
    g.w_cols.resize(candidates.size());
    g.z_grad.assign(z.size(), 0.0);
    for (std::size_t j = 0; j < candidates.size(); ++j) {
        double coeff = p[j] - (j == positive_slot ? 1.0 : 0.0);
        auto& col_grad = g.w_cols[j];
        col_grad.resize(z.size());
        const double* col = w.col(candidates[j]);
        for (std::size_t i = 0; i < z.size(); ++i) {
            col_grad[i] = coeff * z[i];
            g.z_grad[i] += coeff * col[i];
        }
    }
    return g;
}

ModelGradients compute_gradients(const EmbeddingModel& model,
                                 std::span<const float> input,
                                 std::size_t positive_slot,
                                 std::span<const std::uint32_t> candidates) {
    FeatureExtractor::Trace trace;
    auto z = model.extractor.forward_trace(input, trace);
    ModelGradients g;
    g.sampled = sampled_gradients(z, positive_slot, candidates, model.word_matrix);
    g.theta_grad.assign(model.extractor.param_count(), 0.0);
    model.extractor.backward(trace, g.sampled.z_grad, g.theta_grad);
    return g;
}

void save_checkpoint(const EmbeddingModel& model, const std::string& path) {
    BinWriter w(path);
    w.bytes("WMDL", 4);
    w.u16(1);
    w.u32(model.word_matrix.dim);
    w.u32(model.word_matrix.vocab);
    const auto& arch = model.extractor.arch();
    w.u8(static_cast<std::uint8_t>(arch.kind));
    w.u32(arch.input_dim);
    w.u16(static_cast<std::uint16_t>(arch.hidden.size()));
    for (auto h : arch.hidden) w.u32(h);
    w.bytes(model.vocab_fingerprint.data(), model.vocab_fingerprint.size());
    w.u64(model.extractor.param_count());
    for (double v : model.extractor.params()) w.f64(v);
    for (double v : model.word_matrix.data) w.f64(v);
    w.close();
}

EmbeddingModel load_checkpoint(const std::string& path, const Fingerprint* expected_vocab) {
    try {
        BinReader r(path);
        char magic[4];
        r.bytes(magic, 4);
        if (std::memcmp(magic, "WMDL", 4) != 0)
            throw CorruptCheckpoint("not a weakcat checkpoint: " + path);
        if (r.u16() != 1) throw CorruptCheckpoint("unsupported checkpoint version: " + path);
        std::uint32_t dim = r.u32();
        std::uint32_t vocab = r.u32();

        ExtractorArch arch;
        arch.kind = static_cast<ExtractorKind>(r.u8());
        if (arch.kind != ExtractorKind::precomputed && arch.kind != ExtractorKind::linear &&
            arch.kind != ExtractorKind::mlp)
            throw CorruptCheckpoint("bad extractor kind: " + path);
        arch.input_dim = r.u32();
        arch.output_dim = dim;
        std::uint16_t nh = r.u16();
        arch.hidden.resize(nh);
        for (auto& h : arch.hidden) h = r.u32();

        EmbeddingModel model;
        r.bytes(model.vocab_fingerprint.data(), model.vocab_fingerprint.size());
        if (expected_vocab && *expected_vocab != model.vocab_fingerprint)
            throw VocabMismatch("checkpoint was trained on a different vocabulary: " + path);

        model.extractor = FeatureExtractor(arch);
        std::uint64_t np = r.u64();
        if (np != model.extractor.param_count())
            throw CorruptCheckpoint("parameter count mismatch: " + path);
        for (auto& v : model.extractor.params()) v = r.f64();
        model.word_matrix = WordEmbeddingMatrix(dim, vocab);
        for (auto& v : model.word_matrix.data) v = r.f64();
        return model;
    } catch (const CorruptFile& e) {
        throw CorruptCheckpoint(e.what());
    }
}

} // namespace weakcat
