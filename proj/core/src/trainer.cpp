#include "weakcat/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>

#include <json.hpp>

#include "weakcat/errors.hpp"

namespace weakcat {

std::string to_string(Phase phase) {
    return phase == Phase::head_only ? "head_only" : "fine_tune";
}

double run_epoch(EmbeddingModel& model, const InvertedIndex& index,
                 const std::vector<TrainingSample>& samples, const TrainConfig& config,
                 const SamplerConfig& sampler_config, Phase phase, Rng& rng) {
    const std::size_t n = samples.size();
    const std::size_t k = model.word_matrix.vocab;
    const std::size_t draws = static_cast<std::size_t>(
        std::ceil(static_cast<double>(n) * config.epoch_fraction));
    const std::size_t steps = (std::max<std::size_t>(draws, 1) + config.batch_size - 1) /
                              config.batch_size;
    const bool train_theta =
        phase == Phase::fine_tune && model.extractor.param_count() > 0;

    double total_loss = 0.0;
    std::size_t total_pairs = 0;
    std::vector<std::uint32_t> candidates(1 + sampler_config.n_negatives);
    std::vector<double> theta_grad;
    FeatureExtractor::Trace trace;

    for (std::size_t step = 0; step < steps; ++step) {
        std::map<std::uint32_t, std::vector<double>> w_grad;
        if (train_theta) theta_grad.assign(model.extractor.param_count(), 0.0);

        for (std::size_t b = 0; b < config.batch_size; ++b) {
            auto pair = sample_pair(index, rng);
            const auto& sample = samples[pair.sample_position];
            auto negatives = sample_negatives(pair.word, sample.labels, sampler_config,
                                              k, rng);
            candidates[0] = pair.word;
            std::copy(negatives.begin(), negatives.end(), candidates.begin() + 1);

            auto z = model.extractor.forward_trace(sample.input, trace);
            auto g = sampled_gradients(z, 0, candidates, model.word_matrix);
            if (!std::isfinite(g.loss))
                throw NonFiniteLoss("non-finite loss at step " + std::to_string(step) +
                                    ", word " + std::to_string(pair.word) + ", record " +
                                    sample.record_id);
            total_loss += g.loss;
            ++total_pairs;

            for (std::size_t j = 0; j < candidates.size(); ++j) {
                auto [it, fresh] = w_grad.try_emplace(candidates[j]);
                if (fresh) it->second.assign(model.word_matrix.dim, 0.0);
                for (std::size_t i = 0; i < it->second.size(); ++i)
                    it->second[i] += g.w_cols[j][i];
            }
            if (train_theta) model.extractor.backward(trace, g.z_grad, theta_grad);
        }

        const double scale = config.initial_lr / static_cast<double>(config.batch_size);
        for (const auto& [word, grad] : w_grad) {
            double* col = model.word_matrix.col(word);
            for (std::size_t i = 0; i < grad.size(); ++i) col[i] -= scale * grad[i];
        }
        if (train_theta) {
            auto& params = model.extractor.params();
            for (std::size_t i = 0; i < params.size(); ++i)
                params[i] -= scale * theta_grad[i];
        }
    }
    return total_loss / static_cast<double>(total_pairs);
}

double validate(const EmbeddingModel& model, const std::vector<TrainingSample>& valid,
                const SamplerConfig& sampler_config) {
    const std::size_t k = model.word_matrix.vocab;
    const bool full = k <= 512;
    Rng rng(Rng::derive(sampler_config.seed, 0x56414c49)); // fixed per call

    std::vector<std::uint32_t> all(k);
    if (full) std::iota(all.begin(), all.end(), 0u);

    double total = 0.0;
    std::size_t terms = 0;
    std::vector<std::uint32_t> candidates;
    for (const auto& sample : valid) {
        auto z = model.extractor.forward(sample.input);
        for (auto label : sample.labels) {
            double loss;
            if (full) {
                loss = sampled_loss(z, label, all, model.word_matrix);
            } else {
                auto negatives =
                    sample_negatives(label, sample.labels, sampler_config, k, rng);
                candidates.assign(1, label);
                candidates.insert(candidates.end(), negatives.begin(), negatives.end());
                loss = sampled_loss(z, 0, candidates, model.word_matrix);
            }
            total += loss;
            ++terms;
        }
    }
    return total / static_cast<double>(terms);
}

TrainLog fit(const std::vector<TrainingSample>& train,
             const std::vector<TrainingSample>& valid, EmbeddingModel& model,
             const TrainConfig& config, const SamplerConfig& sampler_config,
             bool verbose, int first_epoch) {
    auto index = build_inverted_index(train, model.word_matrix.vocab);
    Rng rng(Rng::derive(config.seed, 0x5452414e)); // "TRAN"

    TrainLog log;
    log.initial_validation = validate(model, valid, sampler_config);
    if (verbose)
        std::printf("epoch %4d  phase %-9s  lr %-8g  valid %.6f (initial)\n", first_epoch - 1,
                    "-", 0.0, log.initial_validation);

    TrainConfig current = config;
    double best = std::numeric_limits<double>::infinity();
    std::vector<double> best_theta = model.extractor.params();
    std::vector<double> best_w = model.word_matrix.data;
    int best_epoch = first_epoch - 1;
    int lr_wait = 0, stop_wait = 0;

    for (int epoch = first_epoch;; ++epoch) {
        Phase phase = (epoch - first_epoch) < config.head_only_epochs ? Phase::head_only
                                                                      : Phase::fine_tune;
        if (config.reset_lr_on_finetune && (epoch - first_epoch) == config.head_only_epochs)
            current.initial_lr = config.initial_lr;

        auto t0 = std::chrono::steady_clock::now();
        double train_loss = run_epoch(model, index, train, current, sampler_config,
                                      phase, rng);
        double valid_loss = validate(model, valid, sampler_config);
        double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                          .count();
        log.records.push_back(
            {epoch, phase, current.initial_lr, train_loss, valid_loss, wall});
        if (verbose)
            std::printf("epoch %4d  phase %-9s  lr %-8g  train %.6f  valid %.6f  (%.2fs)\n",
                        epoch, to_string(phase).c_str(), current.initial_lr, train_loss,
                        valid_loss, wall);

        if (valid_loss < best - config.improvement_epsilon) {
            best = valid_loss;
            best_epoch = epoch;
            best_theta = model.extractor.params();
            best_w = model.word_matrix.data;
            lr_wait = 0;
            stop_wait = 0;
        } else {
            ++lr_wait;
            ++stop_wait;
        }
        if (stop_wait >= config.stop_patience_epochs) break;
        if (lr_wait >= config.lr_patience_epochs) {
            current.initial_lr /= config.lr_divisor;
            lr_wait = 0;
        }
        if (epoch - first_epoch + 1 >= config.max_epochs) break;
    }

    model.extractor.params() = best_theta;
    model.word_matrix.data = best_w;
    log.best_validation = std::isfinite(best) ? best : log.initial_validation;
    log.best_epoch = best_epoch;
    return log;
}

void save_train_log(const TrainLog& log, const std::string& path,
                    const std::string& header_timestamp,
                    const std::string& config_json,
                    const std::vector<std::string>& prior_record_lines) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open for writing: " + path);
    nlohmann::ordered_json header;
    header["format"] = "weakcat-trainlog";
    header["version"] = 1;
    header["timestamp"] = header_timestamp;
    if (!config_json.empty()) header["config"] = nlohmann::json::parse(config_json);
    header["initial_validation"] = log.initial_validation;
    header["best_validation"] = log.best_validation;
    header["best_epoch"] = log.best_epoch;
    out << header.dump() << '\n';
    for (const auto& line : prior_record_lines) out << line << '\n';
    for (const auto& rec : log.records) {
        nlohmann::ordered_json j;
        j["epoch"] = rec.epoch;
        j["phase"] = to_string(rec.phase);
        j["lr"] = rec.lr;
        j["train_loss"] = rec.train_loss;
        j["valid_loss"] = rec.valid_loss;
        out << j.dump() << '\n';
    }
}

} // namespace weakcat
