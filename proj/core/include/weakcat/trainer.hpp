#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "weakcat/model.hpp"
#include "weakcat/sampler.hpp"

namespace weakcat {

enum class Phase { head_only, fine_tune };

std::string to_string(Phase phase);

struct TrainConfig {
    std::size_t batch_size = 20;
    double initial_lr = 0.1;
    double lr_divisor = 10.0;
    int lr_patience_epochs = 10;
    int stop_patience_epochs = 20;
    int head_only_epochs = 20;
    double epoch_fraction = 0.1;
    double improvement_epsilon = 1e-5;
    int max_epochs = 1000;
    bool reset_lr_on_finetune = false;
    std::uint64_t seed = 0;
};

struct EpochRecord {
    int epoch;
    Phase phase;
    double lr;
    double train_loss;
    double valid_loss;
    double wall_seconds;
};

struct TrainLog {
    std::vector<EpochRecord> records;
    double initial_validation = 0.0;
    double best_validation = 0.0;
    int best_epoch = 0;
};

// one epoch of SGD: ceil(ceil(N*fraction)/batch) steps of batch_size pairs
double run_epoch(EmbeddingModel& model, const InvertedIndex& index,
                 const std::vector<TrainingSample>& samples, const TrainConfig& config,
                 const SamplerConfig& sampler_config, Phase phase, Rng& rng);

// mean loss over every (sample, label) term; full softmax when K <= 512,
// otherwise sampled with a seed fixed per call
double validate(const EmbeddingModel& model, const std::vector<TrainingSample>& valid,
                const SamplerConfig& sampler_config);

// two-phase training with LR schedule and early stopping; the model ends up
// with the best-validation epoch's parameters
TrainLog fit(const std::vector<TrainingSample>& train,
             const std::vector<TrainingSample>& valid, EmbeddingModel& model,
             const TrainConfig& config, const SamplerConfig& sampler_config,
             bool verbose = false, int first_epoch = 1);

// line-delimited log; wall times are not written so reruns are byte-identical.
// config_json, when non-empty, is embedded in the header; prior_record_lines
// are replayed before the new records (checkpoint resume)
void save_train_log(const TrainLog& log, const std::string& path,
                    const std::string& header_timestamp,
                    const std::string& config_json = "",
                    const std::vector<std::string>& prior_record_lines = {});

} // namespace weakcat
