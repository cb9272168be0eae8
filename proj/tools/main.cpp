#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "weakcat/corpus.hpp"
#include "weakcat/model.hpp"
#include "weakcat/retrieval.hpp"
#include "weakcat/sampler.hpp"
#include "weakcat/synthetic.hpp"
#include "weakcat/trainer.hpp"
#include "weakcat/transfer.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string utc_timestamp() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

std::unordered_set<std::string> load_word_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw weakcat::Error("cannot open word list: " + path);
    std::unordered_set<std::string> out;
    std::string word;
    while (in >> word) out.insert(word);
    return out;
}

void write_json(const std::string& path, const ordered_json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw weakcat::Error("cannot open for writing: " + path);
    out << j.dump(2) << '\n';
}

std::vector<std::size_t> parse_topk(const std::string& csv) {
    std::vector<std::size_t> ks;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) ks.push_back(std::stoul(item));
    if (ks.empty()) throw CLI::ValidationError("--topk", "needs at least one value");
    return ks;
}

std::vector<std::uint32_t> parse_dims(const std::string& csv) {
    std::vector<std::uint32_t> dims;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) dims.push_back(static_cast<std::uint32_t>(std::stoul(item)));
    return dims;
}

struct PreprocessArgs {
    std::vector<std::string> inputs;
    std::string out_dir;
    std::size_t vocab_size = 30000;
    std::size_t min_token_length = 1;
    double validation_fraction = 0.005;
    std::uint64_t seed = 0;
    std::string languages = "en,fr";
    std::string stopword_file, blacklist_file;
};

int cmd_preprocess(const PreprocessArgs& args) {
    weakcat::PreprocessConfig config;
    config.vocabulary_max_size = args.vocab_size;
    config.min_token_length = args.min_token_length;
    config.validation_fraction = args.validation_fraction;
    config.seed = args.seed;
    if (!args.stopword_file.empty()) {
        config.stopwords = load_word_file(args.stopword_file);
    } else {
        std::stringstream ss(args.languages);
        std::string lang;
        while (std::getline(ss, lang, ','))
            for (const auto& w : weakcat::builtin_stopwords(lang))
                config.stopwords.insert(w);
    }
    if (!args.blacklist_file.empty()) {
        config.blacklist = load_word_file(args.blacklist_file);
    } else {
        for (const auto& w : weakcat::builtin_blacklist()) config.blacklist.insert(w);
    }

    std::vector<weakcat::CatalogRecord> records;
    for (const auto& path : args.inputs) weakcat::append_catalog(records, path);

    std::vector<std::vector<std::string>> bags;
    bags.reserve(records.size());
    for (const auto& rec : records)
        bags.push_back(weakcat::preprocess_text(rec.text_fields, config));
    auto vocab = weakcat::build_vocabulary(bags, config);
    auto build = weakcat::build_dataset(records, vocab, config);
    auto split = weakcat::split_validation(build.samples, config, vocab.size());

    fs::create_directories(args.out_dir);
    auto out = [&](const char* name) { return (fs::path(args.out_dir) / name).string(); };
    vocab.save(out("vocab.json"), weakcat::config_fingerprint(config));
    weakcat::save_dataset(out("train.wcat"), split.train,
                          static_cast<std::uint32_t>(vocab.size()));
    weakcat::save_dataset(out("valid.wcat"), split.valid,
                          static_cast<std::uint32_t>(vocab.size()));

    double label_sum = 0.0;
    for (const auto& s : build.samples) label_sum += static_cast<double>(s.labels.size());
    double mean_labels =
        build.samples.empty() ? 0.0 : label_sum / static_cast<double>(build.samples.size());

    ordered_json stats;
    stats["format"] = "weakcat-stats";
    stats["version"] = 1;
    stats["vocabulary_size"] = vocab.size();
    stats["total_records"] = records.size();
    stats["samples"] = build.samples.size();
    stats["dropped_records"] = build.dropped_records;
    stats["train_samples"] = split.train.size();
    stats["valid_samples"] = split.valid.size();
    stats["uncovered_valid_labels"] = split.uncovered_labels;
    stats["mean_labels_per_sample"] = mean_labels;
    auto& top = stats["top50"] = ordered_json::array();
    for (std::size_t i = 0; i < vocab.size() && i < 50; ++i)
        top.push_back({vocab.token(i), vocab.frequency(i)});
    write_json(out("stats.json"), stats);

    std::printf("vocabulary      %zu tokens\n", vocab.size());
    std::printf("samples         %zu (dropped %zu)\n", build.samples.size(),
                build.dropped_records);
    std::printf("train/valid     %zu / %zu\n", split.train.size(), split.valid.size());
    std::printf("labels/sample   %.2f\n", mean_labels);
    std::printf("top words      ");
    for (std::size_t i = 0; i < vocab.size() && i < 10; ++i)
        std::printf(" %s(%llu)", vocab.token(i).c_str(),
                    static_cast<unsigned long long>(vocab.frequency(i)));
    std::printf("\n");
    return 0;
}

struct TrainArgs {
    std::string dataset, valid, vocab, out, log, resume;
    weakcat::TrainConfig train;
    weakcat::SamplerConfig sampler;
    std::string extractor = "precomputed";
    std::uint32_t embed_dim = 64;
    std::string hidden = "32,32";
};

int cmd_train(const TrainArgs& args) {
    auto train_ds = weakcat::load_dataset(args.dataset);
    auto valid_ds = weakcat::load_dataset(args.valid);
    auto vocab = weakcat::Vocabulary::load(args.vocab);
    if (train_ds.vocab_size != vocab.size())
        throw weakcat::VocabMismatch("dataset vocabulary size does not match vocab file");
    if (train_ds.samples.empty() || valid_ds.samples.empty())
        throw weakcat::Error("train and valid datasets must be non-empty");

    auto input_dim = static_cast<std::uint32_t>(train_ds.samples.front().input.size());
    auto fingerprint = vocab.fingerprint();

    weakcat::EmbeddingModel model;
    int first_epoch = 1;
    std::vector<std::string> prior_lines;
    if (!args.resume.empty()) {
        model = weakcat::load_checkpoint(args.resume, &fingerprint);
        if (!args.log.empty() && fs::exists(args.log)) {
            std::ifstream in(args.log);
            std::string line;
            std::getline(in, line); // header
            while (std::getline(in, line)) {
                if (line.empty()) continue;
                prior_lines.push_back(line);
                first_epoch = nlohmann::json::parse(line).at("epoch").get<int>() + 1;
            }
        }
    } else {
        weakcat::ExtractorArch arch;
        arch.kind = weakcat::extractor_kind_from_string(args.extractor);
        arch.input_dim = input_dim;
        arch.output_dim =
            arch.kind == weakcat::ExtractorKind::precomputed ? input_dim : args.embed_dim;
        if (arch.kind == weakcat::ExtractorKind::mlp) arch.hidden = parse_dims(args.hidden);
        weakcat::Rng rng(weakcat::Rng::derive(args.train.seed, 0x494e4954));
        model.extractor = weakcat::FeatureExtractor::random_init(arch, rng);
        model.word_matrix = weakcat::WordEmbeddingMatrix::random_init(
            arch.output_dim, static_cast<std::uint32_t>(vocab.size()), rng);
        model.vocab_fingerprint = fingerprint;
    }

    ordered_json config_echo;
    config_echo["batch_size"] = args.train.batch_size;
    config_echo["initial_lr"] = args.train.initial_lr;
    config_echo["lr_divisor"] = args.train.lr_divisor;
    config_echo["lr_patience_epochs"] = args.train.lr_patience_epochs;
    config_echo["stop_patience_epochs"] = args.train.stop_patience_epochs;
    config_echo["head_only_epochs"] = args.train.head_only_epochs;
    config_echo["epoch_fraction"] = args.train.epoch_fraction;
    config_echo["improvement_epsilon"] = args.train.improvement_epsilon;
    config_echo["max_epochs"] = args.train.max_epochs;
    config_echo["n_negatives"] = args.sampler.n_negatives;
    config_echo["extractor"] = args.extractor;
    config_echo["seed"] = args.train.seed;
    std::printf("config: %s\n", config_echo.dump().c_str());

    auto log = weakcat::fit(train_ds.samples, valid_ds.samples, model, args.train,
                            args.sampler, /*verbose=*/true, first_epoch);
    weakcat::save_checkpoint(model, args.out);
    if (!args.log.empty())
        weakcat::save_train_log(log, args.log, utc_timestamp(), config_echo.dump(),
                                prior_lines);
    std::printf("best epoch %d, validation loss %.6f\n", log.best_epoch,
                log.best_validation);
    return 0;
}

struct EvalRetrievalArgs {
    std::string checkpoint, query, gallery, out, dump_ranks, save_index;
    std::string topk = "1,5,10,20,30,40,50";
    bool exclude_self = false, include_self = false;
};

int cmd_eval_retrieval(const EvalRetrievalArgs& args) {
    auto model = weakcat::load_checkpoint(args.checkpoint);
    auto gallery = weakcat::load_dataset(args.gallery);
    auto query_ds = weakcat::load_dataset(args.query);
    auto ks = parse_topk(args.topk);

    bool exclude_self = args.query == args.gallery; // same file: drop the query row
    if (args.exclude_self) exclude_self = true;
    if (args.include_self) exclude_self = false;

    auto index = weakcat::build_index(model, gallery.samples);
    if (!args.save_index.empty()) index.save(args.save_index);

    std::vector<weakcat::RetrievalQuery> queries;
    for (const auto& s : query_ds.samples) queries.push_back({s, s.item_id});
    auto acc = weakcat::topk_accuracy(index, model, queries, ks, exclude_self);

    ordered_json report;
    report["format"] = "weakcat-retrieval-metrics";
    report["version"] = 1;
    report["queries"] = queries.size();
    report["gallery"] = index.size();
    report["exclude_self"] = exclude_self;
    auto& topk = report["topk_accuracy"] = ordered_json::object();
    for (auto k : ks) topk[std::to_string(k)] = acc.at(k);
    if (!args.out.empty()) write_json(args.out, report);

    std::printf("%-8s %s\n", "k", "accuracy");
    for (auto k : ks) std::printf("%-8zu %.4f\n", k, acc.at(k));

    if (!args.dump_ranks.empty()) {
        std::ofstream out(args.dump_ranks, std::ios::binary);
        if (!out) throw weakcat::Error("cannot open for writing: " + args.dump_ranks);
        for (const auto& q : queries) {
            auto z = weakcat::extract(model, q.sample.input);
            double norm = std::sqrt(
                std::inner_product(z.begin(), z.end(), z.begin(), 0.0));
            for (auto& v : z) v /= norm;
            std::size_t rank = index.size();
            std::size_t seen = 0;
            for (const auto& hit : weakcat::query(index, z, index.size())) {
                const auto& row = index.rows()[hit.row];
                if (exclude_self && row.record_id == q.sample.record_id) continue;
                if (row.item_id == q.item_id) {
                    rank = seen;
                    break;
                }
                ++seen;
            }
            out << q.sample.record_id << '\t' << q.item_id << '\t' << rank << '\n';
        }
    }
    return 0;
}

struct ProbeArgs {
    std::string checkpoint, dataset, labels, groups, out;
    std::string head = "softmax";
    std::string topk = "1,3,5";
    weakcat::ProbeConfig config;
    bool count_empty = false;
};

int cmd_probe(const ProbeArgs& args) {
    auto model = weakcat::load_checkpoint(args.checkpoint);
    auto ds = weakcat::load_dataset(args.dataset);
    auto ks = parse_topk(args.topk);
    bool sigmoid = args.head == "sigmoid";
    if (!sigmoid && args.head != "softmax")
        throw CLI::ValidationError("--head", "must be softmax or sigmoid");

    // labels file: record_id <TAB> name[,name...]
    std::map<std::string, std::vector<std::string>> raw_labels;
    std::set<std::string> names;
    {
        std::ifstream in(args.labels);
        if (!in) throw weakcat::Error("cannot open labels file: " + args.labels);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            auto tab = line.find('\t');
            if (tab == std::string::npos)
                throw weakcat::ParseError("labels line needs a tab separator", lineno);
            std::vector<std::string> tags;
            std::stringstream ss(line.substr(tab + 1));
            std::string tag;
            while (std::getline(ss, tag, ','))
                if (!tag.empty()) tags.push_back(tag);
            if (tags.empty())
                throw weakcat::ParseError("labels line has no labels", lineno);
            if (!sigmoid && tags.size() != 1)
                throw weakcat::ParseError("softmax head expects one class per record",
                                          lineno);
            for (const auto& t : tags) names.insert(t);
            raw_labels[line.substr(0, tab)] = std::move(tags);
        }
    }
    std::vector<std::string> name_list(names.begin(), names.end());
    std::map<std::string, std::size_t> name_index;
    for (std::size_t i = 0; i < name_list.size(); ++i) name_index[name_list[i]] = i;

    weakcat::ProbeDataset data;
    data.dim = model.word_matrix.dim;
    if (sigmoid)
        data.n_attrs = name_list.size();
    else
        data.n_classes = name_list.size();
    for (const auto& sample : ds.samples) {
        auto it = raw_labels.find(sample.record_id);
        if (it == raw_labels.end()) continue;
        auto z = weakcat::extract(model, sample.input);
        data.features.insert(data.features.end(), z.begin(), z.end());
        if (sigmoid) {
            std::vector<std::uint8_t> row(data.n_attrs, 0);
            for (const auto& t : it->second) row[name_index.at(t)] = 1;
            data.attributes.insert(data.attributes.end(), row.begin(), row.end());
        } else {
            data.classes.push_back(
                static_cast<std::uint32_t>(name_index.at(it->second.front())));
        }
        ++data.n;
    }
    if (data.n == 0) throw weakcat::Error("no dataset record matched the labels file");

    auto trained = weakcat::train_probe(
        data, sigmoid ? weakcat::ProbeHead::sigmoid_head : weakcat::ProbeHead::softmax_head,
        args.config);
    auto aucs = weakcat::per_class_auc(trained.probe, data);
    double mean_auc = std::accumulate(aucs.begin(), aucs.end(), 0.0) /
                      static_cast<double>(aucs.size());

    ordered_json report;
    report["format"] = "weakcat-probe-metrics";
    report["version"] = 1;
    report["head"] = args.head;
    report["samples"] = data.n;
    report["outputs"] = name_list.size();
    report["final_train_loss"] = trained.epoch_losses.back();
    if (sigmoid) {
        std::vector<std::string> groups;
        if (!args.groups.empty()) {
            std::map<std::string, std::string> group_of;
            std::ifstream in(args.groups);
            if (!in) throw weakcat::Error("cannot open groups file: " + args.groups);
            std::string line;
            while (std::getline(in, line)) {
                auto tab = line.find('\t');
                if (tab != std::string::npos)
                    group_of[line.substr(0, tab)] = line.substr(tab + 1);
            }
            for (const auto& name : name_list) {
                auto it = group_of.find(name);
                groups.push_back(it == group_of.end() ? "other" : it->second);
            }
        }
        auto recall = weakcat::topk_attribute_recall(trained.probe, data, ks, groups,
                                                     args.count_empty);
        auto& rj = report["topk_recall"] = ordered_json::object();
        for (const auto& [group, by_k] : recall) {
            auto& gj = rj[group.empty() ? "all" : group] = ordered_json::object();
            for (const auto& [k, v] : by_k) gj[std::to_string(k)] = v;
        }
        std::printf("%-16s", "group");
        for (auto k : ks) std::printf(" top-%zu ", k);
        std::printf("\n");
        for (const auto& [group, by_k] : recall) {
            std::printf("%-16s", group.empty() ? "all" : group.c_str());
            for (auto k : ks) std::printf(" %.4f", by_k.at(k));
            std::printf("\n");
        }
    } else {
        auto acc = weakcat::topk_class_accuracy(trained.probe, data, ks);
        auto& aj = report["topk_accuracy"] = ordered_json::object();
        for (auto k : ks) aj[std::to_string(k)] = acc.at(k);
        std::printf("%-8s %s\n", "k", "accuracy");
        for (auto k : ks) std::printf("%-8zu %.4f\n", k, acc.at(k));
    }
    auto& auc_json = report["per_output_auc"] = ordered_json::object();
    for (std::size_t i = 0; i < name_list.size(); ++i) auc_json[name_list[i]] = aucs[i];
    report["mean_auc"] = mean_auc;
    std::printf("mean AUC %.4f\n", mean_auc);
    if (!args.out.empty()) write_json(args.out, report);
    return 0;
}

int cmd_export_features(const std::string& checkpoint, const std::string& dataset,
                        const std::string& out_path) {
    auto model = weakcat::load_checkpoint(checkpoint);
    auto ds = weakcat::load_dataset(dataset);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw weakcat::Error("cannot open for writing: " + out_path);
    char buf[64];
    for (const auto& sample : ds.samples) {
        out << sample.record_id << '\t' << sample.item_id;
        for (double v : weakcat::extract(model, sample.input)) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            out << '\t' << buf;
        }
        out << '\n';
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"weakcat: joint image/word embeddings from weakly annotated catalogs"};
    app.require_subcommand(1);

    PreprocessArgs pre;
    auto* preprocess = app.add_subcommand(
        "preprocess", "tokenize catalogs, build the vocabulary and dataset files");
    preprocess->add_option("--input", pre.inputs, "catalog file(s), one JSON record per line")
        ->required();
    preprocess->add_option("--out-dir", pre.out_dir, "output directory")->required();
    preprocess->add_option("--vocab-size", pre.vocab_size, "vocabulary cap")
        ->capture_default_str();
    preprocess->add_option("--min-token-length", pre.min_token_length)
        ->capture_default_str();
    preprocess->add_option("--validation-fraction", pre.validation_fraction)
        ->capture_default_str();
    preprocess->add_option("--seed", pre.seed)->capture_default_str();
    preprocess->add_option("--languages", pre.languages, "built-in stopword lists to use")
        ->capture_default_str();
    preprocess->add_option("--stopword-file", pre.stopword_file,
                           "replace built-in stopwords with this list");
    preprocess->add_option("--blacklist-file", pre.blacklist_file,
                           "replace the built-in blacklist with this list");

    TrainArgs tr;
    auto* train = app.add_subcommand("train", "train the embedding model");
    train->add_option("--dataset", tr.dataset, "training dataset (.wcat)")->required();
    train->add_option("--valid", tr.valid, "validation dataset (.wcat)")->required();
    train->add_option("--vocab", tr.vocab, "vocabulary file")->required();
    train->add_option("--out", tr.out, "checkpoint output path")->required();
    train->add_option("--log", tr.log, "train log output path");
    train->add_option("--resume", tr.resume, "checkpoint to resume from");
    train->add_option("--batch-size", tr.train.batch_size)->capture_default_str();
    train->add_option("--lr", tr.train.initial_lr)->capture_default_str();
    train->add_option("--lr-divisor", tr.train.lr_divisor)->capture_default_str();
    train->add_option("--lr-patience", tr.train.lr_patience_epochs)->capture_default_str();
    train->add_option("--stop-patience", tr.train.stop_patience_epochs)
        ->capture_default_str();
    train->add_option("--head-only-epochs", tr.train.head_only_epochs)
        ->capture_default_str();
    train->add_option("--epoch-fraction", tr.train.epoch_fraction)->capture_default_str();
    train->add_option("--improvement-epsilon", tr.train.improvement_epsilon)
        ->capture_default_str();
    train->add_option("--max-epochs", tr.train.max_epochs)->capture_default_str();
    train->add_flag("--reset-lr-on-finetune", tr.train.reset_lr_on_finetune);
    train->add_option("--seed", tr.train.seed)->capture_default_str();
    train->add_option("--n-negatives", tr.sampler.n_negatives)->capture_default_str();
    train->add_flag("--exclude-bag-negatives",
                    tr.sampler.exclude_bag_words_from_negatives,
                    "negatives never come from the image's own bag");
    train->add_option("--extractor", tr.extractor, "precomputed|linear|mlp")
        ->capture_default_str();
    train->add_option("--embed-dim", tr.embed_dim, "embedding dimension I")
        ->capture_default_str();
    train->add_option("--hidden", tr.hidden, "mlp hidden widths, comma separated")
        ->capture_default_str();

    EvalRetrievalArgs ev;
    auto* eval = app.add_subcommand("eval-retrieval", "top-k retrieval accuracy");
    eval->add_option("--checkpoint", ev.checkpoint)->required();
    eval->add_option("--query", ev.query, "query dataset (.wcat)")->required();
    eval->add_option("--gallery", ev.gallery, "gallery dataset (.wcat)")->required();
    eval->add_option("--topk", ev.topk)->capture_default_str();
    eval->add_flag("--exclude-self", ev.exclude_self,
                   "drop the query's own record from the gallery");
    eval->add_flag("--include-self", ev.include_self);
    eval->add_option("--out", ev.out, "metrics report path");
    eval->add_option("--dump-ranks", ev.dump_ranks, "per-query rank dump path");
    eval->add_option("--save-index", ev.save_index, "persist the gallery index");

    ProbeArgs pb;
    auto* probe = app.add_subcommand("probe", "linear-probe evaluation of frozen features");
    probe->add_option("--checkpoint", pb.checkpoint)->required();
    probe->add_option("--dataset", pb.dataset, "dataset (.wcat)")->required();
    probe->add_option("--labels", pb.labels, "record_id<TAB>labels file")->required();
    probe->add_option("--head", pb.head, "softmax|sigmoid")->capture_default_str();
    probe->add_option("--groups", pb.groups, "attribute<TAB>group file");
    probe->add_option("--topk", pb.topk)->capture_default_str();
    probe->add_option("--lr", pb.config.lr)->capture_default_str();
    probe->add_option("--batch-size", pb.config.batch_size)->capture_default_str();
    probe->add_option("--epochs", pb.config.epochs)->capture_default_str();
    probe->add_option("--seed", pb.config.seed)->capture_default_str();
    probe->add_flag("--count-empty", pb.count_empty,
                    "count group-empty samples as zero recall");
    probe->add_option("--out", pb.out, "metrics report path");

    std::string ef_checkpoint, ef_dataset, ef_out;
    auto* exportf = app.add_subcommand("export-features",
                                       "dump embeddings as TSV for external tools");
    exportf->add_option("--checkpoint", ef_checkpoint)->required();
    exportf->add_option("--dataset", ef_dataset)->required();
    exportf->add_option("--out", ef_out)->required();

    weakcat::SyntheticSpec sp;
    std::string sp_out;
    auto* gen = app.add_subcommand("gen-synthetic", "generate a synthetic catalog");
    gen->add_option("--clusters", sp.clusters)->capture_default_str();
    gen->add_option("--words-per-cluster", sp.words_per_cluster)->capture_default_str();
    gen->add_option("--noise-words", sp.noise_words)->capture_default_str();
    gen->add_option("--samples", sp.n_samples)->capture_default_str();
    gen->add_option("--feature-dim", sp.feature_dim)->capture_default_str();
    gen->add_option("--cluster-word-rate", sp.cluster_word_rate)->capture_default_str();
    gen->add_option("--noise-rate", sp.noise_rate)->capture_default_str();
    gen->add_option("--feature-sigma", sp.feature_sigma)->capture_default_str();
    gen->add_option("--images-per-item", sp.images_per_item)->capture_default_str();
    gen->add_option("--seed", sp.seed)->capture_default_str();
    gen->add_option("--out", sp_out, "catalog output path")->required();

    try {
        app.parse(argc, argv);
        if (preprocess->parsed()) return cmd_preprocess(pre);
        if (train->parsed()) return cmd_train(tr);
        if (eval->parsed()) return cmd_eval_retrieval(ev);
        if (probe->parsed()) return cmd_probe(pb);
        if (exportf->parsed()) return cmd_export_features(ef_checkpoint, ef_dataset, ef_out);
        if (gen->parsed()) {
            weakcat::write_catalog(weakcat::generate_catalog(sp), sp_out);
            return 0;
        }
        return 1;
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const weakcat::NonFiniteLoss& e) {
        std::fprintf(stderr, "numeric failure: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
