#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const std::string tool = WEAKCAT_TOOL;

struct Workdir {
    fs::path path;
    Workdir() {
        static int counter = 0;
        path = fs::temp_directory_path() /
               ("weakcat_cli_test" + std::to_string(counter++));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~Workdir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

int run(const std::string& args, const std::string& out_file = "/dev/null",
        const std::string& err_file = "/dev/null") {
    std::string cmd = tool + " " + args + " >" + out_file + " 2>" + err_file;
    int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// one shared pipeline run: gen-synthetic -> preprocess -> train
struct Pipeline {
    Workdir wd;
    std::string catalog, data_dir, checkpoint, logfile;

    Pipeline() {
        catalog = wd.file("catalog.jsonl");
        data_dir = wd.file("data");
        checkpoint = wd.file("model.wmdl");
        logfile = wd.file("train.log");
        REQUIRE(run("gen-synthetic --clusters 4 --samples 160 --feature-dim 8 "
                    "--noise-words 10 --seed 5 --out " + catalog) == 0);
        REQUIRE(run("preprocess --input " + catalog + " --out-dir " + data_dir +
                    " --validation-fraction 0.1 --seed 1") == 0);
        REQUIRE(run("train --dataset " + data_dir + "/train.wcat --valid " + data_dir +
                    "/valid.wcat --vocab " + data_dir + "/vocab.json --out " + checkpoint +
                    " --log " + logfile +
                    " --max-epochs 4 --head-only-epochs 2 --n-negatives 3 --seed 2") == 0);
    }
};

Pipeline& pipeline() {
    static Pipeline p;
    return p;
}

} // namespace

TEST_CASE("usage errors exit with code 1") {
    CHECK(run("") == 1);
    CHECK(run("no-such-subcommand") == 1);
    CHECK(run("train --dataset only.wcat") == 1); // missing required options
    CHECK(run("--help") == 0);
}

TEST_CASE("missing input file exits with code 2") {
    Workdir wd;
    CHECK(run("preprocess --input " + wd.file("nope.jsonl") + " --out-dir " +
              wd.file("out")) == 2);
}

TEST_CASE("malformed catalog line is reported with its line number") {
    Workdir wd;
    auto bad = wd.file("bad.jsonl");
    {
        std::ofstream out(bad);
        out << R"({"record_id":"r1","item_id":"i1","text_fields":["red shirt"],"features":[1.0]})"
            << '\n';
        out << "this is not json\n";
    }
    auto err = wd.file("err.txt");
    CHECK(run("preprocess --input " + bad + " --out-dir " + wd.file("out"),
              "/dev/null", err) == 2);
    CHECK(slurp(err).find("(line 2)") != std::string::npos);
}

TEST_CASE("preprocess writes vocab, datasets and stats") {
    auto& p = pipeline();
    CHECK(fs::exists(p.data_dir + "/vocab.json"));
    CHECK(fs::exists(p.data_dir + "/train.wcat"));
    CHECK(fs::exists(p.data_dir + "/valid.wcat"));
    CHECK(fs::exists(p.data_dir + "/stats.json"));
    auto stats = slurp(p.data_dir + "/stats.json");
    CHECK(stats.find("\"vocabulary_size\"") != std::string::npos);
    CHECK(stats.find("\"top50\"") != std::string::npos);
}

TEST_CASE("train writes a checkpoint and a per-epoch log") {
    auto& p = pipeline();
    CHECK(fs::exists(p.checkpoint));
    auto log = slurp(p.logfile);
    CHECK(log.find("\"epoch\":1") != std::string::npos);
    CHECK(log.find("valid_loss") != std::string::npos);
}

TEST_CASE("train rejects a vocabulary that does not match the dataset") {
    auto& p = pipeline();
    Workdir wd;
    // preprocess a different catalog: different vocabulary size
    auto other = wd.file("other.jsonl");
    REQUIRE(run("gen-synthetic --clusters 2 --samples 40 --feature-dim 8 "
                "--noise-words 3 --seed 9 --out " + other) == 0);
    REQUIRE(run("preprocess --input " + other + " --out-dir " + wd.file("data") +
                " --validation-fraction 0.1") == 0);
    CHECK(run("train --dataset " + p.data_dir + "/train.wcat --valid " + p.data_dir +
              "/valid.wcat --vocab " + wd.file("data") + "/vocab.json --out " +
              wd.file("m.wmdl")) == 2);
}

TEST_CASE("eval-retrieval reports metrics and honors self exclusion by default") {
    auto& p = pipeline();
    auto report = p.wd.file("retrieval.json");
    auto out = p.wd.file("retrieval.txt");
    CHECK(run("eval-retrieval --checkpoint " + p.checkpoint + " --query " + p.data_dir +
              "/train.wcat --gallery " + p.data_dir + "/train.wcat --topk 1,5 --out " +
              report, out) == 0);
    auto json = slurp(report);
    CHECK(json.find("\"exclude_self\": true") != std::string::npos);
    CHECK(json.find("\"topk_accuracy\"") != std::string::npos);
    CHECK(slurp(out).find("accuracy") != std::string::npos);
}

TEST_CASE("probe trains a linear head from a labels file") {
    auto& p = pipeline();
    // cluster id (item_id prefix) as the class, pulled from export-features
    auto feats = p.wd.file("features.tsv");
    REQUIRE(run("export-features --checkpoint " + p.checkpoint + " --dataset " +
                p.data_dir + "/train.wcat --out " + feats) == 0);
    auto labels = p.wd.file("labels.tsv");
    {
        std::ifstream in(feats);
        std::ofstream out(labels);
        std::string line;
        while (std::getline(in, line)) {
            auto t1 = line.find('\t');
            auto t2 = line.find('\t', t1 + 1);
            std::string record_id = line.substr(0, t1);
            std::string item_id = line.substr(t1 + 1, t2 - t1 - 1);
            out << record_id << '\t' << item_id.substr(0, item_id.find('-')) << '\n';
        }
    }
    auto report = p.wd.file("probe.json");
    CHECK(run("probe --checkpoint " + p.checkpoint + " --dataset " + p.data_dir +
              "/train.wcat --labels " + labels + " --topk 1,2 --epochs 30 --out " +
              report) == 0);
    auto json = slurp(report);
    CHECK(json.find("\"head\": \"softmax\"") != std::string::npos);
    CHECK(json.find("\"mean_auc\"") != std::string::npos);
}

TEST_CASE("export-features emits one TSV row per sample") {
    auto& p = pipeline();
    auto feats = p.wd.file("features2.tsv");
    REQUIRE(run("export-features --checkpoint " + p.checkpoint + " --dataset " +
                p.data_dir + "/valid.wcat --out " + feats) == 0);
    std::ifstream in(feats);
    std::string line;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        CHECK(line.find('\t') != std::string::npos);
        CHECK(line[0] == 'r');
    }
    CHECK(rows > 0);
}

TEST_CASE("resume continues epoch numbering in the log") {
    auto& p = pipeline();
    auto log2 = p.wd.file("resume.log");
    fs::copy_file(p.logfile, log2, fs::copy_options::overwrite_existing);
    auto out2 = p.wd.file("model2.wmdl");
    CHECK(run("train --dataset " + p.data_dir + "/train.wcat --valid " + p.data_dir +
              "/valid.wcat --vocab " + p.data_dir + "/vocab.json --resume " + p.checkpoint +
              " --out " + out2 + " --log " + log2 +
              " --max-epochs 2 --n-negatives 3 --seed 3") == 0);
    auto log = slurp(log2);
    CHECK(log.find("\"epoch\":5") != std::string::npos); // picks up after epoch 4
    CHECK(log.find("\"epoch\":6") != std::string::npos);
}
