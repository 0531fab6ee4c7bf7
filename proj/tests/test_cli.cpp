#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct CmdResult {
    int code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

CmdResult run_cli(const std::string& args) {
    const std::string out_path = "cli_scratch/stdout.txt";
    const std::string err_path = "cli_scratch/stderr.txt";
    fs::create_directories("cli_scratch");
    const std::string cmd =
        std::string("\"") + SPECLAB_BIN + "\" " + args + " >" + out_path + " 2>" + err_path;
    const int raw = std::system(cmd.c_str());
    CmdResult result;
    if (WIFEXITED(raw)) result.code = WEXITSTATUS(raw);
    result.out = slurp(out_path);
    result.err = slurp(err_path);
    return result;
}

void fresh_scratch() {
    fs::remove_all("cli_scratch");
    fs::create_directories("cli_scratch");
}

/// synth -> split, shared by several cases. Returns 0 on success.
int make_split_library(const std::string& stem, int bands = 16) {
    CmdResult r = run_cli("synth --classes 3 --per-class 8 --bands " + std::to_string(bands) +
                          " --noise 0.01 --seed 5 --out " + stem + ".csv");
    if (r.code != 0) return r.code;
    r = run_cli("split --in " + stem + ".csv --train-frac 0.75 --seed 2 --out-train " + stem +
                "_train.csv --out-test " + stem + "_test.csv");
    return r.code;
}

}  // namespace

TEST_CASE("cli prints a version and a help page") {
    fresh_scratch();
    const CmdResult version = run_cli("--version");
    CHECK(version.code == 0);
    CHECK_FALSE(version.out.empty());
    const CmdResult help = run_cli("--help");
    CHECK(help.code == 0);
    CHECK(help.out.find("Exit codes:") != std::string::npos);
    CHECK(help.out.find("synth") != std::string::npos);
    CHECK(help.out.find("interpret") != std::string::npos);
}

TEST_CASE("cli rejects unknown or missing subcommands") {
    fresh_scratch();
    CHECK(run_cli("frobnicate").code == 2);
    CHECK(run_cli("").code == 2);
    CHECK(run_cli("train").code == 2);  // missing required flags
}

TEST_CASE("synth is byte-deterministic per seed and writes a manifest") {
    fresh_scratch();
    const std::string base =
        "synth --classes 3 --per-class 4 --bands 12 --noise 0.02 --seed 9 ";
    CHECK(run_cli(base + "--out cli_scratch/a.csv --templates cli_scratch/a.json").code == 0);
    CHECK(run_cli(base + "--out cli_scratch/b.csv --templates cli_scratch/b.json").code == 0);
    CHECK(slurp("cli_scratch/a.csv") == slurp("cli_scratch/b.csv"));
    CHECK(slurp("cli_scratch/a.json") == slurp("cli_scratch/b.json"));
    CHECK(fs::exists("cli_scratch/a.csv.manifest.json"));
    const std::string manifest = slurp("cli_scratch/a.csv.manifest.json");
    CHECK(manifest.find("\"subcommand\": \"synth\"") != std::string::npos);
    CHECK(manifest.find("\"seed\": 9") != std::string::npos);

    CHECK(run_cli("synth --classes 3 --per-class 4 --bands 12 --noise 0.02 --seed 10 "
                  "--out cli_scratch/c.csv")
              .code == 0);
    CHECK(slurp("cli_scratch/c.csv") != slurp("cli_scratch/a.csv"));
}

TEST_CASE("the synth-split-train-evaluate pipeline produces coherent artifacts") {
    fresh_scratch();
    REQUIRE(make_split_library("cli_scratch/lib") == 0);

    const CmdResult trained = run_cli(
        "train --train cli_scratch/lib_train.csv --hidden 16 --epochs 150 --batch 6 "
        "--lr 0.001 --optimizer adam --seed 1 --out cli_scratch/model.json "
        "--history cli_scratch/history.csv");
    REQUIRE(trained.code == 0);
    CHECK(trained.out.find("trained net D=16 H=16 C=3") != std::string::npos);
    CHECK(fs::exists("cli_scratch/model.json.manifest.json"));

    const std::string history = slurp("cli_scratch/history.csv");
    CHECK(history.rfind("epoch,loss,accuracy\n", 0) == 0);
    CHECK(std::count(history.begin(), history.end(), '\n') == 151);

    const CmdResult eval = run_cli(
        "evaluate --model cli_scratch/model.json --test cli_scratch/lib_test.csv "
        "--metrics cli_scratch/metrics.json --confusion cli_scratch/confusion.csv");
    REQUIRE(eval.code == 0);
    CHECK(eval.out.find("accuracy") != std::string::npos);

    const nlohmann::json metrics = nlohmann::json::parse(slurp("cli_scratch/metrics.json"));
    REQUIRE(metrics.contains("accuracy"));
    REQUIRE(metrics.contains("balanced_accuracy"));
    REQUIRE(metrics.contains("f1_weighted"));
    CHECK(metrics.at("n_test").get<int>() == 6);
    CHECK(metrics.at("n_classes").get<int>() == 3);
    const double accuracy = metrics.at("accuracy").get<double>();
    CHECK(accuracy >= 0.5);
    CHECK(accuracy <= 1.0);

    const std::string confusion = slurp("cli_scratch/confusion.csv");
    CHECK(confusion.rfind("label,synth_00,synth_01,synth_02\n", 0) == 0);
    CHECK(std::count(confusion.begin(), confusion.end(), '\n') == 4);
    CHECK(fs::exists("cli_scratch/metrics.json.manifest.json"));
}

TEST_CASE("train rejects zero epochs with a usage exit") {
    fresh_scratch();
    REQUIRE(make_split_library("cli_scratch/lib") == 0);
    const CmdResult r = run_cli(
        "train --train cli_scratch/lib_train.csv --hidden 4 --epochs 0 --batch 6 "
        "--out cli_scratch/model.json");
    CHECK(r.code == 2);
    CHECK(r.err.find("epochs") != std::string::npos);
    CHECK_FALSE(fs::exists("cli_scratch/model.json"));
}

TEST_CASE("evaluate reports a dimension mismatch naming both widths") {
    fresh_scratch();
    REQUIRE(make_split_library("cli_scratch/lib") == 0);
    REQUIRE(run_cli("train --train cli_scratch/lib_train.csv --hidden 4 --epochs 5 --batch 6 "
                    "--out cli_scratch/model.json")
                .code == 0);
    REQUIRE(run_cli("synth --classes 3 --per-class 4 --bands 12 --noise 0.01 --seed 5 "
                    "--out cli_scratch/narrow.csv")
                .code == 0);
    const CmdResult r = run_cli(
        "evaluate --model cli_scratch/model.json --test cli_scratch/narrow.csv "
        "--metrics cli_scratch/m.json --confusion cli_scratch/c.csv");
    CHECK(r.code == 5);
    CHECK(r.err.find("12 bands") != std::string::npos);
    CHECK(r.err.find("expects 16") != std::string::npos);
    CHECK_FALSE(fs::exists("cli_scratch/m.json"));
}

TEST_CASE("compare writes the ranked table for all six models") {
    fresh_scratch();
    REQUIRE(make_split_library("cli_scratch/lib") == 0);
    const CmdResult r = run_cli(
        "compare --train cli_scratch/lib_train.csv --test cli_scratch/lib_test.csv "
        "--shrinkage 0.5 --out cli_scratch/table.csv");
    REQUIRE(r.code == 0);
    CHECK(r.out.find("model") != std::string::npos);
    CHECK(r.out.find("LDA") != std::string::npos);
    const std::string csv = slurp("cli_scratch/table.csv");
    CHECK(csv.rfind("model,accuracy,balanced_accuracy,f1_weighted,time_s\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
    for (const char* name : {"LDA", "RidgeClassifier", "NearestCentroid", "GaussianNB",
                             "KNearestNeighbors", "LogisticRegression"}) {
        CHECK(csv.find(name) != std::string::npos);
    }
    CHECK(fs::exists("cli_scratch/table.csv.manifest.json"));

    CHECK(run_cli("compare --train cli_scratch/lib_train.csv --test cli_scratch/lib_test.csv "
                  "--models lda,svm --out cli_scratch/t2.csv")
              .code == 2);
}

TEST_CASE("interpret writes the report directory plus a manifest") {
    fresh_scratch();
    REQUIRE(make_split_library("cli_scratch/lib") == 0);
    REQUIRE(run_cli("train --train cli_scratch/lib_train.csv --hidden 8 --epochs 20 --batch 6 "
                    "--out cli_scratch/model.json")
                .code == 0);
    const CmdResult r = run_cli(
        "interpret --model cli_scratch/model.json --library cli_scratch/lib.csv "
        "--out-dir cli_scratch/report");
    REQUIRE(r.code == 0);
    CHECK(r.out.find("report files to cli_scratch/report") != std::string::npos);
    CHECK(fs::exists("cli_scratch/report/active_neurons.json"));
    CHECK(fs::exists("cli_scratch/report/layer1_weights.pgm"));
    CHECK(fs::exists("cli_scratch/report/wavelength_activity.csv"));
    CHECK(fs::exists("cli_scratch/report/wavelength_activity.svg"));
    CHECK(fs::exists("cli_scratch/report/reliance_synth_00.csv"));
    CHECK(fs::exists("cli_scratch/report/activation_synth_02.svg"));
    CHECK(fs::exists("cli_scratch/report/manifest.json"));
    // 5 shared files plus 4 per class.
    std::size_t count = 0;
    for ([[maybe_unused]] const auto& entry : fs::directory_iterator("cli_scratch/report")) {
        ++count;
    }
    CHECK(count == 5 + 4 * 3 + 1);
}

TEST_CASE("io failures map to distinct exit codes") {
    fresh_scratch();
    const CmdResult missing = run_cli(
        "split --in cli_scratch/nope.csv --out-train cli_scratch/t.csv "
        "--out-test cli_scratch/e.csv");
    CHECK(missing.code == 3);
    CHECK(missing.err.find("cannot open") != std::string::npos);

    std::ofstream bad("cli_scratch/bad.csv");
    bad << "id;species;oops\n";
    bad.close();
    const CmdResult malformed = run_cli(
        "split --in cli_scratch/bad.csv --out-train cli_scratch/t.csv "
        "--out-test cli_scratch/e.csv");
    CHECK(malformed.code == 4);

    const CmdResult bad_frac = run_cli(
        "split --in cli_scratch/bad.csv --train-frac 2.0 --out-train cli_scratch/t.csv "
        "--out-test cli_scratch/e.csv");
    CHECK(bad_frac.code != 0);

    const CmdResult bad_optimizer = run_cli(
        "train --train cli_scratch/nope.csv --optimizer sophia --out cli_scratch/m.json");
    CHECK(bad_optimizer.code == 2);
}

TEST_CASE("split carries the composite label key through to the outputs") {
    fresh_scratch();
    std::ofstream lib("cli_scratch/manual.csv");
    lib << "id,species,health,growth_stage,500,600\n";
    for (int i = 0; i < 4; ++i) {
        lib << "a" << i << ",oak,healthy,early,0.1,0.2\n";
        lib << "b" << i << ",oak,stressed,early,0.8,0.9\n";
    }
    lib.close();
    const CmdResult r = run_cli(
        "split --in cli_scratch/manual.csv --label-key composite --train-frac 0.75 --seed 3 "
        "--out-train cli_scratch/ctr.csv --out-test cli_scratch/cte.csv");
    REQUIRE(r.code == 0);
    // Stratified over the composite key: both health states keep 3/1 splits.
    const std::string train_text = slurp("cli_scratch/ctr.csv");
    const std::string test_text = slurp("cli_scratch/cte.csv");
    CHECK(std::count(train_text.begin(), train_text.end(), '\n') == 7);
    CHECK(std::count(test_text.begin(), test_text.end(), '\n') == 3);
    CHECK(test_text.find("healthy") != std::string::npos);
    CHECK(test_text.find("stressed") != std::string::npos);
}
