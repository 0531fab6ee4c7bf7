#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "speclab/classifiers.hpp"
#include "speclab/error.hpp"
#include "speclab/format.hpp"
#include "speclab/interpret.hpp"
#include "speclab/io.hpp"
#include "speclab/net.hpp"
#include "speclab/spectra.hpp"
#include "speclab/synth.hpp"
#include "speclab/version.hpp"

namespace {

using namespace speclab;

std::string utc_now() {
    const std::time_t t =
        std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// Run log written next to each subcommand's primary output. Carries
/// timestamps, so it is the one output that is not byte-reproducible.
struct Manifest {
    std::string subcommand;
    nlohmann::ordered_json parameters = nlohmann::ordered_json::object();
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    bool has_seed = false;
    std::uint64_t seed = 0;
    std::string started = utc_now();

    void write(const std::string& path) const {
        nlohmann::ordered_json root;
        root["tool"] = "speclab";
        root["tool_version"] = kVersion;
        root["subcommand"] = subcommand;
        root["parameters"] = parameters;
        root["inputs"] = inputs;
        root["outputs"] = outputs;
        if (has_seed) root["seed"] = seed;
        root["started_utc"] = started;
        root["finished_utc"] = utc_now();
        write_file_atomic(path, root.dump(2) + "\n");
    }
};

LabelKey label_key_from_flag(const std::string& flag) {
    return flag == "composite" ? LabelKey::SpeciesHealthStage : LabelKey::Species;
}

SpectralLibrary load_library(const std::string& path, LabelKey key) {
    SpectralLibrary lib = parse_library(read_text_file(path));
    lib.label_key = key;
    return lib;
}

LoadedModel load_model(const std::string& path) {
    return model_from_json(read_text_file(path));
}

struct SynthOpts {
    int classes = 3;
    int per_class = 10;
    std::size_t bands = 2152;
    double noise = 0.01;
    int features = 3;
    std::uint64_t seed = 0;
    std::string out;
    std::string templates;
};

void run_synth(const SynthOpts& o) {
    if (o.bands == 0) throw Error(ErrorCode::Usage, "need at least 1 band");
    Manifest mf;
    mf.subcommand = "synth";

    SynthSpec spec;
    spec.n_classes = o.classes;
    spec.per_class = o.per_class;
    spec.grid = uniform_grid(o.bands);
    spec.noise_sigma = o.noise;
    spec.features_per_class = o.features;
    spec.seed = o.seed;

    const SynthLibrary lib = generate_library(spec);
    write_file_atomic(o.out, serialize_library(lib.library));
    mf.outputs.push_back(o.out);
    if (!o.templates.empty()) {
        write_file_atomic(o.templates, templates_json(lib));
        mf.outputs.push_back(o.templates);
    }

    mf.parameters = {{"classes", o.classes},   {"per_class", o.per_class},
                     {"bands", o.bands},       {"noise", o.noise},
                     {"features_per_class", o.features}, {"seed", o.seed},
                     {"out", o.out}};
    if (!o.templates.empty()) mf.parameters["templates"] = o.templates;
    mf.has_seed = true;
    mf.seed = o.seed;
    mf.write(o.out + ".manifest.json");

    std::printf("wrote %zu spectra (%d classes, %zu bands) to %s\n",
                lib.library.spectra.size(), o.classes, o.bands, o.out.c_str());
}

struct SplitOpts {
    std::string in;
    double train_frac = 0.8;
    std::uint64_t seed = 0;
    std::string label_key = "species";
    std::string out_train;
    std::string out_test;
};

void run_split(const SplitOpts& o) {
    Manifest mf;
    mf.subcommand = "split";
    mf.inputs.push_back(o.in);

    const SpectralLibrary lib = load_library(o.in, label_key_from_flag(o.label_key));
    const auto [train_set, test_set] = stratified_split(lib, o.train_frac, o.seed);
    write_file_atomic(o.out_train, serialize_library(train_set));
    write_file_atomic(o.out_test, serialize_library(test_set));
    mf.outputs = {o.out_train, o.out_test};

    mf.parameters = {{"in", o.in},
                     {"train_frac", o.train_frac},
                     {"seed", o.seed},
                     {"label_key", o.label_key},
                     {"out_train", o.out_train},
                     {"out_test", o.out_test}};
    mf.has_seed = true;
    mf.seed = o.seed;
    mf.write(o.out_train + ".manifest.json");

    std::printf("split %zu spectra: %zu train -> %s, %zu test -> %s\n", lib.spectra.size(),
                train_set.spectra.size(), o.out_train.c_str(), test_set.spectra.size(),
                o.out_test.c_str());
}

struct TrainOpts {
    std::string train;
    int hidden = 128;
    int epochs = 2000;
    int batch = 32;
    double lr = 1e-3;
    std::string optimizer = "adam";
    std::string label_key = "species";
    std::uint64_t seed = 0;
    std::string out;
    std::string history;
};

void run_train(const TrainOpts& o) {
    Manifest mf;
    mf.subcommand = "train";
    mf.inputs.push_back(o.train);

    const SpectralLibrary lib = load_library(o.train, label_key_from_flag(o.label_key));
    TrainConfig cfg;
    cfg.epochs = o.epochs;
    cfg.batch_size = o.batch;
    cfg.learning_rate = o.lr;
    cfg.optimizer =
        o.optimizer == "sgd" ? TrainConfig::Optimizer::Sgd : TrainConfig::Optimizer::Adam;
    cfg.seed = o.seed;
    cfg.hidden_size = o.hidden;
    cfg.label_key = label_key_from_flag(o.label_key);

    const TrainResult result = train(lib, cfg);
    write_file_atomic(o.out, model_to_json(result.net, cfg));
    mf.outputs.push_back(o.out);
    if (!o.history.empty()) {
        write_file_atomic(o.history, history_to_csv(result.history));
        mf.outputs.push_back(o.history);
    }

    mf.parameters = {{"train", o.train},     {"hidden", o.hidden},
                     {"epochs", o.epochs},   {"batch", o.batch},
                     {"lr", o.lr},           {"optimizer", o.optimizer},
                     {"label_key", o.label_key}, {"seed", o.seed},
                     {"out", o.out}};
    if (!o.history.empty()) mf.parameters["history"] = o.history;
    mf.has_seed = true;
    mf.seed = o.seed;
    mf.write(o.out + ".manifest.json");

    const EpochRecord& last = result.history.records.back();
    std::printf("trained net D=%zu H=%zu C=%zu, %d epochs; final loss %s, train accuracy %s\n",
                result.net.input_dim(), result.net.hidden_dim(), result.net.output_dim(),
                o.epochs, fmt_fixed(last.loss, 4).c_str(), fmt_fixed(last.accuracy, 4).c_str());
}

struct EvaluateOpts {
    std::string model;
    std::string test;
    std::string metrics;
    std::string confusion;
};

void run_evaluate(const EvaluateOpts& o) {
    Manifest mf;
    mf.subcommand = "evaluate";
    mf.inputs = {o.model, o.test};

    const LoadedModel loaded = load_model(o.model);
    const DenseNet& net = loaded.net;
    const SpectralLibrary test_set = load_library(o.test, loaded.config.label_key);

    if (test_set.grid.bands() != net.input_dim()) {
        throw Error(ErrorCode::Dimension,
                    "test library has " + std::to_string(test_set.grid.bands()) +
                        " bands, model expects " + std::to_string(net.input_dim()));
    }
    if (test_set.grid.wavelengths_nm != net.grid.wavelengths_nm) {
        throw Error(ErrorCode::Dimension, "test wavelengths differ from the model grid");
    }

    std::vector<int> truth;
    truth.reserve(test_set.spectra.size());
    for (const Spectrum& s : test_set.spectra) {
        const std::string label = label_of(s, test_set.label_key);
        const int idx = net.classes.find(label);
        if (idx < 0) {
            throw Error(ErrorCode::Usage,
                        "test label \"" + label + "\" is not one of the model's classes");
        }
        truth.push_back(idx);
    }

    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<int> preds = predict(net, test_set);
    const auto t1 = std::chrono::steady_clock::now();
    const EvalReport rep =
        evaluate(preds, truth, net.output_dim(), std::chrono::duration<double>(t1 - t0).count());

    nlohmann::ordered_json m;
    m["accuracy"] = rep.accuracy;
    m["balanced_accuracy"] = rep.balanced_accuracy;
    m["f1_weighted"] = rep.weighted_f1;
    m["n_test"] = test_set.spectra.size();
    m["n_classes"] = rep.n_classes;
    write_file_atomic(o.metrics, m.dump(2) + "\n");

    std::string csv = "label";
    for (const std::string& l : net.classes.labels) csv += "," + l;
    csv += '\n';
    for (std::size_t t = 0; t < rep.n_classes; ++t) {
        csv += net.classes.labels[t];
        for (std::size_t p = 0; p < rep.n_classes; ++p) {
            csv += ',';
            csv += std::to_string(rep.confusion_at(t, p));
        }
        csv += '\n';
    }
    write_file_atomic(o.confusion, csv);

    mf.outputs = {o.metrics, o.confusion};
    mf.parameters = {{"model", o.model},
                     {"test", o.test},
                     {"metrics", o.metrics},
                     {"confusion", o.confusion}};
    mf.write(o.metrics + ".manifest.json");

    std::printf("%-18s %8s\n", "metric", "value");
    std::printf("%-18s %8s\n", "accuracy", fmt_fixed(rep.accuracy, 4).c_str());
    std::printf("%-18s %8s\n", "balanced_accuracy", fmt_fixed(rep.balanced_accuracy, 4).c_str());
    std::printf("%-18s %8s\n", "f1_weighted", fmt_fixed(rep.weighted_f1, 4).c_str());
    std::printf("%-18s %8zu\n", "n_test", test_set.spectra.size());
    std::printf("%-18s %8zu\n", "n_classes", rep.n_classes);
}

struct CompareOpts {
    std::string train;
    std::string test;
    std::string models = "lda,ridge,nearest_centroid,gaussian_nb,knn,logistic";
    double shrinkage = 0.1;
    std::string label_key = "species";
    std::string out;
};

void run_compare(const CompareOpts& o) {
    Manifest mf;
    mf.subcommand = "compare";
    mf.inputs = {o.train, o.test};

    std::vector<ModelKind> kinds;
    for (std::string_view token : split(o.models, ',')) {
        if (token.empty()) throw Error(ErrorCode::Usage, "empty model name in --models");
        kinds.push_back(model_kind_from_flag(std::string(token)));
    }

    const LabelKey key = label_key_from_flag(o.label_key);
    const SpectralLibrary train_set = load_library(o.train, key);
    const SpectralLibrary test_set = load_library(o.test, key);

    const ComparisonTable table = compare(train_set, test_set, kinds, o.shrinkage);
    write_file_atomic(o.out, comparison_csv(table));

    mf.outputs = {o.out};
    nlohmann::ordered_json names = nlohmann::ordered_json::array();
    for (ModelKind k : kinds) names.push_back(model_kind_name(k));
    mf.parameters = {{"train", o.train},         {"test", o.test},
                     {"models", names},          {"shrinkage", o.shrinkage},
                     {"label_key", o.label_key}, {"out", o.out}};
    mf.write(o.out + ".manifest.json");

    std::size_t name_w = 5;
    for (const ComparisonRow& row : table.rows) name_w = std::max(name_w, row.name.size());
    std::printf("%-*s  %8s  %17s  %11s  %8s\n", static_cast<int>(name_w), "model", "accuracy",
                "balanced_accuracy", "f1_weighted", "time_s");
    for (const ComparisonRow& row : table.rows) {
        if (row.report) {
            std::printf("%-*s  %8s  %17s  %11s  %8s\n", static_cast<int>(name_w),
                        row.name.c_str(), fmt_fixed(row.report->accuracy, 4).c_str(),
                        fmt_fixed(row.report->balanced_accuracy, 4).c_str(),
                        fmt_fixed(row.report->weighted_f1, 4).c_str(),
                        fmt_fixed(row.report->wall_time_s, 3).c_str());
        } else {
            std::printf("%-*s  %8s  %17s  %11s  %8s\n", static_cast<int>(name_w),
                        row.name.c_str(), "error", "error", "error", "error");
        }
    }
    for (const ComparisonRow& row : table.rows) {
        if (!row.report) std::printf("%s failed: %s\n", row.name.c_str(), row.error.c_str());
    }
}

struct InterpretOpts {
    std::string model;
    std::string library;
    double std_threshold = 0.1;
    double mag_threshold = 1.0;
    std::string out_dir;
};

void run_interpret(const InterpretOpts& o) {
    Manifest mf;
    mf.subcommand = "interpret";
    mf.inputs = {o.model, o.library};

    const LoadedModel loaded = load_model(o.model);
    const SpectralLibrary lib = load_library(o.library, loaded.config.label_key);

    InterpretParams params;
    params.std_threshold = o.std_threshold;
    params.magnitude_threshold = o.mag_threshold;
    const std::vector<std::string> written =
        write_interpret_report(o.out_dir, loaded.net, lib, params);

    mf.outputs = written;
    mf.parameters = {{"model", o.model},
                     {"library", o.library},
                     {"std_threshold", o.std_threshold},
                     {"mag_threshold", o.mag_threshold},
                     {"out_dir", o.out_dir}};
    mf.write(o.out_dir + "/manifest.json");

    const ActiveNeuronSet active = active_neurons(loaded.net.w1, o.std_threshold);
    std::printf("wrote %zu report files to %s (%zu of %zu neurons active)\n", written.size(),
                o.out_dir.c_str(), active.indices.size(), loaded.net.hidden_dim());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"speclab: train, compare, and inspect spectral-library classifiers"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);
    const std::string footer =
        "Exit codes: 2 usage, 3 I/O, 4 malformed file, 5 dimension mismatch, 6 numeric failure.";
    app.footer(footer);

    SynthOpts synth_opts;
    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic spectral library");
    synth->footer(footer);
    synth->add_option("--classes", synth_opts.classes, "number of classes")
        ->capture_default_str();
    synth->add_option("--per-class", synth_opts.per_class, "spectra per class")
        ->capture_default_str();
    synth->add_option("--bands", synth_opts.bands, "wavelength bands over 400-2500 nm")
        ->capture_default_str();
    synth->add_option("--noise", synth_opts.noise, "iid Gaussian noise sigma")
        ->capture_default_str();
    synth->add_option("--features-per-class", synth_opts.features, "absorption wells per class")
        ->capture_default_str();
    synth->add_option("--seed", synth_opts.seed, "random seed")->capture_default_str();
    synth->add_option("--out", synth_opts.out, "output library CSV")->required();
    synth->add_option("--templates", synth_opts.templates, "optional template JSON sidecar");

    SplitOpts split_opts;
    CLI::App* split_cmd = app.add_subcommand("split", "stratified train/test split");
    split_cmd->footer(footer);
    split_cmd->add_option("--in", split_opts.in, "input library CSV")->required();
    split_cmd->add_option("--train-frac", split_opts.train_frac, "train fraction in (0,1)")
        ->capture_default_str();
    split_cmd->add_option("--seed", split_opts.seed, "random seed")->capture_default_str();
    split_cmd->add_option("--label-key", split_opts.label_key, "species|composite")
        ->check(CLI::IsMember({"species", "composite"}))
        ->capture_default_str();
    split_cmd->add_option("--out-train", split_opts.out_train, "train CSV")->required();
    split_cmd->add_option("--out-test", split_opts.out_test, "test CSV")->required();

    TrainOpts train_opts;
    CLI::App* train_cmd = app.add_subcommand("train", "train the two-layer classifier");
    train_cmd->footer(footer);
    train_cmd->add_option("--train", train_opts.train, "training library CSV")->required();
    train_cmd->add_option("--hidden", train_opts.hidden, "hidden layer size")
        ->capture_default_str();
    train_cmd->add_option("--epochs", train_opts.epochs, "training epochs")
        ->capture_default_str();
    train_cmd->add_option("--batch", train_opts.batch, "minibatch size")->capture_default_str();
    train_cmd->add_option("--lr", train_opts.lr, "learning rate")->capture_default_str();
    train_cmd->add_option("--optimizer", train_opts.optimizer, "adam|sgd")
        ->check(CLI::IsMember({"adam", "sgd"}))
        ->capture_default_str();
    train_cmd->add_option("--label-key", train_opts.label_key, "species|composite")
        ->check(CLI::IsMember({"species", "composite"}))
        ->capture_default_str();
    train_cmd->add_option("--seed", train_opts.seed, "random seed")->capture_default_str();
    train_cmd->add_option("--out", train_opts.out, "model JSON")->required();
    train_cmd->add_option("--history", train_opts.history, "per-epoch loss/accuracy CSV");

    EvaluateOpts eval_opts;
    CLI::App* eval_cmd = app.add_subcommand("evaluate", "score a trained model on a test set");
    eval_cmd->footer(footer);
    eval_cmd->add_option("--model", eval_opts.model, "model JSON")->required();
    eval_cmd->add_option("--test", eval_opts.test, "test library CSV")->required();
    eval_cmd->add_option("--metrics", eval_opts.metrics, "metrics JSON")->required();
    eval_cmd->add_option("--confusion", eval_opts.confusion, "confusion matrix CSV")->required();

    CompareOpts compare_opts;
    CLI::App* compare_cmd =
        app.add_subcommand("compare", "fit and score the baseline classifiers");
    compare_cmd->footer(footer);
    compare_cmd->add_option("--train", compare_opts.train, "training library CSV")->required();
    compare_cmd->add_option("--test", compare_opts.test, "test library CSV")->required();
    compare_cmd->add_option("--models", compare_opts.models, "comma-separated model list")
        ->capture_default_str();
    compare_cmd->add_option("--shrinkage", compare_opts.shrinkage, "LDA covariance shrinkage")
        ->capture_default_str();
    compare_cmd->add_option("--label-key", compare_opts.label_key, "species|composite")
        ->check(CLI::IsMember({"species", "composite"}))
        ->capture_default_str();
    compare_cmd->add_option("--out", compare_opts.out, "comparison table CSV")->required();

    InterpretOpts interp_opts;
    CLI::App* interp_cmd =
        app.add_subcommand("interpret", "weight-inspection report for a trained model");
    interp_cmd->footer(footer);
    interp_cmd->add_option("--model", interp_opts.model, "model JSON")->required();
    interp_cmd->add_option("--library", interp_opts.library, "library CSV for class means")
        ->required();
    interp_cmd->add_option("--std-threshold", interp_opts.std_threshold,
                           "active-neuron row std threshold")
        ->capture_default_str();
    interp_cmd->add_option("--mag-threshold", interp_opts.mag_threshold,
                           "class-reliance |weight| threshold")
        ->capture_default_str();
    interp_cmd->add_option("--out-dir", interp_opts.out_dir, "report directory")->required();

    try {
        app.parse(argc, argv);
        if (synth->parsed()) run_synth(synth_opts);
        if (split_cmd->parsed()) run_split(split_opts);
        if (train_cmd->parsed()) run_train(train_opts);
        if (eval_cmd->parsed()) run_evaluate(eval_opts);
        if (compare_cmd->parsed()) run_compare(compare_opts);
        if (interp_cmd->parsed()) run_interpret(interp_opts);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const Error& e) {
        std::fprintf(stderr, "speclab: error: %s\n", e.what());
        return static_cast<int>(e.code());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "speclab: error: %s\n", e.what());
        return 1;
    }
    return 0;
}
