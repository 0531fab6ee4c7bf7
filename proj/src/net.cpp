#include "speclab/net.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "speclab/error.hpp"
#include "speclab/format.hpp"

namespace speclab {

namespace {

constexpr double kLossFloor = 1e-12;

void check_input_dim(const DenseNet& net, std::span<const double> s) {
    if (s.size() != net.input_dim()) {
        throw Error(ErrorCode::Dimension, "spectrum has " + std::to_string(s.size()) +
                                              " bands, network expects " +
                                              std::to_string(net.input_dim()));
    }
}

/// Per-sample activations, reused across the training loop.
struct Workspace {
    std::vector<double> pre;      // H, pre-activation
    std::vector<double> hidden;   // H
    std::vector<double> logits;   // C
    std::vector<double> probs;    // C
    std::vector<double> dlogits;  // C
    std::vector<double> dpre;     // H

    explicit Workspace(const DenseNet& net)
        : pre(net.hidden_dim()),
          hidden(net.hidden_dim()),
          logits(net.output_dim()),
          probs(net.output_dim()),
          dlogits(net.output_dim()),
          dpre(net.hidden_dim()) {}
};

void forward_into(const DenseNet& net, std::span<const double> s, Workspace& ws) {
    const std::size_t hidden = net.hidden_dim();
    for (std::size_t i = 0; i < hidden; ++i) {
        const double pre = net.b1[i] + dot(net.w1.row(i), s);
        ws.pre[i] = pre;
        ws.hidden[i] = pre > 0.0 ? pre : 0.0;
    }
    const std::size_t classes = net.output_dim();
    for (std::size_t c = 0; c < classes; ++c) {
        ws.logits[c] = net.b2[c] + dot(net.w2.row(c), ws.hidden);
    }
    const double peak = *std::max_element(ws.logits.begin(), ws.logits.end());
    double sum = 0.0;
    for (std::size_t c = 0; c < classes; ++c) {
        ws.probs[c] = std::exp(ws.logits[c] - peak);
        sum += ws.probs[c];
    }
    for (std::size_t c = 0; c < classes; ++c) ws.probs[c] /= sum;
}

/// Adds this sample's gradient into `grads`; returns the sample loss.
double accumulate_gradient(const DenseNet& net, std::span<const double> s, int label,
                           Workspace& ws, Gradients& grads) {
    forward_into(net, s, ws);
    const std::size_t classes = net.output_dim();
    const std::size_t hidden = net.hidden_dim();
    const std::size_t bands = net.input_dim();

    for (std::size_t c = 0; c < classes; ++c) {
        ws.dlogits[c] = ws.probs[c] - (static_cast<int>(c) == label ? 1.0 : 0.0);
    }
    for (std::size_t c = 0; c < classes; ++c) {
        const double g = ws.dlogits[c];
        grads.b2[c] += g;
        auto grow = grads.w2.row(c);
        for (std::size_t j = 0; j < hidden; ++j) grow[j] += g * ws.hidden[j];
    }
    for (std::size_t j = 0; j < hidden; ++j) {
        double dh = 0.0;
        for (std::size_t c = 0; c < classes; ++c) dh += net.w2.at(c, j) * ws.dlogits[c];
        ws.dpre[j] = ws.pre[j] > 0.0 ? dh : 0.0;  // subgradient at 0 is 0
    }
    for (std::size_t j = 0; j < hidden; ++j) {
        const double g = ws.dpre[j];
        grads.b1[j] += g;
        if (g == 0.0) continue;
        auto grow = grads.w1.row(j);
        for (std::size_t d = 0; d < bands; ++d) grow[d] += g * s[d];
    }
    return loss_sparse_ce(ws.probs, label);
}

Gradients zero_gradients(const DenseNet& net) {
    Gradients g;
    g.w1 = Matrix(net.hidden_dim(), net.input_dim(), 0.0);
    g.b1.assign(net.hidden_dim(), 0.0);
    g.w2 = Matrix(net.output_dim(), net.hidden_dim(), 0.0);
    g.b2.assign(net.output_dim(), 0.0);
    return g;
}

struct AdamState {
    Matrix mw1, vw1, mw2, vw2;
    std::vector<double> mb1, vb1, mb2, vb2;
    long step = 0;

    explicit AdamState(const DenseNet& net)
        : mw1(net.hidden_dim(), net.input_dim()),
          vw1(net.hidden_dim(), net.input_dim()),
          mw2(net.output_dim(), net.hidden_dim()),
          vw2(net.output_dim(), net.hidden_dim()),
          mb1(net.hidden_dim(), 0.0),
          vb1(net.hidden_dim(), 0.0),
          mb2(net.output_dim(), 0.0),
          vb2(net.output_dim(), 0.0) {}
};

void adam_update(std::vector<double>& param, const std::vector<double>& grad,
                 std::vector<double>& m, std::vector<double>& v, double lr, double c1,
                 double c2) {
    for (std::size_t i = 0; i < param.size(); ++i) {
        m[i] = kAdamBeta1 * m[i] + (1.0 - kAdamBeta1) * grad[i];
        v[i] = kAdamBeta2 * v[i] + (1.0 - kAdamBeta2) * grad[i] * grad[i];
        param[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + kAdamEpsilon);
    }
}

void sgd_update(std::vector<double>& param, const std::vector<double>& grad, double lr) {
    for (std::size_t i = 0; i < param.size(); ++i) param[i] -= lr * grad[i];
}

ClassIndex placeholder_classes(std::size_t n) {
    ClassIndex index;
    index.labels.reserve(n);
    for (std::size_t c = 0; c < n; ++c) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "class_%03zu", c);
        index.labels.push_back(buf);
    }
    return index;
}

}  // namespace

DenseNet init_net(const WavelengthGrid& grid, const ClassIndex& classes, std::size_t hidden,
                  Rng& rng) {
    const std::size_t bands = grid.bands();
    const std::size_t n_classes = classes.size();
    if (bands < 1 || hidden < 1 || n_classes < 1) {
        throw Error(ErrorCode::Usage, "network dimensions must be at least 1");
    }
    DenseNet net;
    net.grid = grid;
    net.classes = classes;
    net.w1 = Matrix(hidden, bands);
    net.b1.assign(hidden, 0.0);
    net.w2 = Matrix(n_classes, hidden);
    net.b2.assign(n_classes, 0.0);

    const double limit1 = std::sqrt(6.0 / static_cast<double>(bands + hidden));
    for (double& w : net.w1.data) w = rng.uniform(-limit1, limit1);
    const double limit2 = std::sqrt(6.0 / static_cast<double>(hidden + n_classes));
    for (double& w : net.w2.data) w = rng.uniform(-limit2, limit2);
    return net;
}

DenseNet init_net(std::size_t input_dim, std::size_t hidden, std::size_t n_classes,
                  std::uint64_t seed) {
    WavelengthGrid grid;
    grid.wavelengths_nm.resize(input_dim);
    for (std::size_t d = 0; d < input_dim; ++d) {
        grid.wavelengths_nm[d] = static_cast<double>(d + 1);
    }
    Rng rng(seed);
    return init_net(grid, placeholder_classes(n_classes), hidden, rng);
}

std::vector<double> forward_hidden(const DenseNet& net, std::span<const double> s) {
    check_input_dim(net, s);
    std::vector<double> h(net.hidden_dim());
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double pre = net.b1[i] + dot(net.w1.row(i), s);
        h[i] = pre > 0.0 ? pre : 0.0;
    }
    return h;
}

std::vector<double> forward_logits(const DenseNet& net, std::span<const double> s) {
    check_input_dim(net, s);
    Workspace ws(net);
    forward_into(net, s, ws);
    return ws.logits;
}

std::vector<double> forward_proba(const DenseNet& net, std::span<const double> s) {
    check_input_dim(net, s);
    Workspace ws(net);
    forward_into(net, s, ws);
    return ws.probs;
}

double loss_sparse_ce(std::span<const double> probs, int label) {
    if (label < 0 || static_cast<std::size_t>(label) >= probs.size()) {
        throw Error(ErrorCode::Usage, "label " + std::to_string(label) + " out of range [0," +
                                          std::to_string(probs.size()) + ")");
    }
    return -std::log(std::max(probs[label], kLossFloor));
}

Gradients backward(const DenseNet& net, std::span<const double> s, int label) {
    check_input_dim(net, s);
    if (label < 0 || static_cast<std::size_t>(label) >= net.output_dim()) {
        throw Error(ErrorCode::Usage, "label " + std::to_string(label) + " out of range [0," +
                                          std::to_string(net.output_dim()) + ")");
    }
    Workspace ws(net);
    Gradients grads = zero_gradients(net);
    accumulate_gradient(net, s, label, ws, grads);
    return grads;
}

TrainResult train(const SpectralLibrary& train_set, const TrainConfig& cfg) {
    if (cfg.epochs < 1) throw Error(ErrorCode::Usage, "epochs must be at least 1");
    if (cfg.batch_size < 1) throw Error(ErrorCode::Usage, "batch size must be at least 1");
    if (!(cfg.learning_rate > 0.0)) throw Error(ErrorCode::Usage, "learning rate must be > 0");
    if (cfg.hidden_size < 1) throw Error(ErrorCode::Usage, "hidden size must be at least 1");
    if (train_set.spectra.empty()) throw Error(ErrorCode::Usage, "training set is empty");

    SpectralLibrary keyed = train_set;
    keyed.label_key = cfg.label_key;
    auto [classes, labels] = encode_labels(keyed);
    const std::size_t n = keyed.spectra.size();
    if (static_cast<std::size_t>(cfg.batch_size) > n) {
        throw Error(ErrorCode::Usage, "batch size " + std::to_string(cfg.batch_size) +
                                          " exceeds training-set size " + std::to_string(n));
    }

    Rng rng(cfg.seed);
    DenseNet net = init_net(keyed.grid, classes, static_cast<std::size_t>(cfg.hidden_size), rng);

    Workspace ws(net);
    Gradients grads = zero_gradients(net);
    AdamState adam(net);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    TrainHistory history;
    history.records.reserve(cfg.epochs);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;
        std::size_t correct = 0;

        for (std::size_t start = 0; start < n; start += cfg.batch_size) {
            const std::size_t stop = std::min(n, start + cfg.batch_size);
            const double batch_n = static_cast<double>(stop - start);

            std::fill(grads.w1.data.begin(), grads.w1.data.end(), 0.0);
            std::fill(grads.b1.begin(), grads.b1.end(), 0.0);
            std::fill(grads.w2.data.begin(), grads.w2.data.end(), 0.0);
            std::fill(grads.b2.begin(), grads.b2.end(), 0.0);

            double batch_loss = 0.0;
            for (std::size_t k = start; k < stop; ++k) {
                const std::size_t idx = order[k];
                const Spectrum& s = keyed.spectra[idx];
                batch_loss += accumulate_gradient(net, s.reflectance, labels[idx], ws, grads);
                std::size_t best = 0;
                for (std::size_t c = 1; c < ws.probs.size(); ++c) {
                    if (ws.probs[c] > ws.probs[best]) best = c;
                }
                if (static_cast<int>(best) == labels[idx]) ++correct;
            }
            if (!std::isfinite(batch_loss)) {
                throw Error(ErrorCode::Numeric,
                            "non-finite loss at epoch " + std::to_string(epoch + 1) + ", batch " +
                                std::to_string(start / cfg.batch_size + 1));
            }
            epoch_loss += batch_loss;

            const double inv = 1.0 / batch_n;
            for (double& g : grads.w1.data) g *= inv;
            for (double& g : grads.b1) g *= inv;
            for (double& g : grads.w2.data) g *= inv;
            for (double& g : grads.b2) g *= inv;

            if (cfg.optimizer == TrainConfig::Optimizer::Adam) {
                ++adam.step;
                const double c1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(adam.step));
                const double c2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(adam.step));
                adam_update(net.w1.data, grads.w1.data, adam.mw1.data, adam.vw1.data,
                            cfg.learning_rate, c1, c2);
                adam_update(net.b1, grads.b1, adam.mb1, adam.vb1, cfg.learning_rate, c1, c2);
                adam_update(net.w2.data, grads.w2.data, adam.mw2.data, adam.vw2.data,
                            cfg.learning_rate, c1, c2);
                adam_update(net.b2, grads.b2, adam.mb2, adam.vb2, cfg.learning_rate, c1, c2);
            } else {
                sgd_update(net.w1.data, grads.w1.data, cfg.learning_rate);
                sgd_update(net.b1, grads.b1, cfg.learning_rate);
                sgd_update(net.w2.data, grads.w2.data, cfg.learning_rate);
                sgd_update(net.b2, grads.b2, cfg.learning_rate);
            }
        }

        EpochRecord rec;
        rec.epoch = epoch + 1;
        rec.loss = epoch_loss / static_cast<double>(n);
        rec.accuracy = static_cast<double>(correct) / static_cast<double>(n);
        history.records.push_back(rec);
    }

    return {std::move(net), std::move(history)};
}

int predict_one(const DenseNet& net, std::span<const double> s) {
    const std::vector<double> probs = forward_proba(net, s);
    std::size_t best = 0;
    for (std::size_t c = 1; c < probs.size(); ++c) {
        if (probs[c] > probs[best]) best = c;
    }
    return static_cast<int>(best);
}

std::vector<int> predict(const DenseNet& net, const std::vector<std::vector<double>>& spectra) {
    std::vector<int> out;
    out.reserve(spectra.size());
    for (const auto& s : spectra) out.push_back(predict_one(net, s));
    return out;
}

std::vector<int> predict(const DenseNet& net, const SpectralLibrary& lib) {
    std::vector<int> out;
    out.reserve(lib.spectra.size());
    for (const Spectrum& s : lib.spectra) out.push_back(predict_one(net, s.reflectance));
    return out;
}

const char* optimizer_name(TrainConfig::Optimizer opt) {
    return opt == TrainConfig::Optimizer::Adam ? "adam" : "sgd";
}

const char* label_key_name(LabelKey key) {
    return key == LabelKey::Species ? "species" : "composite";
}

std::string model_to_json(const DenseNet& net, const TrainConfig& cfg) {
    nlohmann::ordered_json root;
    root["dims"] = {{"D", net.input_dim()}, {"H", net.hidden_dim()}, {"C", net.output_dim()}};
    root["wavelengths_nm"] = net.grid.wavelengths_nm;
    root["class_labels"] = net.classes.labels;
    root["W1"] = net.w1.data;
    root["b1"] = net.b1;
    root["W2"] = net.w2.data;
    root["b2"] = net.b2;
    root["train_config"] = {{"epochs", cfg.epochs},
                            {"batch_size", cfg.batch_size},
                            {"learning_rate", cfg.learning_rate},
                            {"optimizer", optimizer_name(cfg.optimizer)},
                            {"hidden_size", cfg.hidden_size},
                            {"label_key", label_key_name(cfg.label_key)},
                            {"seed", cfg.seed}};
    root["seed"] = cfg.seed;
    return root.dump() + "\n";
}

LoadedModel model_from_json(const std::string& text) {
    nlohmann::json root;
    try {
        root = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Format, std::string("model file is not valid JSON: ") + e.what());
    }
    try {
        LoadedModel loaded;
        DenseNet& net = loaded.net;
        const std::size_t bands = root.at("dims").at("D").get<std::size_t>();
        const std::size_t hidden = root.at("dims").at("H").get<std::size_t>();
        const std::size_t n_classes = root.at("dims").at("C").get<std::size_t>();

        net.grid.wavelengths_nm = root.at("wavelengths_nm").get<std::vector<double>>();
        net.classes.labels = root.at("class_labels").get<std::vector<std::string>>();
        net.w1 = Matrix(hidden, bands);
        net.w1.data = root.at("W1").get<std::vector<double>>();
        net.b1 = root.at("b1").get<std::vector<double>>();
        net.w2 = Matrix(n_classes, hidden);
        net.w2.data = root.at("W2").get<std::vector<double>>();
        net.b2 = root.at("b2").get<std::vector<double>>();

        const auto& tc = root.at("train_config");
        TrainConfig& cfg = loaded.config;
        cfg.epochs = tc.at("epochs").get<int>();
        cfg.batch_size = tc.at("batch_size").get<int>();
        cfg.learning_rate = tc.at("learning_rate").get<double>();
        const std::string opt = tc.at("optimizer").get<std::string>();
        if (opt == "adam") {
            cfg.optimizer = TrainConfig::Optimizer::Adam;
        } else if (opt == "sgd") {
            cfg.optimizer = TrainConfig::Optimizer::Sgd;
        } else {
            throw Error(ErrorCode::Format, "unknown optimizer in model file: \"" + opt + "\"");
        }
        cfg.hidden_size = tc.at("hidden_size").get<int>();
        const std::string key = tc.value("label_key", "species");
        if (key == "species") {
            cfg.label_key = LabelKey::Species;
        } else if (key == "composite") {
            cfg.label_key = LabelKey::SpeciesHealthStage;
        } else {
            throw Error(ErrorCode::Format, "unknown label key in model file: \"" + key + "\"");
        }
        cfg.seed = root.at("seed").get<std::uint64_t>();

        if (net.grid.bands() != bands || net.w1.data.size() != hidden * bands ||
            net.b1.size() != hidden || net.w2.data.size() != n_classes * hidden ||
            net.b2.size() != n_classes || net.classes.size() != n_classes) {
            throw Error(ErrorCode::Format, "model file dimensions are inconsistent");
        }
        if (n_classes < 2) throw Error(ErrorCode::Format, "model must have at least 2 classes");
        validate_grid(net.grid);
        for (const auto* vec : {&net.w1.data, &net.b1, &net.w2.data, &net.b2}) {
            for (double v : *vec) {
                if (!std::isfinite(v)) {
                    throw Error(ErrorCode::Format, "model file contains a non-finite parameter");
                }
            }
        }
        if (!std::is_sorted(net.classes.labels.begin(), net.classes.labels.end())) {
            throw Error(ErrorCode::Format, "model class labels are not sorted");
        }
        return loaded;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Format, std::string("model file is missing fields: ") + e.what());
    }
}

std::string history_to_csv(const TrainHistory& history) {
    std::string out = "epoch,loss,accuracy\n";
    for (const EpochRecord& rec : history.records) {
        out += std::to_string(rec.epoch);
        out += ',';
        out += fmt_double(rec.loss);
        out += ',';
        out += fmt_double(rec.accuracy);
        out += '\n';
    }
    return out;
}

}  // namespace speclab
