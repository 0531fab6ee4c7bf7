#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "speclab/linalg.hpp"
#include "speclab/rng.hpp"
#include "speclab/spectra.hpp"

namespace speclab {

/// Dense two-layer classifier: hidden ReLU layer then softmax output.
/// w1 is H x D, w2 is C x H, both row-major.
struct DenseNet {
    Matrix w1;
    std::vector<double> b1;
    Matrix w2;
    std::vector<double> b2;
    ClassIndex classes;
    WavelengthGrid grid;

    std::size_t input_dim() const { return w1.cols; }
    std::size_t hidden_dim() const { return w1.rows; }
    std::size_t output_dim() const { return w2.rows; }
};

struct TrainConfig {
    enum class Optimizer { Adam, Sgd };

    int epochs = 2000;
    int batch_size = 32;
    double learning_rate = 1e-3;
    Optimizer optimizer = Optimizer::Adam;
    std::uint64_t seed = 0;
    int hidden_size = 128;
    LabelKey label_key = LabelKey::Species;
};

// Adam moment constants (fixed, not configurable).
inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEpsilon = 1e-7;

struct EpochRecord {
    int epoch = 0;  // 1-based
    double loss = 0.0;
    double accuracy = 0.0;
};

struct TrainHistory {
    std::vector<EpochRecord> records;
};

struct TrainResult {
    DenseNet net;
    TrainHistory history;
};

/// Gradients with the same shapes as the DenseNet parameters.
struct Gradients {
    Matrix w1;
    std::vector<double> b1;
    Matrix w2;
    std::vector<double> b2;
};

/// Glorot-uniform weights (each layer uniform on +-sqrt(6/(fan_in+fan_out))),
/// zero biases. The generator is consumed in a fixed order: all of w1
/// row-major, then all of w2 row-major.
DenseNet init_net(const WavelengthGrid& grid, const ClassIndex& classes, std::size_t hidden,
                  Rng& rng);

/// Same, with a synthetic 1..D nm grid and generated class labels; for
/// callers that only care about parameter shapes.
DenseNet init_net(std::size_t input_dim, std::size_t hidden, std::size_t n_classes,
                  std::uint64_t seed);

/// Hidden-layer output: ReLU(b1 + w1 s), elementwise >= 0.
std::vector<double> forward_hidden(const DenseNet& net, std::span<const double> s);

/// Pre-softmax scores: b2 + w2 * forward_hidden(s).
std::vector<double> forward_logits(const DenseNet& net, std::span<const double> s);

/// Class probabilities: softmax of the logits, computed with max
/// subtraction. Components sum to 1 within 1e-9.
std::vector<double> forward_proba(const DenseNet& net, std::span<const double> s);

/// -ln(probs[label]), with probs[label] floored at 1e-12.
double loss_sparse_ce(std::span<const double> probs, int label);

/// Analytic gradient of loss_sparse_ce(forward_proba(net, s), label) with
/// respect to every parameter. The ReLU subgradient at exactly 0 is 0.
Gradients backward(const DenseNet& net, std::span<const double> s, int label);

/// Mini-batch training. Per epoch: seeded shuffle, consecutive batches (the
/// last may be short), gradient averaged over the actual batch size, one
/// optimizer update per batch. One generator seeded with cfg.seed drives
/// initialization and every shuffle, so a fixed (data, config) pair yields
/// bit-identical results.
TrainResult train(const SpectralLibrary& train_set, const TrainConfig& cfg);

/// Argmax of forward_proba, ties toward the lowest class index.
int predict_one(const DenseNet& net, std::span<const double> s);
std::vector<int> predict(const DenseNet& net, const std::vector<std::vector<double>>& spectra);
std::vector<int> predict(const DenseNet& net, const SpectralLibrary& lib);

/// Model serialization (JSON, full round-trip precision) and per-epoch
/// history (CSV: epoch,loss,accuracy).
std::string model_to_json(const DenseNet& net, const TrainConfig& cfg);
struct LoadedModel {
    DenseNet net;
    TrainConfig config;
};
LoadedModel model_from_json(const std::string& text);
std::string history_to_csv(const TrainHistory& history);

const char* optimizer_name(TrainConfig::Optimizer opt);
const char* label_key_name(LabelKey key);

}  // namespace speclab
