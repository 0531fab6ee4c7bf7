#pragma once

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "speclab/linalg.hpp"
#include "speclab/spectra.hpp"

namespace speclab {

/// Gaussian classifier with a shared covariance, regularized by convex
/// shrinkage toward a scaled identity so it stays invertible when the band
/// count exceeds the sample count.
struct LdaModel {
    Matrix class_means;              // C x D
    Matrix covariance_factor;       // lower Cholesky factor of the shrunk covariance
    std::vector<double> log_priors;  // C
    double shrinkage = 0.1;
    ClassIndex classes;
};

/// Pooled within-class covariance, shrunk as (1-l)*Sigma + l*(tr(Sigma)/D)*I,
/// then Cholesky-factored. Priors are empirical class frequencies.
LdaModel fit_lda(const SpectralLibrary& train_set, double shrinkage = 0.1);

/// argmax_c log_prior[c] - 0.5*(s-mu_c)^T Sigma^-1 (s-mu_c), evaluated with
/// one triangular solve per class. Ties go to the lowest class index.
int predict_lda(const LdaModel& model, std::span<const double> s);

enum class BaselineKind {
    NearestCentroid,
    GaussianNB,
    RidgeClassifier,
    KNearestNeighbors,
    LogisticRegression,
};

struct NearestCentroidModel {
    Matrix means;  // C x D
};

struct GaussianNbModel {
    Matrix means;      // C x D
    Matrix variances;  // C x D, floored at 1e-9
    std::vector<double> log_priors;
};

struct RidgeModel {
    Matrix weights;  // C x D, one-vs-rest regressors on +-1 targets
    std::vector<double> intercepts;
};

struct KnnModel {
    Matrix points;  // N x D training spectra
    std::vector<int> labels;
    int k = 5;
    std::size_t n_classes = 0;
};

struct LogisticModel {
    Matrix weights;  // C x D
    std::vector<double> biases;
};

struct BaselineModel {
    BaselineKind kind;
    std::variant<NearestCentroidModel, GaussianNbModel, RidgeModel, KnnModel, LogisticModel>
        model;
};

BaselineModel fit_baseline(BaselineKind kind, const SpectralLibrary& train_set);
int predict_baseline(const BaselineModel& model, std::span<const double> s);

/// Classification metrics over integer labels in [0, C).
struct EvalReport {
    double accuracy = 0.0;
    double balanced_accuracy = 0.0;
    double weighted_f1 = 0.0;
    double wall_time_s = 0.0;
    std::size_t n_classes = 0;
    std::vector<long long> confusion;  // C x C row-major, rows = truth

    long long confusion_at(std::size_t truth, std::size_t pred) const {
        return confusion[truth * n_classes + pred];
    }
};

/// accuracy = fraction correct; balanced accuracy = mean recall over classes
/// present in the truth; weighted F1 = support-weighted mean of per-class F1
/// (0 when precision+recall is 0).
EvalReport evaluate(const std::vector<int>& predictions, const std::vector<int>& truth,
                    std::size_t n_classes, double wall_time_s);

enum class ModelKind { Lda, NearestCentroid, GaussianNB, RidgeClassifier, KNearestNeighbors, LogisticRegression };

const char* model_kind_name(ModelKind kind);
/// Parses the CLI spelling (lda, ridge, nearest_centroid, gaussian_nb, knn,
/// logistic).
ModelKind model_kind_from_flag(const std::string& flag);

struct ComparisonRow {
    std::string name;
    std::optional<EvalReport> report;  // empty on failure
    std::string error;                 // failure message when report is empty
};

struct ComparisonTable {
    std::vector<ComparisonRow> rows;
};

/// Sorts rows by accuracy descending with ties broken by name ascending;
/// failed rows sink to the bottom (alphabetical among themselves).
ComparisonTable make_table(std::vector<ComparisonRow> rows);

/// Fits and scores each requested model on the train/test pair, timing
/// fit+predict per model. A model that throws is kept as an error row.
ComparisonTable compare(const SpectralLibrary& train_set, const SpectralLibrary& test_set,
                        const std::vector<ModelKind>& kinds, double lda_shrinkage = 0.1);

/// CSV: model,accuracy,balanced_accuracy,f1_weighted,time_s (metrics with 4
/// decimals, time with 3; failed rows carry "error" in every metric column).
std::string comparison_csv(const ComparisonTable& table);

}  // namespace speclab
