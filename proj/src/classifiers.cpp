#include "speclab/classifiers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "speclab/error.hpp"
#include "speclab/format.hpp"

namespace speclab {

namespace {

constexpr double kRidgeAlpha = 1.0;
constexpr double kNbVarianceFloor = 1e-9;
constexpr int kKnnNeighbors = 5;
constexpr int kLogisticIterations = 500;
constexpr double kLogisticLearningRate = 1e-2;
constexpr double kLogisticL2 = 1e-4;

struct Encoded {
    Matrix x;  // N x D
    std::vector<int> y;
    ClassIndex classes;
    std::vector<std::size_t> counts;  // per class
};

Encoded encode(const SpectralLibrary& lib) {
    Encoded e;
    auto [classes, y] = encode_labels(lib);
    e.classes = std::move(classes);
    e.y = std::move(y);
    const std::size_t n = lib.spectra.size();
    const std::size_t bands = lib.grid.bands();
    e.x = Matrix(n, bands);
    for (std::size_t i = 0; i < n; ++i) {
        std::copy(lib.spectra[i].reflectance.begin(), lib.spectra[i].reflectance.end(),
                  e.x.row(i).begin());
    }
    e.counts.assign(e.classes.size(), 0);
    for (int label : e.y) ++e.counts[label];
    return e;
}

Matrix per_class_means(const Encoded& e) {
    Matrix means(e.classes.size(), e.x.cols, 0.0);
    for (std::size_t i = 0; i < e.x.rows; ++i) {
        auto row = means.row(e.y[i]);
        auto xi = e.x.row(i);
        for (std::size_t d = 0; d < e.x.cols; ++d) row[d] += xi[d];
    }
    for (std::size_t c = 0; c < means.rows; ++c) {
        const double n = static_cast<double>(e.counts[c]);
        for (double& v : means.row(c)) v /= n;
    }
    return means;
}

std::vector<double> empirical_log_priors(const Encoded& e) {
    std::vector<double> priors(e.classes.size());
    const double n = static_cast<double>(e.x.rows);
    for (std::size_t c = 0; c < priors.size(); ++c) {
        priors[c] = std::log(static_cast<double>(e.counts[c]) / n);
    }
    return priors;
}

std::size_t argmax_lowest(std::span<const double> scores) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i) {
        if (scores[i] > scores[best]) best = i;
    }
    return best;
}

void check_dim(std::size_t got, std::size_t want) {
    if (got != want) {
        throw Error(ErrorCode::Dimension, "spectrum has " + std::to_string(got) +
                                              " bands, model expects " + std::to_string(want));
    }
}

BaselineModel fit_nearest_centroid(const Encoded& e) {
    return {BaselineKind::NearestCentroid, NearestCentroidModel{per_class_means(e)}};
}

BaselineModel fit_gaussian_nb(const Encoded& e) {
    GaussianNbModel m;
    m.means = per_class_means(e);
    m.variances = Matrix(e.classes.size(), e.x.cols, 0.0);
    for (std::size_t i = 0; i < e.x.rows; ++i) {
        auto var = m.variances.row(e.y[i]);
        auto mu = m.means.row(e.y[i]);
        auto xi = e.x.row(i);
        for (std::size_t d = 0; d < e.x.cols; ++d) {
            const double diff = xi[d] - mu[d];
            var[d] += diff * diff;
        }
    }
    for (std::size_t c = 0; c < m.variances.rows; ++c) {
        const double n = static_cast<double>(e.counts[c]);
        for (double& v : m.variances.row(c)) v = std::max(v / n, kNbVarianceFloor);
    }
    m.log_priors = empirical_log_priors(e);
    return {BaselineKind::GaussianNB, std::move(m)};
}

BaselineModel fit_ridge(const Encoded& e) {
    const std::size_t n = e.x.rows;
    const std::size_t bands = e.x.cols;
    const std::size_t n_classes = e.classes.size();

    std::vector<double> mean_x(bands, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        auto xi = e.x.row(i);
        for (std::size_t d = 0; d < bands; ++d) mean_x[d] += xi[d];
    }
    for (double& v : mean_x) v /= static_cast<double>(n);

    // Gram matrix of centered data plus the ridge penalty, lower triangle.
    Matrix gram(bands, bands, 0.0);
    std::vector<double> centered(bands);
    for (std::size_t i = 0; i < n; ++i) {
        auto xi = e.x.row(i);
        for (std::size_t d = 0; d < bands; ++d) centered[d] = xi[d] - mean_x[d];
        for (std::size_t r = 0; r < bands; ++r) {
            const double cr = centered[r];
            auto grow = gram.row(r);
            for (std::size_t c = 0; c <= r; ++c) grow[c] += cr * centered[c];
        }
    }
    for (std::size_t d = 0; d < bands; ++d) gram.at(d, d) += kRidgeAlpha;
    if (!cholesky_lower(gram)) {
        throw Error(ErrorCode::Numeric, "ridge normal equations are not positive-definite");
    }

    RidgeModel m;
    m.weights = Matrix(n_classes, bands);
    m.intercepts.assign(n_classes, 0.0);
    std::vector<double> rhs(bands);
    for (std::size_t c = 0; c < n_classes; ++c) {
        const double pos = static_cast<double>(e.counts[c]);
        const double target_mean = (pos - (static_cast<double>(n) - pos)) / static_cast<double>(n);
        std::fill(rhs.begin(), rhs.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double t = (e.y[i] == static_cast<int>(c) ? 1.0 : -1.0) - target_mean;
            auto xi = e.x.row(i);
            for (std::size_t d = 0; d < bands; ++d) rhs[d] += t * (xi[d] - mean_x[d]);
        }
        const std::vector<double> z = solve_lower(gram, rhs);
        const std::vector<double> w = solve_lower_transpose(gram, z);
        std::copy(w.begin(), w.end(), m.weights.row(c).begin());
        m.intercepts[c] = target_mean - dot(w, mean_x);
    }
    return {BaselineKind::RidgeClassifier, std::move(m)};
}

BaselineModel fit_knn(const Encoded& e) {
    if (static_cast<std::size_t>(kKnnNeighbors) > e.x.rows) {
        throw Error(ErrorCode::Usage, "k=" + std::to_string(kKnnNeighbors) +
                                          " exceeds training-set size " + std::to_string(e.x.rows));
    }
    KnnModel m;
    m.points = e.x;
    m.labels = e.y;
    m.k = kKnnNeighbors;
    m.n_classes = e.classes.size();
    return {BaselineKind::KNearestNeighbors, std::move(m)};
}

BaselineModel fit_logistic(const Encoded& e) {
    const std::size_t n = e.x.rows;
    const std::size_t bands = e.x.cols;
    const std::size_t n_classes = e.classes.size();

    LogisticModel m;
    m.weights = Matrix(n_classes, bands, 0.0);
    m.biases.assign(n_classes, 0.0);

    Matrix grad_w(n_classes, bands);
    std::vector<double> grad_b(n_classes);
    std::vector<double> logits(n_classes);

    for (int iter = 0; iter < kLogisticIterations; ++iter) {
        std::fill(grad_w.data.begin(), grad_w.data.end(), 0.0);
        std::fill(grad_b.begin(), grad_b.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            auto xi = e.x.row(i);
            for (std::size_t c = 0; c < n_classes; ++c) {
                logits[c] = m.biases[c] + dot(m.weights.row(c), xi);
            }
            const double peak = *std::max_element(logits.begin(), logits.end());
            double sum = 0.0;
            for (double& l : logits) {
                l = std::exp(l - peak);
                sum += l;
            }
            for (std::size_t c = 0; c < n_classes; ++c) {
                const double delta =
                    logits[c] / sum - (e.y[i] == static_cast<int>(c) ? 1.0 : 0.0);
                grad_b[c] += delta;
                auto grow = grad_w.row(c);
                for (std::size_t d = 0; d < bands; ++d) grow[d] += delta * xi[d];
            }
        }
        const double inv = 1.0 / static_cast<double>(n);
        for (std::size_t c = 0; c < n_classes; ++c) {
            auto grow = grad_w.row(c);
            auto wrow = m.weights.row(c);
            for (std::size_t d = 0; d < bands; ++d) {
                wrow[d] -= kLogisticLearningRate * (grow[d] * inv + kLogisticL2 * wrow[d]);
            }
            m.biases[c] -= kLogisticLearningRate * grad_b[c] * inv;
        }
    }
    return {BaselineKind::LogisticRegression, std::move(m)};
}

int predict_nearest_centroid(const NearestCentroidModel& m, std::span<const double> s) {
    check_dim(s.size(), m.means.cols);
    std::vector<double> scores(m.means.rows);
    for (std::size_t c = 0; c < m.means.rows; ++c) {
        auto mu = m.means.row(c);
        double d2 = 0.0;
        for (std::size_t d = 0; d < s.size(); ++d) {
            const double diff = s[d] - mu[d];
            d2 += diff * diff;
        }
        scores[c] = -d2;
    }
    return static_cast<int>(argmax_lowest(scores));
}

int predict_gaussian_nb(const GaussianNbModel& m, std::span<const double> s) {
    check_dim(s.size(), m.means.cols);
    std::vector<double> scores(m.means.rows);
    for (std::size_t c = 0; c < m.means.rows; ++c) {
        auto mu = m.means.row(c);
        auto var = m.variances.row(c);
        double ll = m.log_priors[c];
        for (std::size_t d = 0; d < s.size(); ++d) {
            const double diff = s[d] - mu[d];
            ll += -0.5 * std::log(2.0 * M_PI * var[d]) - diff * diff / (2.0 * var[d]);
        }
        scores[c] = ll;
    }
    return static_cast<int>(argmax_lowest(scores));
}

int predict_ridge(const RidgeModel& m, std::span<const double> s) {
    check_dim(s.size(), m.weights.cols);
    std::vector<double> scores(m.weights.rows);
    for (std::size_t c = 0; c < m.weights.rows; ++c) {
        scores[c] = m.intercepts[c] + dot(m.weights.row(c), s);
    }
    return static_cast<int>(argmax_lowest(scores));
}

int predict_knn(const KnnModel& m, std::span<const double> s) {
    check_dim(s.size(), m.points.cols);
    std::vector<std::pair<double, std::size_t>> dist(m.points.rows);
    for (std::size_t i = 0; i < m.points.rows; ++i) {
        auto xi = m.points.row(i);
        double d2 = 0.0;
        for (std::size_t d = 0; d < s.size(); ++d) {
            const double diff = s[d] - xi[d];
            d2 += diff * diff;
        }
        dist[i] = {d2, i};
    }
    const std::size_t k = static_cast<std::size_t>(m.k);
    std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
    std::vector<double> votes(m.n_classes, 0.0);
    for (std::size_t i = 0; i < k; ++i) votes[m.labels[dist[i].second]] += 1.0;
    return static_cast<int>(argmax_lowest(votes));
}

int predict_logistic(const LogisticModel& m, std::span<const double> s) {
    check_dim(s.size(), m.weights.cols);
    std::vector<double> scores(m.weights.rows);
    for (std::size_t c = 0; c < m.weights.rows; ++c) {
        scores[c] = m.biases[c] + dot(m.weights.row(c), s);
    }
    return static_cast<int>(argmax_lowest(scores));
}

}  // namespace

LdaModel fit_lda(const SpectralLibrary& train_set, double shrinkage) {
    if (!(shrinkage >= 0.0 && shrinkage <= 1.0)) {
        throw Error(ErrorCode::Usage, "shrinkage must be in [0,1], got " + fmt_double(shrinkage));
    }
    const Encoded e = encode(train_set);
    const std::size_t n = e.x.rows;
    const std::size_t bands = e.x.cols;
    const std::size_t n_classes = e.classes.size();

    LdaModel model;
    model.shrinkage = shrinkage;
    model.classes = e.classes;
    model.class_means = per_class_means(e);
    model.log_priors = empirical_log_priors(e);

    // Pooled within-class scatter, lower triangle only.
    Matrix cov(bands, bands, 0.0);
    std::vector<double> centered(bands);
    for (std::size_t i = 0; i < n; ++i) {
        auto xi = e.x.row(i);
        auto mu = model.class_means.row(e.y[i]);
        for (std::size_t d = 0; d < bands; ++d) centered[d] = xi[d] - mu[d];
        for (std::size_t r = 0; r < bands; ++r) {
            const double cr = centered[r];
            auto crow = cov.row(r);
            for (std::size_t c = 0; c <= r; ++c) crow[c] += cr * centered[c];
        }
    }
    if (n > n_classes) {
        const double inv = 1.0 / static_cast<double>(n - n_classes);
        for (std::size_t r = 0; r < bands; ++r) {
            for (std::size_t c = 0; c <= r; ++c) cov.at(r, c) *= inv;
        }
    }

    double trace = 0.0;
    for (std::size_t d = 0; d < bands; ++d) trace += cov.at(d, d);
    const double ridge = shrinkage * trace / static_cast<double>(bands);
    for (std::size_t r = 0; r < bands; ++r) {
        for (std::size_t c = 0; c <= r; ++c) cov.at(r, c) *= 1.0 - shrinkage;
        cov.at(r, r) += ridge;
    }

    if (!cholesky_lower(cov)) {
        throw Error(ErrorCode::Numeric,
                    "shrunk pooled covariance is not positive-definite at lambda=" +
                        fmt_double(shrinkage) + "; raise the shrinkage value");
    }
    model.covariance_factor = std::move(cov);
    return model;
}

int predict_lda(const LdaModel& model, std::span<const double> s) {
    check_dim(s.size(), model.class_means.cols);
    const std::size_t n_classes = model.class_means.rows;
    std::vector<double> scores(n_classes);
    std::vector<double> diff(s.size());
    for (std::size_t c = 0; c < n_classes; ++c) {
        auto mu = model.class_means.row(c);
        for (std::size_t d = 0; d < s.size(); ++d) diff[d] = s[d] - mu[d];
        const std::vector<double> z = solve_lower(model.covariance_factor, diff);
        scores[c] = model.log_priors[c] - 0.5 * dot(z, z);
    }
    return static_cast<int>(argmax_lowest(scores));
}

BaselineModel fit_baseline(BaselineKind kind, const SpectralLibrary& train_set) {
    const Encoded e = encode(train_set);
    switch (kind) {
        case BaselineKind::NearestCentroid: return fit_nearest_centroid(e);
        case BaselineKind::GaussianNB: return fit_gaussian_nb(e);
        case BaselineKind::RidgeClassifier: return fit_ridge(e);
        case BaselineKind::KNearestNeighbors: return fit_knn(e);
        case BaselineKind::LogisticRegression: return fit_logistic(e);
    }
    throw Error(ErrorCode::Usage, "unknown baseline kind");
}

int predict_baseline(const BaselineModel& model, std::span<const double> s) {
    switch (model.kind) {
        case BaselineKind::NearestCentroid:
            return predict_nearest_centroid(std::get<NearestCentroidModel>(model.model), s);
        case BaselineKind::GaussianNB:
            return predict_gaussian_nb(std::get<GaussianNbModel>(model.model), s);
        case BaselineKind::RidgeClassifier:
            return predict_ridge(std::get<RidgeModel>(model.model), s);
        case BaselineKind::KNearestNeighbors:
            return predict_knn(std::get<KnnModel>(model.model), s);
        case BaselineKind::LogisticRegression:
            return predict_logistic(std::get<LogisticModel>(model.model), s);
    }
    throw Error(ErrorCode::Usage, "unknown baseline kind");
}

EvalReport evaluate(const std::vector<int>& predictions, const std::vector<int>& truth,
                    std::size_t n_classes, double wall_time_s) {
    if (predictions.size() != truth.size()) {
        throw Error(ErrorCode::Dimension,
                    "predictions (" + std::to_string(predictions.size()) + ") and truth (" +
                        std::to_string(truth.size()) + ") differ in length");
    }
    if (truth.empty()) throw Error(ErrorCode::Usage, "nothing to evaluate");

    EvalReport report;
    report.n_classes = n_classes;
    report.wall_time_s = wall_time_s;
    report.confusion.assign(n_classes * n_classes, 0);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const int t = truth[i];
        const int p = predictions[i];
        if (t < 0 || static_cast<std::size_t>(t) >= n_classes || p < 0 ||
            static_cast<std::size_t>(p) >= n_classes) {
            throw Error(ErrorCode::Usage, "label out of range at position " + std::to_string(i));
        }
        ++report.confusion[static_cast<std::size_t>(t) * n_classes + p];
    }

    const double n = static_cast<double>(truth.size());
    long long correct = 0;
    double recall_sum = 0.0;
    std::size_t present = 0;
    double weighted_f1 = 0.0;
    for (std::size_t c = 0; c < n_classes; ++c) {
        const long long tp = report.confusion_at(c, c);
        correct += tp;
        long long support = 0;
        long long predicted = 0;
        for (std::size_t j = 0; j < n_classes; ++j) {
            support += report.confusion_at(c, j);
            predicted += report.confusion_at(j, c);
        }
        if (support > 0) {
            const double recall = static_cast<double>(tp) / static_cast<double>(support);
            recall_sum += recall;
            ++present;
            const double precision =
                predicted > 0 ? static_cast<double>(tp) / static_cast<double>(predicted) : 0.0;
            const double f1 = precision + recall > 0.0
                                  ? 2.0 * precision * recall / (precision + recall)
                                  : 0.0;
            weighted_f1 += static_cast<double>(support) / n * f1;
        }
    }
    report.accuracy = static_cast<double>(correct) / n;
    report.balanced_accuracy = present > 0 ? recall_sum / static_cast<double>(present) : 0.0;
    report.weighted_f1 = weighted_f1;
    return report;
}

const char* model_kind_name(ModelKind kind) {
    switch (kind) {
        case ModelKind::Lda: return "LDA";
        case ModelKind::NearestCentroid: return "NearestCentroid";
        case ModelKind::GaussianNB: return "GaussianNB";
        case ModelKind::RidgeClassifier: return "RidgeClassifier";
        case ModelKind::KNearestNeighbors: return "KNearestNeighbors";
        case ModelKind::LogisticRegression: return "LogisticRegression";
    }
    return "?";
}

ModelKind model_kind_from_flag(const std::string& flag) {
    if (flag == "lda") return ModelKind::Lda;
    if (flag == "nearest_centroid") return ModelKind::NearestCentroid;
    if (flag == "gaussian_nb") return ModelKind::GaussianNB;
    if (flag == "ridge") return ModelKind::RidgeClassifier;
    if (flag == "knn") return ModelKind::KNearestNeighbors;
    if (flag == "logistic") return ModelKind::LogisticRegression;
    throw Error(ErrorCode::Usage,
                "unknown model \"" + flag +
                    "\" (expected lda, ridge, nearest_centroid, gaussian_nb, knn, logistic)");
}

ComparisonTable make_table(std::vector<ComparisonRow> rows) {
    std::sort(rows.begin(), rows.end(), [](const ComparisonRow& a, const ComparisonRow& b) {
        if (a.report.has_value() != b.report.has_value()) return a.report.has_value();
        if (a.report && b.report && a.report->accuracy != b.report->accuracy) {
            return a.report->accuracy > b.report->accuracy;
        }
        return a.name < b.name;
    });
    return {std::move(rows)};
}

ComparisonTable compare(const SpectralLibrary& train_set, const SpectralLibrary& test_set,
                        const std::vector<ModelKind>& kinds, double lda_shrinkage) {
    if (kinds.empty()) throw Error(ErrorCode::Usage, "no models requested");
    if (train_set.grid.wavelengths_nm != test_set.grid.wavelengths_nm) {
        throw Error(ErrorCode::Dimension, "train and test wavelength grids differ");
    }

    auto [classes, train_labels] = encode_labels(train_set);
    std::vector<int> truth;
    truth.reserve(test_set.spectra.size());
    for (const Spectrum& s : test_set.spectra) {
        const int code = classes.find(label_of(s, test_set.label_key));
        if (code < 0) {
            throw Error(ErrorCode::Usage, "test label \"" + label_of(s, test_set.label_key) +
                                              "\" does not appear in the training set");
        }
        truth.push_back(code);
    }

    using clock = std::chrono::steady_clock;
    std::vector<ComparisonRow> rows;
    rows.reserve(kinds.size());
    for (ModelKind kind : kinds) {
        ComparisonRow row;
        row.name = model_kind_name(kind);
        try {
            const auto start = clock::now();
            std::vector<int> preds;
            preds.reserve(test_set.spectra.size());
            if (kind == ModelKind::Lda) {
                const LdaModel model = fit_lda(train_set, lda_shrinkage);
                for (const Spectrum& s : test_set.spectra) {
                    preds.push_back(predict_lda(model, s.reflectance));
                }
            } else {
                BaselineKind bk;
                switch (kind) {
                    case ModelKind::NearestCentroid: bk = BaselineKind::NearestCentroid; break;
                    case ModelKind::GaussianNB: bk = BaselineKind::GaussianNB; break;
                    case ModelKind::RidgeClassifier: bk = BaselineKind::RidgeClassifier; break;
                    case ModelKind::KNearestNeighbors: bk = BaselineKind::KNearestNeighbors; break;
                    default: bk = BaselineKind::LogisticRegression; break;
                }
                const BaselineModel model = fit_baseline(bk, train_set);
                for (const Spectrum& s : test_set.spectra) {
                    preds.push_back(predict_baseline(model, s.reflectance));
                }
            }
            const double seconds =
                std::chrono::duration<double>(clock::now() - start).count();
            row.report = evaluate(preds, truth, classes.size(), seconds);
        } catch (const Error& err) {
            row.error = err.what();
        }
        rows.push_back(std::move(row));
    }
    return make_table(std::move(rows));
}

std::string comparison_csv(const ComparisonTable& table) {
    std::string out = "model,accuracy,balanced_accuracy,f1_weighted,time_s\n";
    for (const ComparisonRow& row : table.rows) {
        out += row.name;
        if (row.report) {
            out += ',' + fmt_fixed(row.report->accuracy, 4);
            out += ',' + fmt_fixed(row.report->balanced_accuracy, 4);
            out += ',' + fmt_fixed(row.report->weighted_f1, 4);
            out += ',' + fmt_fixed(row.report->wall_time_s, 3);
        } else {
            out += ",error,error,error,error";
        }
        out += '\n';
    }
    return out;
}

}  // namespace speclab
