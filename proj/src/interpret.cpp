#include "speclab/interpret.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <utility>

#include <json.hpp>

#include "speclab/error.hpp"
#include "speclab/format.hpp"
#include "speclab/io.hpp"
#include "speclab/svg.hpp"

namespace speclab {

ActiveNeuronSet active_neurons(const Matrix& w1, double std_threshold) {
    ActiveNeuronSet out;
    out.std_threshold = std_threshold;
    out.row_std.reserve(w1.rows);
    for (std::size_t i = 0; i < w1.rows; ++i) {
        const double sd = population_std(w1.row(i));
        out.row_std.push_back(sd);
        if (sd > std_threshold) out.indices.push_back(i);
    }
    return out;
}

WavelengthActivity wavelength_activity(const Matrix& w1,
                                       const std::vector<double>& wavelengths_nm,
                                       const ActiveNeuronSet& active) {
    if (active.indices.empty())
        throw Error(ErrorCode::Usage,
                    "no active neurons at std threshold " + fmt_double(active.std_threshold));
    if (wavelengths_nm.size() != w1.cols)
        throw Error(ErrorCode::Dimension,
                    "wavelength axis has " + std::to_string(wavelengths_nm.size()) +
                        " entries, weight matrix has " + std::to_string(w1.cols) + " columns");
    for (std::size_t i : active.indices) {
        if (i >= w1.rows)
            throw Error(ErrorCode::Usage,
                        "active index " + std::to_string(i) + " out of range");
    }

    WavelengthActivity out;
    out.wavelengths_nm = wavelengths_nm;
    out.mean_weight.resize(w1.cols);
    out.std_weight.resize(w1.cols);
    const double n = static_cast<double>(active.indices.size());
    for (std::size_t d = 0; d < w1.cols; ++d) {
        double sum = 0.0;
        for (std::size_t i : active.indices) sum += w1.at(i, d);
        const double mean = sum / n;
        double sq = 0.0;
        for (std::size_t i : active.indices) {
            const double diff = w1.at(i, d) - mean;
            sq += diff * diff;
        }
        out.mean_weight[d] = mean;
        out.std_weight[d] = std::sqrt(sq / n);
    }
    return out;
}

WavelengthActivity wavelength_activity(const DenseNet& net, const ActiveNeuronSet& active) {
    return wavelength_activity(net.w1, net.grid.wavelengths_nm, active);
}

ClassReliance class_reliance(const DenseNet& net, std::size_t c, double magnitude_threshold) {
    if (c >= net.output_dim())
        throw Error(ErrorCode::Usage, "class index " + std::to_string(c) +
                                          " out of range [0," +
                                          std::to_string(net.output_dim()) + ")");
    ClassReliance out;
    out.label = net.classes.labels[c];
    out.magnitude_threshold = magnitude_threshold;
    const auto row = net.w2.row(c);
    out.weights.assign(row.begin(), row.end());
    for (std::size_t j = 0; j < out.weights.size(); ++j) {
        if (std::abs(out.weights[j]) > magnitude_threshold) out.reliant_indices.push_back(j);
    }
    return out;
}

SpectralActivation spectral_activation(const DenseNet& net, const SpectralLibrary& lib,
                                       std::size_t c, double magnitude_threshold) {
    const ClassReliance reliance = class_reliance(net, c, magnitude_threshold);
    if (lib.grid.bands() != net.input_dim())
        throw Error(ErrorCode::Dimension,
                    "library has " + std::to_string(lib.grid.bands()) +
                        " bands, model expects " + std::to_string(net.input_dim()));
    if (lib.grid.wavelengths_nm != net.grid.wavelengths_nm)
        throw Error(ErrorCode::Dimension, "library wavelengths differ from the model grid");

    SpectralActivation out;
    out.label = reliance.label;
    out.class_mean.assign(net.input_dim(), 0.0);
    std::size_t count = 0;
    for (const Spectrum& s : lib.spectra) {
        if (label_of(s, lib.label_key) != out.label) continue;
        for (std::size_t d = 0; d < out.class_mean.size(); ++d)
            out.class_mean[d] += s.reflectance[d];
        ++count;
    }
    if (count == 0)
        throw Error(ErrorCode::Usage,
                    "class '" + out.label + "' has no spectra in the supplied library");
    for (double& v : out.class_mean) v /= static_cast<double>(count);

    for (std::size_t j : reliance.reliant_indices) {
        const double scale = net.w2.at(c, j);
        std::vector<double> curve(net.input_dim());
        for (std::size_t d = 0; d < curve.size(); ++d) curve[d] = scale * net.w1.at(j, d);
        out.curves.emplace(j, std::move(curve));
    }
    if (out.curves.empty())
        out.note = "no neurons exceed |weight| > " + fmt_double(magnitude_threshold) +
                   " for this class";
    return out;
}

double logit_decomposition_check(const DenseNet& net, std::span<const double> s,
                                 std::size_t c) {
    if (c >= net.output_dim())
        throw Error(ErrorCode::Usage, "class index " + std::to_string(c) +
                                          " out of range [0," +
                                          std::to_string(net.output_dim()) + ")");
    const double direct = forward_logits(net, s)[c];
    const std::vector<double> hidden = forward_hidden(net, s);
    // Reassembled in the opposite summation order on purpose, so the check
    // does not trivially repeat the forward pass.
    double assembled = 0.0;
    for (std::size_t j = hidden.size(); j-- > 0;) assembled += net.w2.at(c, j) * hidden[j];
    assembled += net.b2[c];
    return std::abs(direct - assembled);
}

std::string matrix_to_pgm(const Matrix& m) {
    if (m.rows == 0 || m.cols == 0)
        throw Error(ErrorCode::Usage, "cannot render an empty matrix");
    const auto [lo_it, hi_it] = std::minmax_element(m.data.begin(), m.data.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    const double span = hi - lo;

    std::string out = "P5\n" + std::to_string(m.cols) + " " + std::to_string(m.rows) + "\n255\n";
    out.reserve(out.size() + m.data.size());
    for (double v : m.data) {
        const double norm = span > 0.0 ? (v - lo) / span : 0.0;
        out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(norm * 255.0))));
    }
    return out;
}

namespace {

std::string sanitize_label(const std::string& label) {
    std::string out;
    out.reserve(label.size());
    for (char ch : label) {
        const bool ok = (ch >= 'A' && ch <= 'Z') || (ch >= 'a' && ch <= 'z') ||
                        (ch >= '0' && ch <= '9') || ch == '_' || ch == '-';
        out.push_back(ok ? ch : '_');
    }
    if (out.empty()) out = "_";
    return out;
}

std::string active_neurons_json(const ActiveNeuronSet& active, std::size_t hidden) {
    nlohmann::ordered_json root;
    root["std_threshold"] = active.std_threshold;
    root["hidden_size"] = hidden;
    root["active_count"] = active.indices.size();
    root["indices"] = active.indices;
    root["row_std"] = active.row_std;
    return root.dump(2) + "\n";
}

std::string activity_csv(const WavelengthActivity& act) {
    std::string out = "wavelength_nm,mean,std\n";
    for (std::size_t d = 0; d < act.wavelengths_nm.size(); ++d) {
        out += fmt_double(act.wavelengths_nm[d]);
        out += ',';
        out += fmt_double(act.mean_weight[d]);
        out += ',';
        out += fmt_double(act.std_weight[d]);
        out += '\n';
    }
    return out;
}

std::string activity_svg(const WavelengthActivity& act, const ActiveNeuronSet& active,
                         std::size_t hidden) {
    SvgLineChart chart("Layer 1 weight activity", "wavelength (nm)", "weight");
    chart.add_series("mean", act.wavelengths_nm, act.mean_weight);
    chart.add_series("std", act.wavelengths_nm, act.std_weight);
    chart.set_note("active neurons: " + std::to_string(active.indices.size()) + " of " +
                   std::to_string(hidden) + " (row std > " +
                   fmt_double(active.std_threshold) + ")");
    return chart.render();
}

std::string reliance_csv(const ClassReliance& rel) {
    std::string out = "neuron,weight\n";
    for (std::size_t j = 0; j < rel.weights.size(); ++j) {
        out += std::to_string(j);
        out += ',';
        out += fmt_double(rel.weights[j]);
        out += '\n';
    }
    return out;
}

std::string reliance_svg(const ClassReliance& rel) {
    std::vector<double> xs(rel.weights.size());
    for (std::size_t j = 0; j < xs.size(); ++j) xs[j] = static_cast<double>(j);
    const std::vector<double> bound(xs.size(), rel.magnitude_threshold);
    std::vector<double> neg_bound(xs.size(), -rel.magnitude_threshold);

    SvgLineChart chart("Layer 2 weights, class " + rel.label, "neuron", "weight");
    chart.add_series("weight", xs, rel.weights);
    chart.add_series("+threshold", xs, bound);
    chart.add_series("-threshold", xs, neg_bound);
    std::string note = "reliant neurons (|w| > " + fmt_double(rel.magnitude_threshold) + "): ";
    if (rel.reliant_indices.empty()) {
        note += "none";
    } else {
        for (std::size_t k = 0; k < rel.reliant_indices.size(); ++k) {
            if (k > 0) note += ", ";
            note += std::to_string(rel.reliant_indices[k]);
        }
    }
    chart.set_note(note);
    return chart.render();
}

std::string activation_csv(const SpectralActivation& act,
                           const std::vector<double>& wavelengths) {
    std::string out = "wavelength_nm,class_mean";
    for (const auto& [j, curve] : act.curves) {
        out += ",curve_" + std::to_string(j);
    }
    out += '\n';
    for (std::size_t d = 0; d < wavelengths.size(); ++d) {
        out += fmt_double(wavelengths[d]);
        out += ',';
        out += fmt_double(act.class_mean[d]);
        for (const auto& [j, curve] : act.curves) {
            out += ',';
            out += fmt_double(curve[d]);
        }
        out += '\n';
    }
    return out;
}

std::string activation_svg(const SpectralActivation& act,
                           const std::vector<double>& wavelengths) {
    SvgLineChart chart("Spectral activation, class " + act.label, "wavelength (nm)",
                       "reflectance / contribution");
    chart.add_series("class mean", wavelengths, act.class_mean);
    for (const auto& [j, curve] : act.curves) {
        chart.add_series("neuron " + std::to_string(j), wavelengths, curve);
    }
    if (!act.note.empty()) chart.set_note(act.note);
    return chart.render();
}

}  // namespace

std::vector<std::string> write_interpret_report(const std::string& dir, const DenseNet& net,
                                                const SpectralLibrary& lib,
                                                const InterpretParams& params) {
    const ActiveNeuronSet active = active_neurons(net.w1, params.std_threshold);
    const WavelengthActivity activity = wavelength_activity(net, active);

    Matrix active_rows(active.indices.size(), net.input_dim());
    for (std::size_t k = 0; k < active.indices.size(); ++k) {
        const auto src = net.w1.row(active.indices[k]);
        std::copy(src.begin(), src.end(), active_rows.row(k).begin());
    }

    std::vector<std::pair<std::string, std::string>> files;
    files.emplace_back("active_neurons.json", active_neurons_json(active, net.hidden_dim()));
    files.emplace_back("layer1_weights.pgm", matrix_to_pgm(net.w1));
    files.emplace_back("layer1_active_weights.pgm", matrix_to_pgm(active_rows));
    files.emplace_back("wavelength_activity.csv", activity_csv(activity));
    files.emplace_back("wavelength_activity.svg",
                       activity_svg(activity, active, net.hidden_dim()));

    std::map<std::string, int> used;
    for (std::size_t c = 0; c < net.output_dim(); ++c) {
        const ClassReliance rel = class_reliance(net, c, params.magnitude_threshold);
        const SpectralActivation act =
            spectral_activation(net, lib, c, params.magnitude_threshold);

        std::string stem = sanitize_label(rel.label);
        const int n = ++used[stem];
        if (n > 1) stem += "_" + std::to_string(n);
        files.emplace_back("reliance_" + stem + ".csv", reliance_csv(rel));
        files.emplace_back("reliance_" + stem + ".svg", reliance_svg(rel));
        files.emplace_back("activation_" + stem + ".csv",
                           activation_csv(act, net.grid.wavelengths_nm));
        files.emplace_back("activation_" + stem + ".svg",
                           activation_svg(act, net.grid.wavelengths_nm));
    }

    ensure_directory(dir);
    std::vector<std::string> written;
    written.reserve(files.size());
    for (const auto& [name, content] : files) {
        write_file_atomic(dir + "/" + name, content);
        written.push_back(name);
    }
    return written;
}

}  // namespace speclab
