#include "speclab/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "speclab/error.hpp"
#include "speclab/format.hpp"
#include "speclab/rng.hpp"

namespace speclab {

namespace {

constexpr std::size_t kMetaFields = 4;  // id, species, health, growth_stage

void check_no_separator(const std::string& field, const char* what) {
    if (field.find(',') != std::string::npos || field.find('\n') != std::string::npos) {
        throw Error(ErrorCode::Format,
                    std::string(what) + " field contains a separator character: \"" +
                        field + "\"");
    }
}

}  // namespace

void validate_grid(const WavelengthGrid& grid) {
    if (grid.wavelengths_nm.empty()) {
        throw Error(ErrorCode::Format, "wavelength grid is empty");
    }
    double prev = 0.0;
    for (std::size_t i = 0; i < grid.wavelengths_nm.size(); ++i) {
        const double w = grid.wavelengths_nm[i];
        if (!std::isfinite(w) || w <= 0.0) {
            throw Error(ErrorCode::Format,
                        "wavelength " + std::to_string(i + 1) + " is not finite and positive");
        }
        if (i > 0 && w <= prev) {
            throw Error(ErrorCode::Format, "non-monotonic wavelengths: " + fmt_double(prev) +
                                               " followed by " + fmt_double(w));
        }
        prev = w;
    }
}

std::string label_of(const Spectrum& s, LabelKey key) {
    if (key == LabelKey::Species) return s.species;
    const std::string& health = s.health.empty() ? std::string("NA") : s.health;
    const std::string& stage = s.growth_stage.empty() ? std::string("NA") : s.growth_stage;
    return s.species + "_" + health + "_" + stage;
}

void validate_library(const SpectralLibrary& lib) {
    validate_grid(lib.grid);
    const std::size_t bands = lib.grid.bands();
    for (std::size_t i = 0; i < lib.spectra.size(); ++i) {
        const Spectrum& s = lib.spectra[i];
        if (s.species.empty()) {
            throw Error(ErrorCode::Format, "spectrum " + std::to_string(i + 1) + " (id \"" +
                                               s.id + "\") has an empty species");
        }
        if (s.reflectance.size() != bands) {
            throw Error(ErrorCode::Dimension,
                        "spectrum " + std::to_string(i + 1) + " has " +
                            std::to_string(s.reflectance.size()) + " reflectance values, grid has " +
                            std::to_string(bands));
        }
        for (double v : s.reflectance) {
            if (!std::isfinite(v)) {
                throw Error(ErrorCode::Format,
                            "spectrum " + std::to_string(i + 1) + " contains a non-finite value");
            }
        }
        check_no_separator(s.id, "id");
        check_no_separator(s.species, "species");
        check_no_separator(s.health, "health");
        check_no_separator(s.growth_stage, "growth_stage");
    }
}

int ClassIndex::find(const std::string& label) const {
    auto it = std::lower_bound(labels.begin(), labels.end(), label);
    if (it == labels.end() || *it != label) return -1;
    return static_cast<int>(it - labels.begin());
}

SpectralLibrary parse_library(const std::string& text) {
    std::vector<std::string_view> lines;
    {
        std::string_view rest(text);
        while (!rest.empty()) {
            const std::size_t pos = rest.find('\n');
            std::string_view line = rest.substr(0, pos);
            if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
            lines.push_back(line);
            if (pos == std::string_view::npos) break;
            rest.remove_prefix(pos + 1);
        }
        while (!lines.empty() && lines.back().empty()) lines.pop_back();
    }
    if (lines.empty()) throw Error(ErrorCode::Format, "empty library file");

    const auto header = split(lines[0], ',');
    static const char* kNames[kMetaFields] = {"id", "species", "health", "growth_stage"};
    if (header.size() < kMetaFields + 1) {
        throw Error(ErrorCode::Format,
                    "header needs id,species,health,growth_stage plus at least one wavelength");
    }
    for (std::size_t i = 0; i < kMetaFields; ++i) {
        if (header[i] != kNames[i]) {
            throw Error(ErrorCode::Format, "header field " + std::to_string(i + 1) +
                                               " must be \"" + kNames[i] + "\", got \"" +
                                               std::string(header[i]) + "\"");
        }
    }

    SpectralLibrary lib;
    lib.grid.wavelengths_nm.reserve(header.size() - kMetaFields);
    for (std::size_t i = kMetaFields; i < header.size(); ++i) {
        double w = 0.0;
        if (!parse_double(header[i], w)) {
            throw Error(ErrorCode::Format,
                        "header wavelength " + std::to_string(i - kMetaFields + 1) +
                            " is not numeric: \"" + std::string(header[i]) + "\"");
        }
        lib.grid.wavelengths_nm.push_back(w);
    }
    validate_grid(lib.grid);

    const std::size_t bands = lib.grid.bands();
    lib.spectra.reserve(lines.size() - 1);
    std::size_t row = 0;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        if (lines[li].empty()) continue;
        ++row;
        const auto fields = split(lines[li], ',');
        if (fields.size() != kMetaFields + bands) {
            throw Error(ErrorCode::Format, "row " + std::to_string(row) + ": expected " +
                                               std::to_string(kMetaFields + bands) +
                                               " fields, got " + std::to_string(fields.size()));
        }
        Spectrum s;
        s.id = std::string(fields[0]);
        s.species = std::string(fields[1]);
        s.health = std::string(fields[2]);
        s.growth_stage = std::string(fields[3]);
        if (s.species.empty()) {
            throw Error(ErrorCode::Format, "row " + std::to_string(row) + ": empty species");
        }
        s.reflectance.reserve(bands);
        for (std::size_t b = 0; b < bands; ++b) {
            double v = 0.0;
            if (!parse_double(fields[kMetaFields + b], v)) {
                throw Error(ErrorCode::Format,
                            "row " + std::to_string(row) + ": non-numeric reflectance in band " +
                                std::to_string(b + 1) + ": \"" +
                                std::string(fields[kMetaFields + b]) + "\"");
            }
            if (!std::isfinite(v)) {
                throw Error(ErrorCode::Format, "row " + std::to_string(row) +
                                                   ": non-finite reflectance in band " +
                                                   std::to_string(b + 1));
            }
            s.reflectance.push_back(v);
        }
        lib.spectra.push_back(std::move(s));
    }
    if (lib.spectra.empty()) throw Error(ErrorCode::Format, "library contains no spectra");
    return lib;
}

std::string serialize_library(const SpectralLibrary& lib) {
    validate_library(lib);
    std::string out = "id,species,health,growth_stage";
    for (double w : lib.grid.wavelengths_nm) {
        out += ',';
        out += fmt_double(w);
    }
    out += '\n';
    for (const Spectrum& s : lib.spectra) {
        out += s.id;
        out += ',';
        out += s.species;
        out += ',';
        out += s.health;
        out += ',';
        out += s.growth_stage;
        for (double v : s.reflectance) {
            out += ',';
            out += fmt_double(v);
        }
        out += '\n';
    }
    return out;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw Error(ErrorCode::Io, "error while reading: " + path);
    return ss.str();
}

std::map<std::string, std::size_t> class_counts(const SpectralLibrary& lib) {
    std::map<std::string, std::size_t> counts;
    for (const Spectrum& s : lib.spectra) ++counts[label_of(s, lib.label_key)];
    return counts;
}

Matrix class_means(const SpectralLibrary& lib) {
    const auto counts = class_counts(lib);
    std::vector<std::string> labels;
    labels.reserve(counts.size());
    for (const auto& [label, n] : counts) labels.push_back(label);

    const std::size_t bands = lib.grid.bands();
    Matrix means(labels.size(), bands, 0.0);
    for (const Spectrum& s : lib.spectra) {
        const std::string label = label_of(s, lib.label_key);
        const std::size_t c =
            std::lower_bound(labels.begin(), labels.end(), label) - labels.begin();
        auto row = means.row(c);
        for (std::size_t b = 0; b < bands; ++b) row[b] += s.reflectance[b];
    }
    for (std::size_t c = 0; c < labels.size(); ++c) {
        const double n = static_cast<double>(counts.at(labels[c]));
        auto row = means.row(c);
        for (std::size_t b = 0; b < bands; ++b) row[b] /= n;
    }
    return means;
}

std::pair<ClassIndex, std::vector<int>> encode_labels(const SpectralLibrary& lib) {
    std::set<std::string> distinct;
    for (const Spectrum& s : lib.spectra) distinct.insert(label_of(s, lib.label_key));
    if (distinct.size() < 2) {
        throw Error(ErrorCode::Usage, "need at least 2 distinct labels, found " +
                                          std::to_string(distinct.size()));
    }
    ClassIndex index;
    index.labels.assign(distinct.begin(), distinct.end());
    std::vector<int> codes;
    codes.reserve(lib.spectra.size());
    for (const Spectrum& s : lib.spectra) {
        codes.push_back(index.find(label_of(s, lib.label_key)));
    }
    return {std::move(index), std::move(codes)};
}

std::pair<SpectralLibrary, SpectralLibrary> stratified_split(const SpectralLibrary& lib,
                                                             double train_fraction,
                                                             std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw Error(ErrorCode::Usage,
                    "train fraction must be in (0,1), got " + fmt_double(train_fraction));
    }
    // Members per class, keyed by label so classes are visited in sorted order.
    std::map<std::string, std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < lib.spectra.size(); ++i) {
        members[label_of(lib.spectra[i], lib.label_key)].push_back(i);
    }

    Rng rng(seed);
    std::vector<char> in_train(lib.spectra.size(), 0);
    for (auto& [label, indices] : members) {
        const std::size_t n = indices.size();
        if (n < 2) {
            throw Error(ErrorCode::Usage,
                        "class \"" + label + "\" has " + std::to_string(n) +
                            " spectrum; stratified split needs at least 2 per class");
        }
        const double ideal = train_fraction * static_cast<double>(n);
        std::size_t take = static_cast<std::size_t>(std::floor(ideal + 0.5));  // half-up
        take = std::clamp<std::size_t>(take, 1, n - 1);
        rng.shuffle(indices);
        for (std::size_t k = 0; k < take; ++k) in_train[indices[k]] = 1;
    }

    SpectralLibrary train{lib.grid, {}, lib.label_key};
    SpectralLibrary test{lib.grid, {}, lib.label_key};
    for (std::size_t i = 0; i < lib.spectra.size(); ++i) {
        (in_train[i] ? train : test).spectra.push_back(lib.spectra[i]);
    }
    return {std::move(train), std::move(test)};
}

}  // namespace speclab
