#include "speclab/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "speclab/error.hpp"
#include "speclab/rng.hpp"

namespace speclab {

namespace {

constexpr double kMinTemplateSeparation = 0.05;  // max-norm, between classes
constexpr int kMaxRedraws = 10000;

struct Window {
    double lo, hi;
};
// Chlorophyll/pigment region, the two water bands, ligno-cellulose.
constexpr Window kFeatureWindows[] = {
    {430.0, 700.0}, {1400.0, 1500.0}, {1900.0, 2000.0}, {2100.0, 2350.0}};

double clip01(double v) { return std::min(1.0, std::max(0.0, v)); }

std::vector<double> draw_baseline(const WavelengthGrid& grid, Rng& rng) {
    const double offset = rng.uniform(0.40, 0.55);
    const double amplitude = rng.uniform(0.05, 0.20);
    const double cycles = rng.uniform(0.5, 1.5);
    const double phase = rng.uniform(0.0, 2.0 * M_PI);
    const double lo = grid.wavelengths_nm.front();
    const double hi = grid.wavelengths_nm.back();
    const double span = hi > lo ? hi - lo : 1.0;
    std::vector<double> baseline(grid.bands());
    for (std::size_t b = 0; b < grid.bands(); ++b) {
        const double x = (grid.wavelengths_nm[b] - lo) / span;
        baseline[b] = offset + amplitude * std::sin(2.0 * M_PI * cycles * x + phase);
    }
    return baseline;
}

std::vector<Absorption> draw_absorptions(int count, Rng& rng) {
    std::vector<Absorption> wells(count);
    for (Absorption& well : wells) {
        const Window& w = kFeatureWindows[rng.index(std::size(kFeatureWindows))];
        well.center_nm = rng.uniform(w.lo, w.hi);
        well.width_nm = rng.uniform(10.0, 80.0);
        well.depth = rng.uniform(0.1, 0.5);
    }
    return wells;
}

double max_norm_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

std::string class_label(int c, int n_classes) {
    int width = 2;
    for (int v = n_classes - 1; v >= 100; v /= 10) ++width;
    // an int never needs more than 10 digits; the clamp also bounds snprintf
    char buf[32];
    std::snprintf(buf, sizeof(buf), "synth_%0*d", std::min(width, 10), c);
    return buf;
}

}  // namespace

WavelengthGrid uniform_grid(std::size_t bands, double lo_nm, double hi_nm) {
    WavelengthGrid grid;
    grid.wavelengths_nm.resize(bands);
    if (bands == 1) {
        grid.wavelengths_nm[0] = lo_nm;
    } else {
        const double step = (hi_nm - lo_nm) / static_cast<double>(bands - 1);
        for (std::size_t b = 0; b < bands; ++b) {
            grid.wavelengths_nm[b] = lo_nm + step * static_cast<double>(b);
        }
    }
    validate_grid(grid);
    return grid;
}

std::vector<double> evaluate_template(const WavelengthGrid& grid,
                                      const std::vector<double>& baseline,
                                      const std::vector<Absorption>& absorptions) {
    std::vector<double> values(grid.bands());
    for (std::size_t b = 0; b < grid.bands(); ++b) {
        double v = baseline[b];
        const double lambda = grid.wavelengths_nm[b];
        for (const Absorption& well : absorptions) {
            const double z = (lambda - well.center_nm) / well.width_nm;
            v -= well.depth * std::exp(-0.5 * z * z);
        }
        values[b] = clip01(v);
    }
    return values;
}

SynthLibrary generate_library(const SynthSpec& spec) {
    if (spec.n_classes < 2) throw Error(ErrorCode::Usage, "need at least 2 classes");
    if (spec.per_class < 2) throw Error(ErrorCode::Usage, "need at least 2 spectra per class");
    if (spec.features_per_class < 1) throw Error(ErrorCode::Usage, "need at least 1 feature per class");
    if (!(spec.noise_sigma >= 0.0)) throw Error(ErrorCode::Usage, "noise sigma must be >= 0");

    const WavelengthGrid grid = spec.grid.bands() > 0 ? spec.grid : uniform_grid(2152);
    validate_grid(grid);

    Rng rng(spec.seed);
    SynthLibrary out;
    out.library.grid = grid;
    out.library.label_key = LabelKey::Species;
    out.templates.reserve(spec.n_classes);

    for (int c = 0; c < spec.n_classes; ++c) {
        ClassTemplate tpl;
        tpl.label = class_label(c, spec.n_classes);
        tpl.baseline = draw_baseline(grid, rng);
        int attempts = 0;
        while (true) {
            tpl.absorptions = draw_absorptions(spec.features_per_class, rng);
            tpl.values = evaluate_template(grid, tpl.baseline, tpl.absorptions);
            const bool distinct = std::all_of(
                out.templates.begin(), out.templates.end(), [&](const ClassTemplate& prev) {
                    return max_norm_distance(prev.values, tpl.values) >= kMinTemplateSeparation;
                });
            if (distinct) break;
            if (++attempts > kMaxRedraws) {
                throw Error(ErrorCode::Numeric,
                            "could not draw a distinct template for class " + tpl.label);
            }
        }

        for (int i = 0; i < spec.per_class; ++i) {
            Spectrum s;
            char idbuf[48];
            std::snprintf(idbuf, sizeof(idbuf), "%s_%04d", tpl.label.c_str(), i);
            s.id = idbuf;
            s.species = tpl.label;
            s.reflectance.resize(grid.bands());
            for (std::size_t b = 0; b < grid.bands(); ++b) {
                const double noise = spec.noise_sigma > 0.0 ? spec.noise_sigma * rng.gaussian() : 0.0;
                s.reflectance[b] = clip01(tpl.values[b] + noise);
            }
            out.library.spectra.push_back(std::move(s));
        }
        out.templates.push_back(std::move(tpl));
    }
    return out;
}

const ClassTemplate& template_of(const SynthLibrary& lib, const std::string& label) {
    for (const ClassTemplate& tpl : lib.templates) {
        if (tpl.label == label) return tpl;
    }
    throw Error(ErrorCode::Usage, "unknown class label: \"" + label + "\"");
}

SpectralLibrary library_from_templates(const WavelengthGrid& grid,
                                       const std::vector<std::vector<double>>& templates,
                                       const std::vector<std::string>& labels, int per_class,
                                       double noise_sigma, std::uint64_t seed) {
    if (templates.size() != labels.size()) {
        throw Error(ErrorCode::Dimension, "one label per template required");
    }
    Rng rng(seed);
    SpectralLibrary lib{grid, {}, LabelKey::Species};
    for (std::size_t c = 0; c < templates.size(); ++c) {
        if (templates[c].size() != grid.bands()) {
            throw Error(ErrorCode::Dimension, "template " + std::to_string(c) +
                                                  " length does not match the grid");
        }
        for (int i = 0; i < per_class; ++i) {
            Spectrum s;
            char idbuf[64];
            std::snprintf(idbuf, sizeof(idbuf), "%s_%04d", labels[c].c_str(), i);
            s.id = idbuf;
            s.species = labels[c];
            s.reflectance.resize(grid.bands());
            for (std::size_t b = 0; b < grid.bands(); ++b) {
                const double noise = noise_sigma > 0.0 ? noise_sigma * rng.gaussian() : 0.0;
                s.reflectance[b] = clip01(templates[c][b] + noise);
            }
            lib.spectra.push_back(std::move(s));
        }
    }
    return lib;
}

std::string templates_json(const SynthLibrary& lib) {
    nlohmann::ordered_json root;
    root["wavelengths_nm"] = lib.library.grid.wavelengths_nm;
    auto& classes = root["classes"];
    classes = nlohmann::ordered_json::array();
    for (const ClassTemplate& tpl : lib.templates) {
        nlohmann::ordered_json entry;
        entry["label"] = tpl.label;
        entry["baseline"] = tpl.baseline;
        auto& wells = entry["absorptions"];
        wells = nlohmann::ordered_json::array();
        for (const Absorption& well : tpl.absorptions) {
            wells.push_back({{"center_nm", well.center_nm},
                             {"width_nm", well.width_nm},
                             {"depth", well.depth}});
        }
        entry["values"] = tpl.values;
        classes.push_back(std::move(entry));
    }
    return root.dump(2) + "\n";
}

}  // namespace speclab
