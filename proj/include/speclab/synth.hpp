#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "speclab/spectra.hpp"

namespace speclab {

/// Parameters for the synthetic spectral-library generator.
struct SynthSpec {
    int n_classes = 3;
    int per_class = 10;
    WavelengthGrid grid;          // defaults to uniform_grid(2152) when empty
    double noise_sigma = 0.01;
    int features_per_class = 3;
    std::uint64_t seed = 0;
};

/// One Gaussian absorption well subtracted from the baseline.
struct Absorption {
    double center_nm = 0.0;
    double width_nm = 0.0;  // Gaussian sigma
    double depth = 0.0;
};

/// Per-class ground truth: the smooth baseline, the wells dug into it, and
/// the evaluated template (baseline minus wells, clipped to [0,1]).
struct ClassTemplate {
    std::string label;
    std::vector<double> baseline;
    std::vector<Absorption> absorptions;
    std::vector<double> values;
};

struct SynthLibrary {
    SpectralLibrary library;
    std::vector<ClassTemplate> templates;  // one per class, label order
};

/// Uniform grid over [lo_nm, hi_nm] with the given number of bands.
WavelengthGrid uniform_grid(std::size_t bands, double lo_nm = 400.0, double hi_nm = 2500.0);

/// clip(baseline - sum of Gaussian wells) evaluated on the grid.
std::vector<double> evaluate_template(const WavelengthGrid& grid,
                                      const std::vector<double>& baseline,
                                      const std::vector<Absorption>& absorptions);

/// Seeded generator. Per class: a smooth baseline in [0.2, 0.8], wells drawn
/// from chemically plausible windows (430-700, 1400-1500, 1900-2000,
/// 2100-2350 nm; widths 10-80 nm, depths 0.1-0.5), redrawn until every pair
/// of class templates is at least 0.05 apart in max-norm; spectra are the
/// template plus iid Gaussian noise, clipped to [0,1]. Labels are
/// "synth_00", "synth_01", ... Deterministic per seed.
SynthLibrary generate_library(const SynthSpec& spec);

/// Ground-truth template for a generated class; Error(Usage) when the label
/// is unknown.
const ClassTemplate& template_of(const SynthLibrary& lib, const std::string& label);

/// Library built from caller-supplied template vectors (noise and clipping
/// applied the same way as generate_library). Lets tests construct classes
/// with exactly controlled band structure.
SpectralLibrary library_from_templates(const WavelengthGrid& grid,
                                       const std::vector<std::vector<double>>& templates,
                                       const std::vector<std::string>& labels, int per_class,
                                       double noise_sigma, std::uint64_t seed);

/// JSON sidecar with per-class baseline, wells, and template values.
std::string templates_json(const SynthLibrary& lib);

}  // namespace speclab
