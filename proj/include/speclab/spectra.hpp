#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "speclab/linalg.hpp"

namespace speclab {

/// Shared wavelength axis in nanometers. Strictly increasing, finite, > 0.
struct WavelengthGrid {
    std::vector<double> wavelengths_nm;

    std::size_t bands() const { return wavelengths_nm.size(); }
};

/// Validates the grid invariants, throwing Error(Format) on violation.
void validate_grid(const WavelengthGrid& grid);

/// One reflectance measurement. health and growth_stage may be empty.
struct Spectrum {
    std::string id;
    std::string species;
    std::string health;
    std::string growth_stage;
    std::vector<double> reflectance;
};

/// Which label a spectrum carries: the species alone, or the composite
/// species/health/growth-stage key.
enum class LabelKey { Species, SpeciesHealthStage };

/// The label string for one spectrum under the given key. Empty composite
/// fields render as "NA", joined with "_" (e.g. "X_NA_NA").
std::string label_of(const Spectrum& s, LabelKey key);

/// Labeled spectra on a common grid.
struct SpectralLibrary {
    WavelengthGrid grid;
    std::vector<Spectrum> spectra;
    LabelKey label_key = LabelKey::Species;
};

/// Checks grid validity plus per-spectrum invariants (length D, finite
/// values, nonempty species, no separator characters in string fields).
void validate_library(const SpectralLibrary& lib);

/// Distinct labels in sorted order; the integer class id of a label is its
/// position in `labels`.
struct ClassIndex {
    std::vector<std::string> labels;

    std::size_t size() const { return labels.size(); }
    /// Position of `label`, or -1 when absent.
    int find(const std::string& label) const;
};

/// Parses the library CSV format:
///   id,species,health,growth_stage,<nm1>,...,<nmD>
/// followed by one data row per spectrum. Errors carry the 1-based data-row
/// number. The returned library uses LabelKey::Species; callers switch keys
/// by assigning label_key.
SpectralLibrary parse_library(const std::string& text);

/// Inverse of parse_library. Reflectance and wavelengths are printed with
/// shortest round-trip precision, so parse(serialize(lib)) reproduces the
/// library bit-exactly.
std::string serialize_library(const SpectralLibrary& lib);

std::string read_text_file(const std::string& path);

/// Number of spectra per label under the library's label key.
std::map<std::string, std::size_t> class_counts(const SpectralLibrary& lib);

/// Row c is the arithmetic mean spectrum of class c, classes ordered as in
/// encode_labels' ClassIndex (sorted labels).
Matrix class_means(const SpectralLibrary& lib);

/// Sorted label index plus the integer label of each spectrum. Requires at
/// least two distinct labels.
std::pair<ClassIndex, std::vector<int>> encode_labels(const SpectralLibrary& lib);

/// Seeded stratified split. Per class with n spectra the train side gets
/// round(train_fraction * n) members (half-up), clamped to [1, n-1];
/// membership comes from a seeded shuffle within the class. Classes are
/// processed in sorted-label order, and both outputs preserve the original
/// row order of the library.
std::pair<SpectralLibrary, SpectralLibrary> stratified_split(
    const SpectralLibrary& lib, double train_fraction, std::uint64_t seed);

}  // namespace speclab
