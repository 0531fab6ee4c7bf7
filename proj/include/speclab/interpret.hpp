#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "speclab/linalg.hpp"
#include "speclab/net.hpp"
#include "speclab/spectra.hpp"

namespace speclab {

/// Hidden neurons whose first-layer weight row still varies after training:
/// row i is active iff the population standard deviation of w1 row i is
/// strictly greater than std_threshold.
struct ActiveNeuronSet {
    std::vector<std::size_t> indices;  // ascending
    double std_threshold = 0.1;
    std::vector<double> row_std;  // length H, one entry per row
};

ActiveNeuronSet active_neurons(const Matrix& w1, double std_threshold = 0.1);

/// Per-band mean and population standard deviation of the first-layer
/// weights, restricted to the active rows.
struct WavelengthActivity {
    std::vector<double> wavelengths_nm;
    std::vector<double> mean_weight;
    std::vector<double> std_weight;
};

/// Requires a nonempty active set; wavelengths_nm must have w1.cols entries.
WavelengthActivity wavelength_activity(const Matrix& w1,
                                       const std::vector<double>& wavelengths_nm,
                                       const ActiveNeuronSet& active);
WavelengthActivity wavelength_activity(const DenseNet& net, const ActiveNeuronSet& active);

/// Second-layer weights feeding one class, plus the neurons the class relies
/// on: |w2[c,j]| strictly greater than magnitude_threshold.
struct ClassReliance {
    std::string label;
    std::vector<double> weights;  // w2 row c, length H
    std::vector<std::size_t> reliant_indices;
    double magnitude_threshold = 1.0;
};

ClassReliance class_reliance(const DenseNet& net, std::size_t c,
                             double magnitude_threshold = 1.0);

/// Activation curves for one class: for each reliant neuron j the per-band
/// contribution weight w2[c,j] * w1[j,:], with the class mean spectrum
/// attached for overlay plots.
struct SpectralActivation {
    std::string label;
    std::vector<double> class_mean;
    std::map<std::size_t, std::vector<double>> curves;
    std::string note;  // set when the class has no reliant neurons
};

/// The class mean comes from `lib` under lib.label_key; the library grid
/// must match the model grid exactly.
SpectralActivation spectral_activation(const DenseNet& net, const SpectralLibrary& lib,
                                       std::size_t c, double magnitude_threshold = 1.0);

/// |logit_c(s) - (b2[c] + sum_j w2[c,j] * forward_hidden(net, s)[j])|, the
/// two routes accumulated in opposite index orders. Stays at or below 1e-10
/// in double precision for any finite net and spectrum of ordinary scale.
double logit_decomposition_check(const DenseNet& net, std::span<const double> s,
                                 std::size_t c);

/// Binary 8-bit PGM (P5) of a matrix, min-max scaled over the whole matrix
/// so the smallest entry maps to 0 and the largest to 255. A constant
/// matrix maps to all zeros. Image row = matrix row, column = matrix column.
std::string matrix_to_pgm(const Matrix& m);

struct InterpretParams {
    double std_threshold = 0.1;
    double magnitude_threshold = 1.0;
};

/// Builds the full weight-inspection report and writes it into `dir`
/// (created if needed): active_neurons.json, layer-1 weight maps as PGM
/// (all rows and active rows only), the wavelength-activity table and plot,
/// and per-class reliance and activation tables and plots. Every file is
/// rendered in memory first, so nothing is written if any stage fails.
/// Returns the file names written, in write order, relative to `dir`.
std::vector<std::string> write_interpret_report(const std::string& dir, const DenseNet& net,
                                                const SpectralLibrary& lib,
                                                const InterpretParams& params);

}  // namespace speclab
