#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "speclab/error.hpp"
#include "speclab/spectra.hpp"
#include "speclab/synth.hpp"

using namespace speclab;

TEST_CASE("uniform_grid spans the requested range") {
    const WavelengthGrid grid = uniform_grid(2152);
    REQUIRE(grid.bands() == 2152);
    CHECK(grid.wavelengths_nm.front() == 400.0);
    CHECK(grid.wavelengths_nm.back() == doctest::Approx(2500.0).epsilon(1e-12));
    const WavelengthGrid small = uniform_grid(3, 100.0, 300.0);
    CHECK(small.wavelengths_nm[1] == doctest::Approx(200.0));
}

TEST_CASE("evaluate_template digs a Gaussian well of the stated depth") {
    WavelengthGrid grid;
    grid.wavelengths_nm = {600.0, 680.0, 690.0, 800.0};
    const std::vector<double> baseline(4, 0.6);
    const std::vector<Absorption> wells = {{680.0, 10.0, 0.4}};
    const std::vector<double> vals = evaluate_template(grid, baseline, wells);
    CHECK(vals[1] == 0.6 - 0.4);  // exp(0) is exact
    CHECK(vals[2] == doctest::Approx(0.6 - 0.4 * std::exp(-0.5)));
    // 8 sigma out the well is numerically negligible.
    CHECK(vals[0] == doctest::Approx(0.6).epsilon(1e-9));
    CHECK(vals[3] == doctest::Approx(0.6));
}

TEST_CASE("evaluate_template clips to [0,1]") {
    WavelengthGrid grid;
    grid.wavelengths_nm = {500.0};
    CHECK(evaluate_template(grid, {0.3}, {{500.0, 10.0, 0.5}})[0] == 0.0);
    CHECK(evaluate_template(grid, {1.7}, {})[0] == 1.0);
}

TEST_CASE("noiseless generation reproduces the class template exactly") {
    SynthSpec spec;
    spec.n_classes = 2;
    spec.per_class = 3;
    spec.grid = uniform_grid(32);
    spec.noise_sigma = 0.0;
    spec.seed = 4;
    const SynthLibrary out = generate_library(spec);
    REQUIRE(out.templates.size() == 2);
    REQUIRE(out.library.spectra.size() == 6);
    for (const Spectrum& s : out.library.spectra) {
        const ClassTemplate& tpl = template_of(out, s.species);
        CHECK(s.reflectance == tpl.values);
    }
}

TEST_CASE("generation is deterministic per seed") {
    SynthSpec spec;
    spec.n_classes = 3;
    spec.per_class = 5;
    spec.grid = uniform_grid(64);
    spec.seed = 11;
    const std::string a = serialize_library(generate_library(spec).library);
    const std::string b = serialize_library(generate_library(spec).library);
    CHECK(a == b);
    spec.seed = 12;
    CHECK(serialize_library(generate_library(spec).library) != a);
}

TEST_CASE("generated reflectance stays in [0,1] and templates stay separated") {
    SynthSpec spec;
    spec.n_classes = 6;
    spec.per_class = 4;
    spec.grid = uniform_grid(128);
    spec.noise_sigma = 0.05;
    spec.seed = 21;
    const SynthLibrary out = generate_library(spec);
    for (const Spectrum& s : out.library.spectra) {
        for (double v : s.reflectance) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
    for (std::size_t a = 0; a < out.templates.size(); ++a) {
        for (std::size_t b = a + 1; b < out.templates.size(); ++b) {
            double d = 0.0;
            for (std::size_t i = 0; i < out.templates[a].values.size(); ++i) {
                d = std::max(d, std::abs(out.templates[a].values[i] - out.templates[b].values[i]));
            }
            CHECK(d >= 0.05);
        }
    }
}

TEST_CASE("class labels are zero-padded and stable") {
    SynthSpec spec;
    spec.n_classes = 3;
    spec.per_class = 2;
    spec.grid = uniform_grid(8);
    const SynthLibrary out = generate_library(spec);
    CHECK(out.templates[0].label == "synth_00");
    CHECK(out.templates[1].label == "synth_01");
    CHECK(out.templates[2].label == "synth_02");
    CHECK(out.library.spectra[0].id == "synth_00_0000");
}

TEST_CASE("template_of rejects unknown labels") {
    SynthSpec spec;
    spec.n_classes = 2;
    spec.per_class = 2;
    spec.grid = uniform_grid(8);
    const SynthLibrary out = generate_library(spec);
    CHECK(&template_of(out, "synth_01") == &out.templates[1]);
    try {
        template_of(out, "synth_99");
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Usage);
        CHECK(std::string(e.what()).find("synth_99") != std::string::npos);
    }
}

TEST_CASE("generate_library validates its parameters") {
    SynthSpec spec;
    spec.grid = uniform_grid(8);
    spec.n_classes = 1;
    CHECK_THROWS_AS(generate_library(spec), Error);
    spec.n_classes = 2;
    spec.per_class = 1;
    CHECK_THROWS_AS(generate_library(spec), Error);
    spec.per_class = 2;
    spec.features_per_class = 0;
    CHECK_THROWS_AS(generate_library(spec), Error);
    spec.features_per_class = 3;
    spec.noise_sigma = -0.1;
    CHECK_THROWS_AS(generate_library(spec), Error);
}

TEST_CASE("library_from_templates controls band structure exactly") {
    const WavelengthGrid grid = uniform_grid(4, 500.0, 800.0);
    const std::vector<std::vector<double>> templates = {{0.2, 0.4, 0.6, 0.8},
                                                        {0.8, 0.6, 0.4, 0.2}};
    const SpectralLibrary lib =
        library_from_templates(grid, templates, {"lo", "hi"}, 3, 0.0, 1);
    REQUIRE(lib.spectra.size() == 6);
    CHECK(lib.spectra[0].species == "lo");
    CHECK(lib.spectra[0].reflectance == templates[0]);
    CHECK(lib.spectra[5].species == "hi");
    CHECK(lib.spectra[5].reflectance == templates[1]);
    CHECK_THROWS_AS(library_from_templates(grid, templates, {"only"}, 3, 0.0, 1), Error);
    CHECK_THROWS_AS(
        library_from_templates(grid, {{0.1, 0.2}, {0.3, 0.4}}, {"a", "b"}, 3, 0.0, 1), Error);
}

TEST_CASE("templates_json lists every class with its wells") {
    SynthSpec spec;
    spec.n_classes = 2;
    spec.per_class = 2;
    spec.grid = uniform_grid(8);
    spec.features_per_class = 2;
    const SynthLibrary out = generate_library(spec);
    const std::string json = templates_json(out);
    CHECK(json.find("\"wavelengths_nm\"") != std::string::npos);
    CHECK(json.find("\"synth_00\"") != std::string::npos);
    CHECK(json.find("\"synth_01\"") != std::string::npos);
    CHECK(json.find("\"center_nm\"") != std::string::npos);
    CHECK(json.find("\"depth\"") != std::string::npos);
}

TEST_CASE("noisy class means land within the standard-error window") {
    // With n draws of sigma noise per band, the class mean should sit within
    // 3*sigma/sqrt(n) of the template at nearly every band. Clipping at 0 or 1
    // shifts the mean systematically wherever the template sits near a clip
    // boundary, so bands within 4 sigma of 0 or 1 are excluded; elsewhere the
    // clip probability is ~3e-5 and the unclipped statistics apply.
    const double sigma = 0.01;
    const int per_class = 200;
    std::size_t cells = 0;
    std::size_t hits = 0;
    std::size_t skipped = 0;
    for (std::uint64_t seed : {1, 2, 3}) {
        SynthSpec spec;
        spec.n_classes = 3;
        spec.per_class = per_class;
        spec.grid = uniform_grid(150);
        spec.noise_sigma = sigma;
        spec.seed = seed;
        const SynthLibrary out = generate_library(spec);
        SpectralLibrary lib = out.library;
        const Matrix means = class_means(lib);
        const double window = 3.0 * sigma / std::sqrt(static_cast<double>(per_class));
        for (std::size_t c = 0; c < out.templates.size(); ++c) {
            for (std::size_t b = 0; b < spec.grid.bands(); ++b) {
                const double t = out.templates[c].values[b];
                if (t < 4.0 * sigma || t > 1.0 - 4.0 * sigma) {
                    ++skipped;
                    continue;
                }
                ++cells;
                if (std::abs(means.at(c, b) - t) <= window) ++hits;
            }
        }
    }
    // The exclusion must stay a sliver of the corpus or the check is hollow.
    CHECK(skipped < cells / 4);
    const double pass_rate = static_cast<double>(hits) / static_cast<double>(cells);
    CHECK(pass_rate >= 0.99);
}
