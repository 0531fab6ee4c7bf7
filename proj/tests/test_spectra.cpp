#include <doctest.h>

#include <cmath>
#include <numeric>
#include <set>

#include "speclab/error.hpp"
#include "speclab/spectra.hpp"
#include "speclab/synth.hpp"

using namespace speclab;

namespace {

Spectrum make_spectrum(std::string id, std::string species, std::vector<double> refl,
                       std::string health = "", std::string stage = "") {
    Spectrum s;
    s.id = std::move(id);
    s.species = std::move(species);
    s.health = std::move(health);
    s.growth_stage = std::move(stage);
    s.reflectance = std::move(refl);
    return s;
}

SpectralLibrary two_band_library() {
    SpectralLibrary lib;
    lib.grid.wavelengths_nm = {500.0, 600.0};
    return lib;
}

}  // namespace

TEST_CASE("parse_library accepts a minimal well-formed file") {
    const SpectralLibrary lib =
        parse_library("id,species,health,growth_stage,500,600\na,X,,,0.1,0.2\n");
    CHECK(lib.grid.bands() == 2);
    REQUIRE(lib.spectra.size() == 1);
    CHECK(lib.spectra[0].id == "a");
    CHECK(lib.spectra[0].species == "X");
    CHECK(lib.spectra[0].health.empty());
    CHECK(lib.spectra[0].growth_stage.empty());
    CHECK(lib.spectra[0].reflectance == std::vector<double>{0.1, 0.2});
}

TEST_CASE("parse_library rejects a decreasing wavelength header") {
    try {
        parse_library("id,species,health,growth_stage,600,500\na,X,,,0.1,0.2\n");
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Format);
        CHECK(std::string(e.what()).find("non-monotonic wavelengths") != std::string::npos);
    }
}

TEST_CASE("parse_library names the offending row on a length mismatch") {
    try {
        parse_library("id,species,health,growth_stage,500,600\na,X,,,0.1\n");
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Format);
        CHECK(std::string(e.what()).find("row 1") != std::string::npos);
    }
}

TEST_CASE("parse_library reports non-numeric reflectance with row and band") {
    try {
        parse_library(
            "id,species,health,growth_stage,500,600\n"
            "a,X,,,0.1,0.2\n"
            "b,X,,,0.1,oops\n");
        FAIL("expected an error");
    } catch (const Error& e) {
        const std::string msg = e.what();
        CHECK(msg.find("row 2") != std::string::npos);
        CHECK(msg.find("band 2") != std::string::npos);
    }
}

TEST_CASE("parse_library rejects empty species, bad headers, empty files") {
    CHECK_THROWS_AS(parse_library("id,species,health,growth_stage,500\na,,,,0.1\n"), Error);
    CHECK_THROWS_AS(parse_library("id,name,health,growth_stage,500\na,X,,,0.1\n"), Error);
    CHECK_THROWS_AS(parse_library("id,species,health,growth_stage\na,X,,\n"), Error);
    CHECK_THROWS_AS(parse_library(""), Error);
    CHECK_THROWS_AS(parse_library("id,species,health,growth_stage,500\n"), Error);
}

TEST_CASE("parse_library skips blank lines and strips carriage returns") {
    const SpectralLibrary lib = parse_library(
        "id,species,health,growth_stage,500,600\r\n\r\na,X,,,0.1,0.2\r\n\nb,Y,,,0.3,0.4\n");
    REQUIRE(lib.spectra.size() == 2);
    CHECK(lib.spectra[1].species == "Y");
}

TEST_CASE("serialize then parse is the identity") {
    SpectralLibrary lib = two_band_library();
    lib.spectra.push_back(make_spectrum("s1", "X", {0.1, 1.0 / 3.0}, "stressed", "early"));
    lib.spectra.push_back(make_spectrum("s2", "Y", {1e-7, 0.999999999999}));
    const std::string text = serialize_library(lib);
    const SpectralLibrary back = parse_library(text);
    REQUIRE(back.spectra.size() == lib.spectra.size());
    CHECK(back.grid.wavelengths_nm == lib.grid.wavelengths_nm);
    for (std::size_t i = 0; i < lib.spectra.size(); ++i) {
        CHECK(back.spectra[i].id == lib.spectra[i].id);
        CHECK(back.spectra[i].species == lib.spectra[i].species);
        CHECK(back.spectra[i].health == lib.spectra[i].health);
        CHECK(back.spectra[i].growth_stage == lib.spectra[i].growth_stage);
        CHECK(back.spectra[i].reflectance == lib.spectra[i].reflectance);
    }
    CHECK(serialize_library(back) == text);
}

TEST_CASE("label_of renders empty composite fields as NA") {
    const Spectrum plain = make_spectrum("a", "X", {0.1});
    CHECK(label_of(plain, LabelKey::Species) == "X");
    CHECK(label_of(plain, LabelKey::SpeciesHealthStage) == "X_NA_NA");
    const Spectrum partial = make_spectrum("b", "X", {0.1}, "stressed");
    CHECK(label_of(partial, LabelKey::SpeciesHealthStage) == "X_stressed_NA");
    const Spectrum full = make_spectrum("c", "X", {0.1}, "healthy", "mature");
    CHECK(label_of(full, LabelKey::SpeciesHealthStage) == "X_healthy_mature");
}

TEST_CASE("validate_library rejects shape and content violations") {
    SpectralLibrary lib = two_band_library();
    lib.spectra.push_back(make_spectrum("a", "X", {0.1, 0.2}));

    SpectralLibrary bad_len = lib;
    bad_len.spectra.push_back(make_spectrum("b", "X", {0.1}));
    CHECK_THROWS_AS(validate_library(bad_len), Error);

    SpectralLibrary bad_val = lib;
    bad_val.spectra.push_back(make_spectrum("b", "X", {0.1, std::nan("")}));
    CHECK_THROWS_AS(validate_library(bad_val), Error);

    SpectralLibrary bad_species = lib;
    bad_species.spectra.push_back(make_spectrum("b", "", {0.1, 0.2}));
    CHECK_THROWS_AS(validate_library(bad_species), Error);

    SpectralLibrary bad_field = lib;
    bad_field.spectra.push_back(make_spectrum("b", "X,Y", {0.1, 0.2}));
    CHECK_THROWS_AS(validate_library(bad_field), Error);
}

TEST_CASE("class_counts tallies labels and sums to the library size") {
    SpectralLibrary lib = two_band_library();
    lib.spectra.push_back(make_spectrum("1", "X", {0.1, 0.2}));
    lib.spectra.push_back(make_spectrum("2", "X", {0.1, 0.2}));
    lib.spectra.push_back(make_spectrum("3", "X", {0.1, 0.2}));
    lib.spectra.push_back(make_spectrum("4", "Y", {0.1, 0.2}));
    lib.spectra.push_back(make_spectrum("5", "Y", {0.1, 0.2}));
    const auto counts = class_counts(lib);
    REQUIRE(counts.size() == 2);
    CHECK(counts.at("X") == 3);
    CHECK(counts.at("Y") == 2);
    std::size_t total = 0;
    for (const auto& [label, n] : counts) total += n;
    CHECK(total == lib.spectra.size());
}

TEST_CASE("class_counts under the composite key renders NA labels") {
    SpectralLibrary lib = two_band_library();
    lib.label_key = LabelKey::SpeciesHealthStage;
    lib.spectra.push_back(make_spectrum("1", "X", {0.1, 0.2}));
    const auto counts = class_counts(lib);
    CHECK(counts.count("X_NA_NA") == 1);
}

TEST_CASE("a library of 902 spectra counts to 902") {
    SynthSpec spec;
    spec.n_classes = 22;
    spec.per_class = 41;
    spec.grid = uniform_grid(16);
    spec.noise_sigma = 0.0;
    spec.seed = 5;
    const SynthLibrary synth = generate_library(spec);
    REQUIRE(synth.library.spectra.size() == 902);
    const auto counts = class_counts(synth.library);
    const std::size_t total = std::accumulate(
        counts.begin(), counts.end(), std::size_t{0},
        [](std::size_t acc, const auto& kv) { return acc + kv.second; });
    CHECK(total == 902);
    CHECK(counts.size() == 22);
}

TEST_CASE("class_means averages per class in sorted label order") {
    SpectralLibrary lib = two_band_library();
    lib.spectra.push_back(make_spectrum("1", "Y", {0.2, 0.4}));
    lib.spectra.push_back(make_spectrum("2", "Y", {0.2, 0.4}));
    lib.spectra.push_back(make_spectrum("3", "Y", {0.2, 0.4}));
    lib.spectra.push_back(make_spectrum("4", "X", {0.0, 0.0}));
    lib.spectra.push_back(make_spectrum("5", "X", {1.0, 1.0}));
    const Matrix means = class_means(lib);
    REQUIRE(means.rows == 2);
    // Row 0 is class "X" (sorted order), row 1 is "Y".
    CHECK(means.at(0, 0) == 0.5);
    CHECK(means.at(0, 1) == 0.5);
    CHECK(means.at(1, 0) == doctest::Approx(0.2));
    CHECK(means.at(1, 1) == doctest::Approx(0.4));
}

TEST_CASE("class_means of a noiseless synthetic class equals its template") {
    SynthSpec spec;
    spec.n_classes = 3;
    spec.per_class = 4;
    spec.grid = uniform_grid(64);
    spec.noise_sigma = 0.0;
    spec.seed = 9;
    const SynthLibrary synth = generate_library(spec);
    const Matrix means = class_means(synth.library);
    REQUIRE(means.rows == 3);
    for (std::size_t c = 0; c < 3; ++c) {
        const ClassTemplate& tpl = synth.templates[c];
        for (std::size_t b = 0; b < 64; ++b) {
            CHECK(means.at(c, b) == tpl.values[b]);
        }
    }
}

TEST_CASE("encode_labels assigns sorted indices") {
    SpectralLibrary lib = two_band_library();
    lib.spectra.push_back(make_spectrum("1", "B", {0.1, 0.2}));
    lib.spectra.push_back(make_spectrum("2", "A", {0.1, 0.2}));
    lib.spectra.push_back(make_spectrum("3", "B", {0.1, 0.2}));
    const auto [index, codes] = encode_labels(lib);
    CHECK(index.labels == std::vector<std::string>{"A", "B"});
    CHECK(codes == std::vector<int>{1, 0, 1});
    CHECK(index.find("A") == 0);
    CHECK(index.find("B") == 1);
    CHECK(index.find("C") == -1);
}

TEST_CASE("encode_labels needs two distinct labels") {
    SpectralLibrary lib = two_band_library();
    lib.spectra.push_back(make_spectrum("1", "X", {0.1, 0.2}));
    lib.spectra.push_back(make_spectrum("2", "X", {0.1, 0.2}));
    CHECK_THROWS_AS(encode_labels(lib), Error);
}

TEST_CASE("encode_labels handles 18 distinct labels") {
    SpectralLibrary lib = two_band_library();
    for (int c = 0; c < 18; ++c) {
        const std::string name = "species_" + std::to_string(c);
        lib.spectra.push_back(make_spectrum(name + "_a", name, {0.1, 0.2}));
        lib.spectra.push_back(make_spectrum(name + "_b", name, {0.3, 0.4}));
    }
    const auto [index, codes] = encode_labels(lib);
    CHECK(index.size() == 18);
    for (int code : codes) {
        CHECK(code >= 0);
        CHECK(code < 18);
    }
}

TEST_CASE("stratified_split honors the per-class rounding rule") {
    SpectralLibrary lib = two_band_library();
    for (int i = 0; i < 10; ++i) {
        lib.spectra.push_back(make_spectrum("x" + std::to_string(i), "X", {0.1, 0.2}));
    }
    for (int i = 0; i < 2; ++i) {
        lib.spectra.push_back(make_spectrum("y" + std::to_string(i), "Y", {0.3, 0.4}));
    }
    const auto [train, test] = stratified_split(lib, 0.8, 1);
    const auto train_counts = class_counts(train);
    const auto test_counts = class_counts(test);
    CHECK(train_counts.at("X") == 8);
    CHECK(test_counts.at("X") == 2);
    // 0.8 * 2 rounds to 2, clamped to n-1 = 1.
    CHECK(train_counts.at("Y") == 1);
    CHECK(test_counts.at("Y") == 1);
}

TEST_CASE("stratified_split clamps extreme fractions to keep both sides") {
    SpectralLibrary lib = two_band_library();
    lib.spectra.push_back(make_spectrum("1", "X", {0.1, 0.2}));
    lib.spectra.push_back(make_spectrum("2", "X", {0.3, 0.4}));
    lib.spectra.push_back(make_spectrum("3", "Y", {0.1, 0.2}));
    lib.spectra.push_back(make_spectrum("4", "Y", {0.3, 0.4}));
    const auto [train, test] = stratified_split(lib, 0.99, 3);
    CHECK(class_counts(train).at("X") == 1);
    CHECK(class_counts(test).at("X") == 1);
}

TEST_CASE("stratified_split is deterministic and partitions the library") {
    SynthSpec spec;
    spec.n_classes = 4;
    spec.per_class = 7;
    spec.grid = uniform_grid(8);
    spec.seed = 2;
    const SpectralLibrary lib = generate_library(spec).library;

    const auto [train1, test1] = stratified_split(lib, 0.7, 11);
    const auto [train2, test2] = stratified_split(lib, 0.7, 11);
    CHECK(serialize_library(train1) == serialize_library(train2));
    CHECK(serialize_library(test1) == serialize_library(test2));

    CHECK(train1.spectra.size() + test1.spectra.size() == lib.spectra.size());
    // Outputs preserve the original row order; ids must be disjoint.
    std::set<std::string> train_ids, test_ids;
    for (const Spectrum& s : train1.spectra) train_ids.insert(s.id);
    for (const Spectrum& s : test1.spectra) test_ids.insert(s.id);
    for (const std::string& id : train_ids) CHECK(test_ids.count(id) == 0);

    const auto [train3, test3] = stratified_split(lib, 0.7, 12);
    CHECK(serialize_library(train3) != serialize_library(train1));
}

TEST_CASE("stratified_split rejects undersized classes and bad fractions") {
    SpectralLibrary lib = two_band_library();
    lib.spectra.push_back(make_spectrum("1", "X", {0.1, 0.2}));
    lib.spectra.push_back(make_spectrum("2", "X", {0.3, 0.4}));
    lib.spectra.push_back(make_spectrum("3", "solo", {0.1, 0.2}));
    try {
        stratified_split(lib, 0.8, 1);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Usage);
        CHECK(std::string(e.what()).find("solo") != std::string::npos);
    }
    lib.spectra.pop_back();
    CHECK_THROWS_AS(stratified_split(lib, 0.0, 1), Error);
    CHECK_THROWS_AS(stratified_split(lib, 1.0, 1), Error);
}

TEST_CASE("validate_grid enforces positive finite increasing wavelengths") {
    WavelengthGrid good{{400.0, 500.0}};
    CHECK_NOTHROW(validate_grid(good));
    CHECK_THROWS_AS(validate_grid(WavelengthGrid{{}}), Error);
    CHECK_THROWS_AS(validate_grid(WavelengthGrid{{-1.0, 2.0}}), Error);
    CHECK_THROWS_AS(validate_grid(WavelengthGrid{{1.0, 1.0}}), Error);
    CHECK_THROWS_AS(validate_grid(WavelengthGrid{{1.0, std::nan("")}}), Error);
}
