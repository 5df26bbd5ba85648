#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <vector>

#include "rkmix/em.hpp"
#include "rkmix/errors.hpp"
#include "rkmix/mixture.hpp"
#include "rkmix/tiles.hpp"

using namespace rkmix;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    const fs::path dir = fs::temp_directory_path() / "rkmix_tiles_test";
    fs::create_directories(dir);
    return dir;
}

ImageGrid make_grid(std::size_t w, std::size_t h, Quantity q, float fill) {
    ImageGrid g;
    g.width = w;
    g.height = h;
    g.quantity = q;
    g.values.assign(w * h, fill);
    return g;
}

}  // namespace

TEST_CASE("quantity names round-trip") {
    for (Quantity q : {Quantity::Intensity, Quantity::Amplitude, Quantity::Decibel,
                       Quantity::Label})
        CHECK(quantity_from_string(to_string(q)) == q);
    CHECK_THROWS_AS(quantity_from_string("pressure"), InvalidQuantity);
}

TEST_CASE("grid save/load round-trips bit-exactly") {
    const fs::path base = temp_dir() / "roundtrip";
    ImageGrid g = make_grid(3, 2, Quantity::Intensity, 0.0f);
    g.pixel_size_m = {0.02, 0.03};
    g.values = {0.0f, 1.5f, 2.25f, 1e-30f, 3.1415927f, 1e30f};
    save_grid(g, base);

    const ImageGrid back = load_grid(base);
    CHECK(back.width == 3);
    CHECK(back.height == 2);
    CHECK(back.quantity == Quantity::Intensity);
    CHECK(back.pixel_size_m[0] == 0.02);
    CHECK(back.pixel_size_m[1] == 0.03);
    REQUIRE(back.values.size() == g.values.size());
    for (std::size_t i = 0; i < g.values.size(); ++i) CHECK(back.values[i] == g.values[i]);

    // The .f32 / .json suffix may be included in the path.
    CHECK(load_grid(fs::path(base).concat(".f32")).values == g.values);
    CHECK(load_grid(fs::path(base).concat(".json")).values == g.values);
}

TEST_CASE("load_grid error paths") {
    const fs::path dir = temp_dir();

    CHECK_THROWS_AS(load_grid(dir / "does_not_exist"), MissingHeader);

    {
        std::ofstream(dir / "broken.json") << "{ not json";
        std::ofstream(dir / "broken.f32", std::ios::binary) << "xxxx";
        CHECK_THROWS_AS(load_grid(dir / "broken"), MissingHeader);
    }
    {
        std::ofstream(dir / "incomplete.json") << R"({"width": 2})";
        CHECK_THROWS_AS(load_grid(dir / "incomplete"), MissingHeader);
    }
    {
        // Declared 600x600 but only one pixel of payload.
        std::ofstream(dir / "short.json")
            << R"({"width":600,"height":600,"pixel_size_m":[0.02,0.02],"quantity":"intensity"})";
        const float px = 1.0f;
        std::ofstream(dir / "short.f32", std::ios::binary)
            .write(reinterpret_cast<const char*>(&px), sizeof px);
        CHECK_THROWS_AS(load_grid(dir / "short"), ShapeMismatch);
    }
    {
        std::ofstream(dir / "badq.json")
            << R"({"width":1,"height":1,"pixel_size_m":[0.02,0.02],"quantity":"volume"})";
        const float px = 1.0f;
        std::ofstream(dir / "badq.f32", std::ios::binary)
            .write(reinterpret_cast<const char*>(&px), sizeof px);
        CHECK_THROWS_AS(load_grid(dir / "badq"), InvalidQuantity);
    }
    {
        // Negative pixels are invalid for intensity grids.
        std::ofstream(dir / "neg.json")
            << R"({"width":1,"height":1,"pixel_size_m":[0.02,0.02],"quantity":"intensity"})";
        const float px = -1.0f;
        std::ofstream(dir / "neg.f32", std::ios::binary)
            .write(reinterpret_cast<const char*>(&px), sizeof px);
        CHECK_THROWS_AS(load_grid(dir / "neg"), InvalidQuantity);
    }
}

TEST_CASE("save_grid validates the shape") {
    ImageGrid g = make_grid(2, 2, Quantity::Intensity, 1.0f);
    g.values.pop_back();
    CHECK_THROWS_AS(save_grid(g, temp_dir() / "bad_shape"), ShapeMismatch);
}

TEST_CASE("db_to_intensity") {
    ImageGrid g = make_grid(3, 1, Quantity::Decibel, 0.0f);
    g.values = {0.0f, 10.0f, -20.0f};
    const ImageGrid lin = db_to_intensity(g);
    CHECK(lin.quantity == Quantity::Intensity);
    CHECK(lin.values[0] == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(lin.values[1] == doctest::Approx(10.0).epsilon(1e-7));
    CHECK(lin.values[2] == doctest::Approx(0.01).epsilon(1e-7));

    CHECK_THROWS_AS(db_to_intensity(make_grid(1, 1, Quantity::Intensity, 1.0f)),
                    InvalidQuantity);

    // 10*log10 followed by the conversion is the identity on positive grids.
    ImageGrid db = make_grid(4, 1, Quantity::Decibel, 0.0f);
    const std::vector<double> original{0.25, 1.0, 7.5, 4000.0};
    for (std::size_t i = 0; i < original.size(); ++i)
        db.values[i] = static_cast<float>(10.0 * std::log10(original[i]));
    const ImageGrid rt = db_to_intensity(db);
    for (std::size_t i = 0; i < original.size(); ++i)
        CHECK(rt.values[i] == doctest::Approx(original[i]).epsilon(1e-6));
}

TEST_CASE("extract_and_decimate sample counts") {
    // 600x600 at factor 6 gives exactly 100x100 samples.
    const ImageGrid big = make_grid(600, 600, Quantity::Intensity, 1.0f);
    TileSpec spec;
    spec.factor = 6;
    CHECK(extract_and_decimate(big, spec).a.size() == 10000);

    // factor 1 is the identity subsampling.
    const ImageGrid small = make_grid(25, 17, Quantity::Intensity, 2.0f);
    TileSpec ident;
    ident.factor = 1;
    CHECK(extract_and_decimate(small, ident).a.size() == 25 * 17);

    // ceil(rows/f) * ceil(cols/f) at phase 0 for non-divisible extents.
    TileSpec odd;
    odd.factor = 6;
    const auto pop = extract_and_decimate(small, odd);
    CHECK(pop.a.size() == 3 * 5);  // ceil(17/6) * ceil(25/6)
    CHECK(pop.dropped == 0);
}

TEST_CASE("extract_and_decimate converts intensity to amplitude") {
    const ImageGrid g = make_grid(12, 12, Quantity::Intensity, 4.0f);
    TileSpec spec;
    spec.factor = 6;
    for (const double a : extract_and_decimate(g, spec).a) CHECK(a == 2.0);

    ImageGrid amp = make_grid(12, 12, Quantity::Amplitude, 4.0f);
    for (const double a : extract_and_decimate(amp, spec).a) CHECK(a == 4.0);
}

TEST_CASE("extract_and_decimate drops non-positive pixels") {
    ImageGrid g = make_grid(6, 6, Quantity::Intensity, 1.0f);
    g.values[0] = 0.0f;  // on the phase-0 factor-3 lattice
    TileSpec spec;
    spec.factor = 3;
    const auto pop = extract_and_decimate(g, spec);
    CHECK(pop.a.size() == 3);
    CHECK(pop.dropped == 1);
}

TEST_CASE("extract_and_decimate respects origin, extent, and phase") {
    ImageGrid g = make_grid(10, 10, Quantity::Amplitude, 0.5f);
    for (std::size_t r = 0; r < 10; ++r)
        for (std::size_t c = 0; c < 10; ++c)
            g.values[r * 10 + c] = static_cast<float>(r * 10 + c);
    g.values[0] = 0.5f;  // keep (0,0) positive

    TileSpec spec;
    spec.origin_row = 2;
    spec.origin_col = 3;
    spec.rows = 4;
    spec.cols = 4;
    spec.factor = 2;
    spec.phase_row = 1;
    spec.phase_col = 0;
    const auto pop = extract_and_decimate(g, spec);
    // rows 3,5 and cols 3,5 of the source grid.
    REQUIRE(pop.a.size() == 4);
    CHECK(pop.a[0] == 33.0);
    CHECK(pop.a[1] == 35.0);
    CHECK(pop.a[2] == 53.0);
    CHECK(pop.a[3] == 55.0);
}

TEST_CASE("extract_and_decimate error contracts") {
    const ImageGrid g = make_grid(10, 10, Quantity::Intensity, 1.0f);
    TileSpec outside;
    outside.origin_row = 8;
    outside.rows = 5;
    CHECK_THROWS_AS(extract_and_decimate(g, outside), ShapeMismatch);

    TileSpec bad_phase;
    bad_phase.factor = 2;
    bad_phase.phase_row = 2;
    CHECK_THROWS_AS(extract_and_decimate(g, bad_phase), std::invalid_argument);

    const ImageGrid db = make_grid(4, 4, Quantity::Decibel, 0.0f);
    CHECK_THROWS_AS(extract_and_decimate(db, TileSpec{}), InvalidQuantity);
}

TEST_CASE("normalize_rms") {
    std::vector<double> samples{0.5, 1.0, 2.0, 4.0, 0.25};
    const std::vector<double> original = samples;
    const double scale = normalize_rms(samples);

    double mean_sq = 0.0;
    for (const double a : samples) mean_sq += a * a;
    mean_sq /= static_cast<double>(samples.size());
    CHECK(mean_sq == doctest::Approx(1.0).epsilon(1e-12));

    for (std::size_t i = 0; i < samples.size(); ++i)
        CHECK(samples[i] * scale == doctest::Approx(original[i]).epsilon(1e-15));

    // A unit-RMS vector is a fixed point.
    const double scale2 = normalize_rms(samples);
    CHECK(scale2 == doctest::Approx(1.0).epsilon(1e-12));

    std::vector<double> empty;
    CHECK_THROWS_AS(normalize_rms(empty), std::invalid_argument);
}

TEST_CASE("population files round-trip") {
    const fs::path dir = temp_dir();
    const std::vector<double> samples{0.125, 1.0, 2.7182818284590452, 1e-12, 314.159};

    const fs::path ascii = dir / "pop.txt";
    save_population(samples, ascii);
    const auto back = load_population(ascii);
    REQUIRE(back.size() == samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i)
        CHECK(back[i] == samples[i]);  // 17 significant digits round-trip doubles

    // Raw-float form: exact for values representable in 32 bits.
    const std::vector<double> f32_exact{0.5, 1.25, 1024.0, 0.0078125};
    const fs::path raw = dir / "pop.f32";
    save_population(f32_exact, raw);
    CHECK(load_population(raw) == f32_exact);

    std::ofstream(dir / "junk.txt") << "1.0\ntwo\n";
    CHECK_THROWS_AS(load_population(dir / "junk.txt"), IoError);
    CHECK_THROWS_AS(load_population(dir / "no_such_file.txt"), IoError);
}

TEST_CASE("decimation phase does not bias fits on a stationary field") {
    RKMixture truth;
    truth.w0 = 0.6;
    truth.rayleigh.lambda0 = 1.0;
    // High alpha keeps the K component away from the Rayleigh mode, so the
    // weight estimate is essentially a (tight) binomial fraction per phase.
    truth.components.push_back({0.4, {100.0, 20.0}});

    const std::size_t side = 240;
    const auto draws = sample_mixture(truth, side * side, 77).amplitudes;
    ImageGrid field = make_grid(side, side, Quantity::Amplitude, 0.0f);
    for (std::size_t i = 0; i < draws.size(); ++i)
        field.values[i] = static_cast<float>(draws[i]);

    EmConfig config;
    config.tol = 1e-7;
    config.max_iter = 150;
    for (std::size_t pr = 0; pr < 6; ++pr) {
        for (std::size_t pc = 0; pc < 6; ++pc) {
            TileSpec spec;
            spec.factor = 6;
            spec.phase_row = pr;
            spec.phase_col = pc;
            const auto pop = extract_and_decimate(field, spec);
            REQUIRE(pop.a.size() == 1600);
            const auto fit = em_fit(pop.a, 2, config);
            CHECK(std::fabs(fit.theta.w0 - truth.w0) < 0.05);
        }
    }
}
