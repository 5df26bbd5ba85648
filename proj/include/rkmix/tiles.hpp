#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace rkmix {

enum class Quantity { Intensity, Amplitude, Decibel, Label };

std::string to_string(Quantity q);
Quantity quantity_from_string(const std::string& s);

/// Row-major 2-D image with sidecar metadata. The payload is kept in the
/// on-disk precision (32-bit float) so save/load round-trips bit-exactly.
struct ImageGrid {
    std::size_t width = 0;
    std::size_t height = 0;
    std::array<double, 2> pixel_size_m{1.0, 1.0};
    Quantity quantity = Quantity::Intensity;
    std::vector<float> values;  // height rows of width values

    float at(std::size_t row, std::size_t col) const { return values[row * width + col]; }
};

/// A tile within a grid plus the subsampling lattice applied to it.
struct TileSpec {
    std::size_t origin_row = 0;
    std::size_t origin_col = 0;
    std::size_t rows = 0;  // 0 = to the grid edge
    std::size_t cols = 0;
    std::size_t factor = 6;
    std::size_t phase_row = 0;
    std::size_t phase_col = 0;
};

/// The 1-D sample vector fed to the estimators, with the count of
/// non-positive pixels dropped on the way.
struct AmplitudePopulation {
    std::vector<double> a;
    std::size_t dropped = 0;
};

/// Loads <base>.f32 + <base>.json (the .f32/.json extension may be included
/// in the path). Throws MissingHeader / ShapeMismatch / InvalidQuantity.
ImageGrid load_grid(const std::filesystem::path& path);
void save_grid(const ImageGrid& grid, const std::filesystem::path& path);

/// 10^(dB/10), relative units.
ImageGrid db_to_intensity(ImageGrid grid);

/// Subsamples the tile on the (factor, phase) lattice, converts intensity to
/// amplitude (a = sqrt(I)), flattens row-major, and drops non-positive pixels.
AmplitudePopulation extract_and_decimate(const ImageGrid& grid, const TileSpec& spec);

/// Scales the samples in place to unit mean-square amplitude and returns the
/// RMS divisor, so `a_original = a_normalized * scale`.
double normalize_rms(std::vector<double>& samples);

/// Sample-vector files: ASCII one-value-per-line, or the .f32 grid format
/// with a height-1 header.
std::vector<double> load_population(const std::filesystem::path& path);
void save_population(const std::vector<double>& samples, const std::filesystem::path& path);

}  // namespace rkmix
