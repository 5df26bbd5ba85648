#include "rkmix/tiles.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rkmix/errors.hpp"

namespace rkmix {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(Quantity q) {
    switch (q) {
        case Quantity::Intensity: return "intensity";
        case Quantity::Amplitude: return "amplitude";
        case Quantity::Decibel: return "decibel";
        case Quantity::Label: return "label";
    }
    return "intensity";
}

Quantity quantity_from_string(const std::string& s) {
    if (s == "intensity") return Quantity::Intensity;
    if (s == "amplitude") return Quantity::Amplitude;
    if (s == "decibel") return Quantity::Decibel;
    if (s == "label") return Quantity::Label;
    throw InvalidQuantity("unknown quantity '" + s + "'");
}

namespace {

fs::path base_path(const fs::path& path) {
    if (path.extension() == ".f32" || path.extension() == ".json") {
        fs::path p = path;
        p.replace_extension();
        return p;
    }
    return path;
}

void validate_values(const ImageGrid& grid) {
    if (grid.quantity == Quantity::Decibel) return;
    for (const float v : grid.values)
        if (v < 0.0f && grid.quantity != Quantity::Label)
            throw InvalidQuantity("negative value in " + to_string(grid.quantity) + " grid");
}

}  // namespace

ImageGrid load_grid(const fs::path& path) {
    const fs::path base = base_path(path);
    const fs::path header_path = fs::path(base).concat(".json");
    const fs::path payload_path = fs::path(base).concat(".f32");

    std::ifstream header_in(header_path);
    if (!header_in) throw MissingHeader("missing header " + header_path.string());

    json header;
    try {
        header_in >> header;
    } catch (const json::exception& e) {
        throw MissingHeader("malformed header " + header_path.string() + ": " + e.what());
    }

    ImageGrid grid;
    try {
        grid.width = header.at("width").get<std::size_t>();
        grid.height = header.at("height").get<std::size_t>();
        const auto ps = header.at("pixel_size_m");
        grid.pixel_size_m = {ps.at(0).get<double>(), ps.at(1).get<double>()};
        grid.quantity = quantity_from_string(header.at("quantity").get<std::string>());
    } catch (const json::exception& e) {
        throw MissingHeader("incomplete header " + header_path.string() + ": " + e.what());
    }
    if (grid.width == 0 || grid.height == 0 || grid.pixel_size_m[0] <= 0.0 ||
        grid.pixel_size_m[1] <= 0.0)
        throw MissingHeader("invalid dimensions in " + header_path.string());

    std::ifstream payload(payload_path, std::ios::binary);
    if (!payload) throw MissingHeader("missing payload " + payload_path.string());
    payload.seekg(0, std::ios::end);
    const auto bytes = static_cast<std::size_t>(payload.tellg());
    const std::size_t expected = grid.width * grid.height * sizeof(float);
    if (bytes != expected) {
        std::ostringstream msg;
        msg << payload_path.string() << ": expected " << expected << " bytes, found " << bytes;
        throw ShapeMismatch(msg.str());
    }
    payload.seekg(0);
    grid.values.resize(grid.width * grid.height);
    payload.read(reinterpret_cast<char*>(grid.values.data()), static_cast<std::streamsize>(bytes));
    if (!payload) throw ShapeMismatch("short read from " + payload_path.string());

    validate_values(grid);
    return grid;
}

void save_grid(const ImageGrid& grid, const fs::path& path) {
    if (grid.values.size() != grid.width * grid.height)
        throw ShapeMismatch("grid value count does not match declared dimensions");
    const fs::path base = base_path(path);

    json header = {
        {"width", grid.width},
        {"height", grid.height},
        {"pixel_size_m", {grid.pixel_size_m[0], grid.pixel_size_m[1]}},
        {"quantity", to_string(grid.quantity)},
    };
    std::ofstream header_out(fs::path(base).concat(".json"));
    header_out << header.dump(2) << "\n";
    if (!header_out) throw IoError("cannot write header for " + base.string());

    std::ofstream payload(fs::path(base).concat(".f32"), std::ios::binary);
    payload.write(reinterpret_cast<const char*>(grid.values.data()),
                  static_cast<std::streamsize>(grid.values.size() * sizeof(float)));
    if (!payload) throw IoError("cannot write payload for " + base.string());
}

ImageGrid db_to_intensity(ImageGrid grid) {
    if (grid.quantity != Quantity::Decibel)
        throw InvalidQuantity("db_to_intensity: grid is not in decibels");
    for (auto& v : grid.values) v = static_cast<float>(std::pow(10.0, v / 10.0));
    grid.quantity = Quantity::Intensity;
    return grid;
}

AmplitudePopulation extract_and_decimate(const ImageGrid& grid, const TileSpec& spec) {
    if (grid.quantity != Quantity::Intensity && grid.quantity != Quantity::Amplitude)
        throw InvalidQuantity("extract_and_decimate: grid must be intensity or amplitude");
    if (spec.factor < 1) throw std::invalid_argument("decimation factor must be >= 1");
    if (spec.phase_row >= spec.factor || spec.phase_col >= spec.factor)
        throw std::invalid_argument("decimation phase must be below the factor");

    const std::size_t rows = spec.rows ? spec.rows : grid.height - spec.origin_row;
    const std::size_t cols = spec.cols ? spec.cols : grid.width - spec.origin_col;
    if (spec.origin_row + rows > grid.height || spec.origin_col + cols > grid.width)
        throw ShapeMismatch("tile extends outside the grid");

    AmplitudePopulation pop;
    pop.a.reserve((rows / spec.factor + 1) * (cols / spec.factor + 1));
    for (std::size_t r = spec.phase_row; r < rows; r += spec.factor) {
        for (std::size_t c = spec.phase_col; c < cols; c += spec.factor) {
            const double v = grid.at(spec.origin_row + r, spec.origin_col + c);
            if (v <= 0.0) {
                ++pop.dropped;
                continue;
            }
            pop.a.push_back(grid.quantity == Quantity::Intensity ? std::sqrt(v) : v);
        }
    }
    return pop;
}

double normalize_rms(std::vector<double>& samples) {
    if (samples.empty()) throw std::invalid_argument("normalize_rms: empty sample vector");
    double mean_sq = 0.0;
    for (const double a : samples) mean_sq += a * a;
    mean_sq /= static_cast<double>(samples.size());
    if (mean_sq <= 0.0) throw std::invalid_argument("normalize_rms: all-zero sample vector");
    const double scale = std::sqrt(mean_sq);
    for (auto& a : samples) a /= scale;
    return scale;
}

std::vector<double> load_population(const fs::path& path) {
    if (path.extension() == ".f32" ||
        fs::exists(fs::path(base_path(path)).concat(".json"))) {
        const ImageGrid grid = load_grid(path);
        return std::vector<double>(grid.values.begin(), grid.values.end());
    }
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<double> samples;
    double v;
    while (in >> v) samples.push_back(v);
    if (!in.eof()) throw IoError("non-numeric content in " + path.string());
    return samples;
}

void save_population(const std::vector<double>& samples, const fs::path& path) {
    if (path.extension() == ".f32") {
        ImageGrid grid;
        grid.width = samples.size();
        grid.height = 1;
        grid.quantity = Quantity::Amplitude;
        grid.values.assign(samples.begin(), samples.end());
        save_grid(grid, path);
        return;
    }
    std::ofstream out(path);
    out.precision(17);
    for (const double a : samples) out << a << "\n";
    if (!out) throw IoError("cannot write " + path.string());
}

}  // namespace rkmix
