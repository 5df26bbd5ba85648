#pragma once

#include <filesystem>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "rkmix/selection.hpp"

namespace rkmix {

/// Record of how the fitted sample vector was produced from its source file.
struct PreprocessRecord {
    std::size_t decimation_factor = 1;
    std::size_t decimation_phase[2] = {0, 0};
    std::size_t origin[2] = {0, 0};
    std::size_t extent[2] = {0, 0};  // 0,0 = whole grid
    bool normalized = true;
    double normalize_scale = 1.0;
    std::size_t dropped = 0;
};

struct FitReport {
    std::string input_path;
    std::string input_kind;  // "grid" | "samples" | "synthetic"
    PreprocessRecord preprocessing;
    EmConfig em_config;
    SelectionReport selection;
    std::string data_hash;  // FNV-1a over the preprocessed sample bytes
    std::string generated_at;
};

/// FNV-1a over the raw little-endian bytes of the sample vector, hex-encoded.
std::string population_hash(std::span<const double> samples);

nlohmann::json mixture_to_json(const RKMixture& theta);
RKMixture mixture_from_json(const nlohmann::json& j);

nlohmann::json report_to_json(const FitReport& report);
FitReport report_from_json(const nlohmann::json& j);

void save_report(const FitReport& report, const std::filesystem::path& path);
FitReport load_report(const std::filesystem::path& path);

}  // namespace rkmix
