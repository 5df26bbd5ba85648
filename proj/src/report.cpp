#include "rkmix/report.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "rkmix/errors.hpp"

namespace rkmix {

using nlohmann::json;

std::string population_hash(std::span<const double> samples) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const double v : samples) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        for (int i = 0; i < 8; ++i) {
            h ^= (bits >> (8 * i)) & 0xffu;
            h *= 0x100000001b3ULL;
        }
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

json mixture_to_json(const RKMixture& theta) {
    json comps = json::array();
    for (const auto& c : theta.components)
        comps.push_back({{"w", c.weight}, {"sigma", c.params.sigma}, {"alpha", c.params.alpha}});
    return {{"w0", theta.w0}, {"lambda0", theta.rayleigh.lambda0}, {"components", comps}};
}

RKMixture mixture_from_json(const json& j) {
    RKMixture theta;
    theta.w0 = j.at("w0").get<double>();
    theta.rayleigh.lambda0 = j.at("lambda0").get<double>();
    for (const auto& c : j.value("components", json::array()))
        theta.components.push_back(
            {c.at("w").get<double>(), {c.at("sigma").get<double>(), c.at("alpha").get<double>()}});
    theta.validate();
    return theta;
}

namespace {

json row_to_json(const ModelRow& row) {
    json j = {{"M", row.m}, {"name", row.name}, {"k", row.k}, {"failed", row.failed}};
    if (row.failed) {
        j["error"] = row.error;
        return j;
    }
    j["loglik"] = row.loglik;
    j["aic"] = row.aic;
    j["bic"] = row.bic;
    j["iterations"] = row.fit.iterations;
    j["converged"] = row.fit.converged;
    j["theta"] = mixture_to_json(row.fit.theta);
    if (!row.fit.degenerate_components.empty())
        j["degenerate_components"] = row.fit.degenerate_components;
    return j;
}

ModelRow row_from_json(const json& j) {
    ModelRow row;
    row.m = j.at("M").get<int>();
    row.name = j.at("name").get<std::string>();
    row.k = j.at("k").get<int>();
    row.failed = j.at("failed").get<bool>();
    if (row.failed) {
        row.error = j.value("error", "");
        return row;
    }
    row.loglik = j.at("loglik").get<double>();
    row.aic = j.at("aic").get<double>();
    row.bic = j.at("bic").get<double>();
    row.fit.loglik = row.loglik;
    row.fit.iterations = j.at("iterations").get<int>();
    row.fit.converged = j.at("converged").get<bool>();
    row.fit.theta = mixture_from_json(j.at("theta"));
    if (j.contains("degenerate_components"))
        row.fit.degenerate_components = j.at("degenerate_components").get<std::vector<int>>();
    return row;
}

}  // namespace

json report_to_json(const FitReport& report) {
    const auto& pre = report.preprocessing;
    json models = json::array();
    for (const auto& row : report.selection.rows) models.push_back(row_to_json(row));

    json selections;
    if (report.selection.selected_by_aic) selections["aic"] = *report.selection.selected_by_aic;
    if (report.selection.selected_by_bic) selections["bic"] = *report.selection.selected_by_bic;
    if (report.selection.selected_by_ll) selections["ll"] = *report.selection.selected_by_ll;

    return {
        {"input", {{"path", report.input_path}, {"kind", report.input_kind}}},
        {"preprocessing",
         {{"decimation_factor", pre.decimation_factor},
          {"decimation_phase", {pre.decimation_phase[0], pre.decimation_phase[1]}},
          {"origin", {pre.origin[0], pre.origin[1]}},
          {"extent", {pre.extent[0], pre.extent[1]}},
          {"normalized", pre.normalized},
          {"normalize_scale", pre.normalize_scale},
          {"dropped", pre.dropped}}},
        {"em_config",
         {{"tol", report.em_config.tol},
          {"max_iter", report.em_config.max_iter},
          {"weight_floor", report.em_config.weight_floor},
          {"alpha_min", report.em_config.alpha_min},
          {"alpha_max", report.em_config.alpha_max}}},
        {"k_convention", to_string(report.selection.convention)},
        {"n_samples", report.selection.n_samples},
        {"data_hash", report.data_hash},
        {"generated_at", report.generated_at},
        {"models", models},
        {"selections", selections},
    };
}

FitReport report_from_json(const json& j) {
    FitReport report;
    report.input_path = j.at("input").at("path").get<std::string>();
    report.input_kind = j.at("input").at("kind").get<std::string>();

    const json& pre = j.at("preprocessing");
    report.preprocessing.decimation_factor = pre.at("decimation_factor").get<std::size_t>();
    report.preprocessing.decimation_phase[0] = pre.at("decimation_phase").at(0).get<std::size_t>();
    report.preprocessing.decimation_phase[1] = pre.at("decimation_phase").at(1).get<std::size_t>();
    report.preprocessing.origin[0] = pre.at("origin").at(0).get<std::size_t>();
    report.preprocessing.origin[1] = pre.at("origin").at(1).get<std::size_t>();
    report.preprocessing.extent[0] = pre.at("extent").at(0).get<std::size_t>();
    report.preprocessing.extent[1] = pre.at("extent").at(1).get<std::size_t>();
    report.preprocessing.normalized = pre.at("normalized").get<bool>();
    report.preprocessing.normalize_scale = pre.at("normalize_scale").get<double>();
    report.preprocessing.dropped = pre.at("dropped").get<std::size_t>();

    const json& cfg = j.at("em_config");
    report.em_config.tol = cfg.at("tol").get<double>();
    report.em_config.max_iter = cfg.at("max_iter").get<int>();
    report.em_config.weight_floor = cfg.at("weight_floor").get<double>();
    report.em_config.alpha_min = cfg.at("alpha_min").get<double>();
    report.em_config.alpha_max = cfg.at("alpha_max").get<double>();

    report.selection.convention = k_convention_from_string(j.at("k_convention").get<std::string>());
    report.selection.n_samples = j.at("n_samples").get<std::size_t>();
    report.data_hash = j.at("data_hash").get<std::string>();
    report.generated_at = j.value("generated_at", "");
    for (const auto& row : j.at("models")) report.selection.rows.push_back(row_from_json(row));
    select_models(report.selection);
    return report;
}

void save_report(const FitReport& report, const std::filesystem::path& path) {
    std::ofstream out(path);
    out << report_to_json(report).dump(2) << "\n";
    if (!out) throw IoError("cannot write report " + path.string());
}

FitReport load_report(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open report " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw IoError("malformed report " + path.string() + ": " + e.what());
    }
    try {
        return report_from_json(j);
    } catch (const json::exception& e) {
        throw IoError("incomplete report " + path.string() + ": " + e.what());
    }
}

}  // namespace rkmix
