#include "hpo/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "hpo/errors.hpp"

namespace hpo::io {

namespace {

using Json = nlohmann::ordered_json;

Json parse_json(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("failed to parse " + path.string() + ": " + e.what());
    }
}

void check_known_keys(const Json& object, const std::set<std::string>& known,
                      const std::string& context) {
    for (const auto& [key, value] : object.items()) {
        if (!known.contains(key)) {
            throw ValidationError(context + ": unknown field '" + key + "'");
        }
    }
}

template <typename T>
T require_field(const Json& object, const std::string& key, const std::string& context) {
    if (!object.contains(key)) {
        throw ValidationError(context + ": missing field '" + key + "'");
    }
    try {
        return object.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ValidationError(context + ": field '" + key + "' has the wrong type");
    }
}

template <typename T>
T optional_field(const Json& object, const std::string& key, T fallback,
                 const std::string& context) {
    if (!object.contains(key)) return fallback;
    try {
        return object.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ValidationError(context + ": field '" + key + "' has the wrong type");
    }
}

}  // namespace

std::string format_double(double value) {
    char buffer[64];
    for (int precision = 15; precision <= 17; ++precision) {
        std::snprintf(buffer, sizeof(buffer), "%.*g", precision, value);
        if (std::strtod(buffer, nullptr) == value) break;
    }
    return buffer;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open file: " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write file: " + path.string());
    out << content;
    if (!out) throw ValidationError("write failed: " + path.string());
}

std::string model_to_json(const SparsePTM& model) {
    Json doc;
    doc["format"] = kModelFormat;
    doc["n"] = model.n();
    Json entries = Json::array();
    for (const DeltaEntry& e : model.delta()) {
        entries.push_back(Json::array({e.i, e.j, e.value}));
    }
    doc["entries"] = std::move(entries);
    return doc.dump(2) + "\n";
}

void write_model(const std::filesystem::path& path, const SparsePTM& model) {
    write_text_file(path, model_to_json(model));
}

SparsePTM read_model(const std::filesystem::path& path) {
    const Json doc = parse_json(path);
    const std::string context = "model file " + path.string();
    check_known_keys(doc, {"format", "n", "entries"}, context);
    const auto format = require_field<std::string>(doc, "format", context);
    if (format != kModelFormat) {
        throw ValidationError(context + ": unsupported format '" + format + "', expected '" +
                              kModelFormat + "'");
    }
    const int n = require_field<int>(doc, "n", context);
    if (!doc.contains("entries") || !doc.at("entries").is_array()) {
        throw ValidationError(context + ": missing or non-array field 'entries'");
    }
    std::vector<DeltaEntry> delta;
    delta.reserve(doc.at("entries").size());
    for (const auto& item : doc.at("entries")) {
        if (!item.is_array() || item.size() != 3 || !item[0].is_number_unsigned() ||
            !item[1].is_number_unsigned() || !item[2].is_number()) {
            throw ValidationError(context + ": each entry must be [row, col, value]");
        }
        delta.push_back({item[0].get<std::uint32_t>(), item[1].get<std::uint32_t>(),
                         item[2].get<double>()});
    }
    try {
        return SparsePTM(n, std::move(delta));
    } catch (const ValidationError& e) {
        throw ValidationError(context + ": " + e.what());
    }
}

std::string topology_to_json(const TopologyGraph& graph) {
    Json doc;
    doc["n"] = graph.n;
    Json edges = Json::array();
    for (const auto& [u, v] : graph.edges) edges.push_back(Json::array({u, v}));
    doc["edges"] = std::move(edges);
    return doc.dump(2) + "\n";
}

void write_topology(const std::filesystem::path& path, const TopologyGraph& graph) {
    write_text_file(path, topology_to_json(graph));
}

TopologyGraph read_topology(const std::filesystem::path& path) {
    const Json doc = parse_json(path);
    const std::string context = "topology file " + path.string();
    check_known_keys(doc, {"n", "edges"}, context);
    const int n = require_field<int>(doc, "n", context);
    if (!doc.contains("edges") || !doc.at("edges").is_array()) {
        throw ValidationError(context + ": missing or non-array field 'edges'");
    }
    std::vector<std::pair<int, int>> edges;
    for (const auto& item : doc.at("edges")) {
        if (!item.is_array() || item.size() != 2 || !item[0].is_number_integer() ||
            !item[1].is_number_integer()) {
            throw ValidationError(context + ": each edge must be [u, v]");
        }
        edges.emplace_back(item[0].get<int>(), item[1].get<int>());
    }
    try {
        return TopologyGraph(n, std::move(edges));
    } catch (const ValidationError& e) {
        throw ValidationError(context + ": " + e.what());
    }
}

std::string noise_params_to_json(const NoiseParams& params) {
    Json doc;
    doc["p_depol"] = params.p_depol;
    doc["gamma_ad"] = params.gamma_ad;
    doc["theta_zz"] = params.theta_zz;
    doc["residual_magnitude"] = params.residual_magnitude;
    doc["residual_density"] = params.residual_density;
    doc["seed"] = params.seed;
    doc["rng"] = kRngName;
    return doc.dump(2) + "\n";
}

void write_noise_params(const std::filesystem::path& path, const NoiseParams& params) {
    write_text_file(path, noise_params_to_json(params));
}

NoiseParams read_noise_params(const std::filesystem::path& path) {
    const Json doc = parse_json(path);
    const std::string context = "noise params file " + path.string();
    check_known_keys(doc,
                     {"p_depol", "gamma_ad", "theta_zz", "residual_magnitude", "residual_density",
                      "seed", "rng"},
                     context);
    NoiseParams params;
    params.p_depol = optional_field<double>(doc, "p_depol", params.p_depol, context);
    params.gamma_ad = optional_field<double>(doc, "gamma_ad", params.gamma_ad, context);
    params.theta_zz = optional_field<double>(doc, "theta_zz", params.theta_zz, context);
    params.residual_magnitude =
        optional_field<double>(doc, "residual_magnitude", params.residual_magnitude, context);
    params.residual_density =
        optional_field<double>(doc, "residual_density", params.residual_density, context);
    params.seed = optional_field<std::uint64_t>(doc, "seed", params.seed, context);
    const auto rng = optional_field<std::string>(doc, "rng", kRngName, context);
    if (rng != kRngName) {
        throw ValidationError(context + ": unsupported rng '" + rng + "', expected '" + kRngName +
                              "'");
    }
    return params;
}

std::string hpo_config_to_json(const HPOConfig& config) {
    Json doc;
    doc["learning_rate"] = config.learning_rate;
    doc["eta_min"] = config.eta_min;
    doc["epochs"] = config.epochs;
    doc["adam_beta1"] = config.adam_beta1;
    doc["adam_beta2"] = config.adam_beta2;
    doc["adam_epsilon"] = config.adam_epsilon;
    doc["seed"] = config.seed;
    doc["convergence_threshold"] = config.convergence_threshold;
    doc["observation_sigma"] = config.observation_sigma;
    return doc.dump(2) + "\n";
}

void write_hpo_config(const std::filesystem::path& path, const HPOConfig& config) {
    write_text_file(path, hpo_config_to_json(config));
}

HPOConfig read_hpo_config(const std::filesystem::path& path) {
    const Json doc = parse_json(path);
    const std::string context = "config file " + path.string();
    check_known_keys(doc,
                     {"learning_rate", "eta_min", "epochs", "adam_beta1", "adam_beta2",
                      "adam_epsilon", "seed", "convergence_threshold", "observation_sigma"},
                     context);
    HPOConfig config;
    config.learning_rate = optional_field<double>(doc, "learning_rate", config.learning_rate, context);
    config.eta_min = optional_field<double>(doc, "eta_min", config.eta_min, context);
    config.epochs = optional_field<int>(doc, "epochs", config.epochs, context);
    config.adam_beta1 = optional_field<double>(doc, "adam_beta1", config.adam_beta1, context);
    config.adam_beta2 = optional_field<double>(doc, "adam_beta2", config.adam_beta2, context);
    config.adam_epsilon = optional_field<double>(doc, "adam_epsilon", config.adam_epsilon, context);
    config.seed = optional_field<std::uint64_t>(doc, "seed", config.seed, context);
    config.convergence_threshold =
        optional_field<double>(doc, "convergence_threshold", config.convergence_threshold, context);
    config.observation_sigma =
        optional_field<double>(doc, "observation_sigma", config.observation_sigma, context);
    try {
        config.validate();
    } catch (const ValidationError& e) {
        throw ValidationError(context + ": " + e.what());
    }
    return config;
}

std::string trace_to_csv(const ExperimentTrace& trace) {
    std::string out = "epoch,stage,mse,lr\n";
    for (const TraceRow& row : trace.rows) {
        out += std::to_string(row.epoch);
        out += ',';
        out += trace.stage;
        out += ',';
        out += format_double(row.mse);
        out += ',';
        out += format_double(row.lr);
        out += '\n';
    }
    return out;
}

void write_trace_csv(const std::filesystem::path& path, const ExperimentTrace& trace) {
    write_text_file(path, trace_to_csv(trace));
}

std::string mask_pairs_to_json(const MaskSet& mask) {
    Json doc;
    doc["n"] = mask.n;
    doc["kind"] = to_string(mask.kind);
    Json pairs = Json::array();
    for (const auto& [i, j] : mask.pairs) pairs.push_back(Json::array({i, j}));
    doc["pairs"] = std::move(pairs);
    return doc.dump(2) + "\n";
}

void write_mask_pairs(const std::filesystem::path& path, const MaskSet& mask) {
    write_text_file(path, mask_pairs_to_json(mask));
}

std::string report_to_json(const FidelityReport& report) {
    Json doc;
    doc["n"] = report.n;
    doc["phase"] = report.phase;
    doc["fidelity"] = Json{{"ideal", report.ideal},
                           {"raw", report.raw},
                           {"depol", report.depol},
                           {"hpo", report.hpo}};
    doc["delta_hpo_vs_depol"] = report.delta_hpo_vs_depol;
    doc["clamped_eigenvalues"] = report.clamped_eigenvalues;
    doc["diagnostics"] = Json{{"p_est", report.p_est},
                              {"condition_number", report.condition_number},
                              {"injections", report.injections},
                              {"min_eigenvalue", report.min_eigenvalue}};
    return doc.dump(2) + "\n";
}

void write_report(const std::filesystem::path& path, const FidelityReport& report) {
    write_text_file(path, report_to_json(report));
}

std::string manifest_to_json(const RunManifest& manifest) {
    Json doc;
    doc["command"] = manifest.command;
    doc["tool_version"] = manifest.tool_version;
    doc["seed"] = manifest.seed;
    try {
        doc["config"] = Json::parse(manifest.resolved_config_json.empty()
                                        ? std::string("{}")
                                        : manifest.resolved_config_json);
    } catch (const nlohmann::json::exception&) {
        doc["config"] = manifest.resolved_config_json;
    }
    doc["inputs"] = manifest.inputs;
    doc["outputs"] = manifest.outputs;
    doc["duration_seconds"] = manifest.duration_seconds;
    return doc.dump(2) + "\n";
}

void write_manifest(const std::filesystem::path& path, const RunManifest& manifest) {
    write_text_file(path, manifest_to_json(manifest));
}

}  // namespace hpo::io
