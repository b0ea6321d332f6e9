#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hpo/mask.hpp"
#include "hpo/noise.hpp"
#include "hpo/optimizer.hpp"
#include "hpo/ptm.hpp"
#include "hpo/qem.hpp"
#include "hpo/topology.hpp"

namespace hpo::io {

inline constexpr char kModelFormat[] = "ptm-delta-coo-v1";
inline constexpr char kToolVersion[] = "1.0.0";

// Shortest representation that parses back to the identical double.
std::string format_double(double value);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

// Model files: {"format":"ptm-delta-coo-v1","n":2,"entries":[[i,j,value],...]}
// with entries sorted by (i, j); duplicate coordinates and nonzero row-0
// entries are rejected on read.
std::string model_to_json(const SparsePTM& model);
void write_model(const std::filesystem::path& path, const SparsePTM& model);
SparsePTM read_model(const std::filesystem::path& path);

// Topology files: {"n":5,"edges":[[0,1],[1,2],...]}.
std::string topology_to_json(const TopologyGraph& graph);
void write_topology(const std::filesystem::path& path, const TopologyGraph& graph);
TopologyGraph read_topology(const std::filesystem::path& path);

// NoiseParams sidecar; written files also carry the generator name so ground
// truths stay reproducible across implementations.
std::string noise_params_to_json(const NoiseParams& params);
void write_noise_params(const std::filesystem::path& path, const NoiseParams& params);
NoiseParams read_noise_params(const std::filesystem::path& path);

std::string hpo_config_to_json(const HPOConfig& config);
void write_hpo_config(const std::filesystem::path& path, const HPOConfig& config);
HPOConfig read_hpo_config(const std::filesystem::path& path);

// Trace CSV, header exactly: epoch,stage,mse,lr
std::string trace_to_csv(const ExperimentTrace& trace);
void write_trace_csv(const std::filesystem::path& path, const ExperimentTrace& trace);

std::string mask_pairs_to_json(const MaskSet& mask);
void write_mask_pairs(const std::filesystem::path& path, const MaskSet& mask);

std::string report_to_json(const FidelityReport& report);
void write_report(const std::filesystem::path& path, const FidelityReport& report);

struct RunManifest {
    std::string command;
    std::string resolved_config_json;  // JSON text of the fully resolved config
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    std::uint64_t seed = 0;
    std::string tool_version = kToolVersion;
    double duration_seconds = 0.0;
};

std::string manifest_to_json(const RunManifest& manifest);
void write_manifest(const std::filesystem::path& path, const RunManifest& manifest);

}  // namespace hpo::io
