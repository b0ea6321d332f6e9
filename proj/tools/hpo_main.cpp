// hpo: command-line front end for the masked-PTM noise modeling library.
//
// Subcommands: mask, table1, noise-synth, characterize, qem, scaling.
// Exit codes: 0 success, 2 validation/usage error, 3 capacity error,
// 4 conditioning error, 1 anything else (including --verify mismatch).

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hpo/errors.hpp"
#include "hpo/io.hpp"
#include "hpo/mask.hpp"
#include "hpo/noise.hpp"
#include "hpo/optimizer.hpp"
#include "hpo/pauli.hpp"
#include "hpo/ptm.hpp"
#include "hpo/qem.hpp"
#include "hpo/topology.hpp"

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

constexpr int kBruteForceCap = 6;  // 16^n predicate scans beyond this are refused

struct CommonOptions {
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::string out_dir;
    std::string format;  // "", "json", or "csv"
};

void add_common_options(CLI::App* sub, CommonOptions* common) {
    sub->add_option("--seed", common->seed, "Override every seed used by this run")
        ->each([common](const std::string&) { common->seed_given = true; });
    sub->add_option("--out", common->out_dir, "Directory for output files and the run manifest");
    sub->add_option("--format", common->format, "Stdout encoding for tabular commands")
        ->check(CLI::IsMember({"json", "csv"}));
}

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

fs::path ensure_out_dir(const std::string& out_dir) {
    if (out_dir.empty()) {
        throw hpo::ValidationError("this command requires --out <dir>");
    }
    fs::path dir(out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw hpo::ValidationError("cannot create output directory " + dir.string() + ": " +
                                   ec.message());
    }
    return dir;
}

double round4(double x) { return std::round(x * 1e4) / 1e4; }

// Table 1 / Fig. 5 accounting: at n = 2 the active stage is the 256-parameter
// baseline block; from n = 3 on it is the residual mask.
std::uint64_t active_parameters(int n) {
    return n == 2 ? hpo::base_complexity(hpo::TopologyGraph::chain(2)) : hpo::k_res_closed_form(n);
}

std::string percent_label(double rate) {
    if (rate == 0.0) return "0%";
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.1f%%", rate * 100.0);
    return buffer;
}

// ---------------------------------------------------------------- mask ----

struct MaskOptions {
    int n = 2;
    std::string kind_text = "residual";
    bool count_only = false;
    bool verify = false;
    std::string dump_path;
    CommonOptions common;
};

int run_mask(const MaskOptions& opt) {
    Stopwatch watch;
    hpo::check_qubit_count(opt.n);
    const hpo::MaskKind kind = hpo::mask_kind_from_string(opt.kind_text);
    const hpo::MaskSpec spec = kind == hpo::MaskKind::Baseline ? hpo::MaskSpec::baseline(opt.n)
                                                               : hpo::MaskSpec::residual(opt.n);
    const bool brute_feasible = opt.n <= kBruteForceCap;
    const std::uint64_t full = hpo::basis_size(opt.n) * hpo::basis_size(opt.n);

    std::optional<std::uint64_t> closed_form;
    if (kind == hpo::MaskKind::Residual) closed_form = hpo::k_res_closed_form(opt.n);

    if (opt.verify) {
        if (!brute_feasible) {
            throw hpo::CapacityError("--verify needs a brute-force scan, infeasible for n = " +
                                     std::to_string(opt.n));
        }
        const std::uint64_t brute = hpo::brute_force_count(spec);
        const std::uint64_t expected =
            closed_form ? *closed_form
                        : static_cast<std::uint64_t>(hpo::materialize(spec).pairs.size());
        Json doc;
        doc["n"] = opt.n;
        doc["kind"] = hpo::to_string(kind);
        if (closed_form) doc["closed_form"] = *closed_form;
        doc["brute_force"] = brute;
        doc["verified"] = (expected == brute);
        std::cout << doc.dump() << "\n";
        if (expected != brute) {
            std::cerr << "error: mask count mismatch (" << expected << " vs " << brute << ")\n";
            return 1;
        }
        return 0;
    }

    if (opt.count_only) {
        if (!closed_form && !brute_feasible) {
            throw hpo::CapacityError("baseline mask counting is brute-force only; n = " +
                                     std::to_string(opt.n) + " exceeds the n <= " +
                                     std::to_string(kBruteForceCap) + " scan limit");
        }
        if (!closed_form) {
            std::cout << hpo::brute_force_count(spec) << "\n";
        } else {
            Json doc;
            doc["closed_form"] = *closed_form;
            if (brute_feasible) doc["brute_force"] = hpo::brute_force_count(spec);
            std::cout << doc.dump() << "\n";
        }
        return 0;
    }

    if (!brute_feasible && !closed_form) {
        throw hpo::CapacityError("baseline mask counting is brute-force only; n = " +
                                 std::to_string(opt.n) + " exceeds the n <= " +
                                 std::to_string(kBruteForceCap) + " scan limit");
    }
    const std::uint64_t count = brute_feasible ? hpo::brute_force_count(spec) : *closed_form;
    const double compression = round4(1.0 - static_cast<double>(count) / static_cast<double>(full));

    Json doc;
    doc["n"] = opt.n;
    doc["kind"] = hpo::to_string(kind);
    doc["count"] = count;
    if (closed_form) doc["closed_form"] = *closed_form;
    doc["full"] = full;
    doc["compression"] = compression;

    // Materialize before printing so a capacity failure leaves stdout clean.
    if (!opt.dump_path.empty()) {
        const hpo::MaskSet mask = hpo::materialize(spec);
        hpo::io::write_mask_pairs(opt.dump_path, mask);
    }

    if (opt.common.format == "csv") {
        std::cout << "n,kind,count,closed_form,full,compression\n"
                  << opt.n << ',' << hpo::to_string(kind) << ',' << count << ','
                  << (closed_form ? std::to_string(*closed_form) : std::string()) << ',' << full
                  << ',' << hpo::io::format_double(compression) << "\n";
    } else {
        std::cout << doc.dump() << "\n";
    }

    if (!opt.common.out_dir.empty()) {
        const fs::path dir = ensure_out_dir(opt.common.out_dir);
        hpo::io::write_text_file(dir / "mask.json", doc.dump(2) + "\n");
        hpo::io::RunManifest manifest;
        manifest.command = "mask";
        manifest.resolved_config_json = doc.dump();
        manifest.outputs = {"mask.json"};
        if (!opt.dump_path.empty()) manifest.outputs.push_back(opt.dump_path);
        manifest.duration_seconds = watch.seconds();
        hpo::io::write_manifest(dir / "manifest.json", manifest);
    }
    return 0;
}

// -------------------------------------------------------------- table1 ----

int run_table1(const CommonOptions& common) {
    Stopwatch watch;
    struct Row {
        int n;
        std::uint64_t full;
        std::uint64_t active;
        std::string compression;
    };
    std::vector<Row> rows;
    for (int n = 2; n <= 5; ++n) {
        rows.push_back({n, hpo::basis_size(n) * hpo::basis_size(n), active_parameters(n),
                        percent_label(hpo::compression_rate(n))});
    }

    std::string csv = "n,full,active,compression\n";
    Json array = Json::array();
    for (const Row& row : rows) {
        csv += std::to_string(row.n) + ',' + std::to_string(row.full) + ',' +
               std::to_string(row.active) + ',' + row.compression + '\n';
        array.push_back(Json{{"n", row.n},
                             {"full", row.full},
                             {"active", row.active},
                             {"compression", row.compression}});
    }

    if (common.format == "json") {
        std::cout << array.dump(2) << "\n";
    } else {
        std::cout << csv;
    }

    if (!common.out_dir.empty()) {
        const fs::path dir = ensure_out_dir(common.out_dir);
        hpo::io::write_text_file(dir / "table1.csv", csv);
        hpo::io::RunManifest manifest;
        manifest.command = "table1";
        manifest.outputs = {"table1.csv"};
        manifest.duration_seconds = watch.seconds();
        hpo::io::write_manifest(dir / "manifest.json", manifest);
    }
    return 0;
}

// ------------------------------------------------------------- scaling ----

int run_scaling(int max_n, const CommonOptions& common) {
    Stopwatch watch;
    if (max_n < 2 || max_n > hpo::kMaxQubits) {
        throw hpo::ValidationError("--max-n must be in [2, " + std::to_string(hpo::kMaxQubits) +
                                   "]");
    }
    std::string csv = "n,full,active\n";
    Json array = Json::array();
    for (int n = 2; n <= max_n; ++n) {
        const std::uint64_t full = hpo::basis_size(n) * hpo::basis_size(n);
        const std::uint64_t active = active_parameters(n);
        csv += std::to_string(n) + ',' + std::to_string(full) + ',' + std::to_string(active) + '\n';
        array.push_back(Json{{"n", n}, {"full", full}, {"active", active}});
    }

    if (common.format == "json") {
        std::cout << array.dump(2) << "\n";
    } else {
        std::cout << csv;
    }

    if (!common.out_dir.empty()) {
        const fs::path dir = ensure_out_dir(common.out_dir);
        hpo::io::write_text_file(dir / "scaling.csv", csv);
        hpo::io::RunManifest manifest;
        manifest.command = "scaling";
        manifest.resolved_config_json = Json{{"max_n", max_n}}.dump();
        manifest.outputs = {"scaling.csv"};
        manifest.duration_seconds = watch.seconds();
        hpo::io::write_manifest(dir / "manifest.json", manifest);
    }
    return 0;
}

// ----------------------------------------------------------- noise I/O ----

struct NoiseSources {
    std::string topology_path;
    int n = 3;
    std::string noise_path;
    // Placeholders only: a field is read back solely when its flag was passed.
    double p_depol = 0.0;
    double gamma_ad = 0.0;
    double theta_zz = 0.0;
    double residual_magnitude = 0.0;
    double residual_density = 0.0;
};

void add_noise_sources(CLI::App* sub, NoiseSources* src, bool topology_required) {
    auto* topo = sub->add_option("--topology", src->topology_path,
                                 "Topology JSON ({\"n\":...,\"edges\":[[u,v],...]})");
    if (topology_required) {
        topo->required();
    } else {
        sub->add_option("--n", src->n, "Qubit count for a default chain topology")
            ->excludes(topo);
    }
    sub->add_option("--noise", src->noise_path, "NoiseParams JSON file");
    sub->add_option("--p-depol", src->p_depol, "Depolarizing probability per qubit");
    sub->add_option("--gamma-ad", src->gamma_ad, "Amplitude damping rate per qubit");
    sub->add_option("--theta-zz", src->theta_zz, "ZZ crosstalk angle per edge");
    sub->add_option("--residual-magnitude", src->residual_magnitude,
                    "Injected residual magnitude");
    sub->add_option("--residual-density", src->residual_density,
                    "Fraction of residual-mask coordinates that receive an entry");
}

hpo::TopologyGraph resolve_topology(const CLI::App* sub, const NoiseSources& src,
                                    std::vector<std::string>* inputs) {
    if (sub->count("--topology") > 0) {
        if (inputs) inputs->push_back(src.topology_path);
        return hpo::io::read_topology(src.topology_path);
    }
    return hpo::TopologyGraph::chain(src.n);
}

hpo::NoiseParams resolve_noise_params(const CLI::App* sub, const NoiseSources& src,
                                      const CommonOptions& common,
                                      std::vector<std::string>* inputs) {
    hpo::NoiseParams params;
    if (sub->count("--noise") > 0) {
        params = hpo::io::read_noise_params(src.noise_path);
        if (inputs) inputs->push_back(src.noise_path);
    }
    if (sub->count("--p-depol") > 0) params.p_depol = src.p_depol;
    if (sub->count("--gamma-ad") > 0) params.gamma_ad = src.gamma_ad;
    if (sub->count("--theta-zz") > 0) params.theta_zz = src.theta_zz;
    if (sub->count("--residual-magnitude") > 0) params.residual_magnitude = src.residual_magnitude;
    if (sub->count("--residual-density") > 0) params.residual_density = src.residual_density;
    if (common.seed_given) params.seed = common.seed;
    return params;
}

// ---------------------------------------------------------- noise-synth ----

int run_noise_synth(const CLI::App* sub, const NoiseSources& src, const CommonOptions& common) {
    Stopwatch watch;
    std::vector<std::string> inputs;
    const hpo::TopologyGraph graph = resolve_topology(sub, src, &inputs);
    const hpo::NoiseParams params = resolve_noise_params(sub, src, common, &inputs);
    const fs::path dir = ensure_out_dir(common.out_dir);

    const hpo::GroundTruth truth = hpo::synthesize(graph, params);
    hpo::io::write_model(dir / "ground_truth.json", truth.channel);
    hpo::io::write_noise_params(dir / "noise_params.json", params);
    hpo::io::write_topology(dir / "topology.json", graph);

    hpo::io::RunManifest manifest;
    manifest.command = "noise-synth";
    manifest.resolved_config_json = hpo::io::noise_params_to_json(params);
    manifest.inputs = inputs;
    manifest.outputs = {"ground_truth.json", "noise_params.json", "topology.json"};
    manifest.seed = params.seed;
    manifest.duration_seconds = watch.seconds();
    hpo::io::write_manifest(dir / "manifest.json", manifest);

    Json summary;
    summary["n"] = graph.n;
    summary["edges"] = graph.edges.size();
    summary["entries"] = truth.channel.delta().size();
    summary["injected"] = truth.injected.size();
    summary["out"] = dir.string();
    std::cout << summary.dump() << "\n";
    return 0;
}

// ---------------------------------------------------------- characterize ----

struct CharacterizeOptions {
    NoiseSources src;
    std::string config_path;
    CommonOptions common;
};

int run_characterize(const CLI::App* sub, const CharacterizeOptions& opt) {
    Stopwatch watch;
    std::vector<std::string> inputs;
    const hpo::TopologyGraph graph = resolve_topology(sub, opt.src, &inputs);
    const hpo::NoiseParams params = resolve_noise_params(sub, opt.src, opt.common, &inputs);

    hpo::HPOConfig config;
    if (sub->count("--config") > 0) {
        config = hpo::io::read_hpo_config(opt.config_path);
        inputs.push_back(opt.config_path);
    }
    if (opt.common.seed_given) config.seed = opt.common.seed;
    config.validate();

    const fs::path dir = ensure_out_dir(opt.common.out_dir);
    const hpo::GroundTruth truth = hpo::synthesize(graph, params);
    const hpo::HPOResult result = hpo::run_hpo(truth, config);

    hpo::io::write_model(dir / "baseline_model.json", result.baseline_2q);
    hpo::io::write_model(dir / "frozen_model.json", result.frozen);
    hpo::io::write_model(dir / "effective_model.json", result.effective);
    hpo::io::write_trace_csv(dir / "trace_baseline.csv", result.traces.at(0));
    std::vector<std::string> outputs = {"baseline_model.json", "frozen_model.json",
                                        "effective_model.json", "trace_baseline.csv"};
    if (result.traces.size() > 1) {
        hpo::io::write_model(dir / "residual_model.json",
                             hpo::SparsePTM(graph.n, result.residual));
        hpo::io::write_trace_csv(dir / "trace_residual.csv", result.traces.at(1));
        outputs.push_back("residual_model.json");
        outputs.push_back("trace_residual.csv");
    }

    hpo::io::RunManifest manifest;
    manifest.command = "characterize";
    Json resolved;
    resolved["config"] = Json::parse(hpo::io::hpo_config_to_json(config));
    resolved["noise_params"] = Json::parse(hpo::io::noise_params_to_json(params));
    resolved["topology"] = Json::parse(hpo::io::topology_to_json(graph));
    manifest.resolved_config_json = resolved.dump();
    manifest.inputs = inputs;
    manifest.outputs = outputs;
    manifest.seed = config.seed;
    manifest.duration_seconds = watch.seconds();
    hpo::io::write_manifest(dir / "manifest.json", manifest);

    Json summary;
    summary["n"] = graph.n;
    summary["active_parameters"] = result.active_parameters;
    summary["baseline_final_mse"] = result.traces.at(0).rows.back().mse;
    if (result.traces.size() > 1) {
        summary["residual_final_mse"] = result.traces.at(1).rows.back().mse;
    }
    summary["baseline_validation_mse"] = result.baseline_validation_mse;
    summary["residual_validation_mse"] = result.residual_validation_mse;
    summary["out"] = dir.string();
    std::cout << summary.dump() << "\n";
    return 0;
}

// ----------------------------------------------------------------- qem ----

struct QemOptions {
    int n = 3;
    double phase = 0.25;
    NoiseSources src;
    std::string model_path;
    std::string config_path;
    CommonOptions common;
};

int run_qem(const CLI::App* sub, const QemOptions& opt) {
    Stopwatch watch;
    std::vector<std::string> inputs;
    const hpo::NoiseParams params = resolve_noise_params(sub, opt.src, opt.common, &inputs);

    hpo::FidelityReport report;
    Json resolved;
    resolved["n"] = opt.n;
    resolved["phase"] = opt.phase;
    resolved["noise_params"] = Json::parse(hpo::io::noise_params_to_json(params));
    std::uint64_t manifest_seed = params.seed;

    if (sub->count("--model") > 0) {
        const hpo::SparsePTM learned = hpo::io::read_model(opt.model_path);
        if (learned.n() != opt.n) {
            throw hpo::ValidationError("model file is for n = " + std::to_string(learned.n()) +
                                       ", command asked for n = " + std::to_string(opt.n));
        }
        inputs.push_back(opt.model_path);
        resolved["model"] = opt.model_path;
        report = hpo::fidelity_report_with_model(opt.n, opt.phase, params, learned);
    } else {
        hpo::HPOConfig config;
        if (sub->count("--config") > 0) {
            config = hpo::io::read_hpo_config(opt.config_path);
            inputs.push_back(opt.config_path);
        }
        if (opt.common.seed_given) config.seed = opt.common.seed;
        config.validate();
        resolved["hpo_config"] = Json::parse(hpo::io::hpo_config_to_json(config));
        manifest_seed = config.seed;
        report = hpo::fidelity_report(opt.n, opt.phase, params, config);
    }

    std::cout << hpo::io::report_to_json(report);

    if (!opt.common.out_dir.empty()) {
        const fs::path dir = ensure_out_dir(opt.common.out_dir);
        hpo::io::write_report(dir / "report.json", report);
        hpo::io::RunManifest manifest;
        manifest.command = "qem";
        manifest.resolved_config_json = resolved.dump();
        manifest.inputs = inputs;
        manifest.outputs = {"report.json"};
        manifest.seed = manifest_seed;
        manifest.duration_seconds = watch.seconds();
        hpo::io::write_manifest(dir / "manifest.json", manifest);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hierarchical progressive optimization for sparse Pauli noise models"};
    app.require_subcommand(1);

    int exit_code = 0;

    MaskOptions mask_opt;
    auto* mask_cmd = app.add_subcommand("mask", "Count, verify, or dump a combinatorial mask");
    mask_cmd->add_option("n", mask_opt.n, "Qubit count")->required();
    mask_cmd->add_option("kind", mask_opt.kind_text, "baseline or residual")->required();
    mask_cmd->add_flag("--count-only", mask_opt.count_only,
                       "Print closed-form and (when feasible) brute-force counts");
    mask_cmd->add_flag("--verify", mask_opt.verify,
                       "Exit nonzero unless the brute-force count matches");
    mask_cmd->add_option("--dump", mask_opt.dump_path, "Write the full pair list to this path");
    add_common_options(mask_cmd, &mask_opt.common);
    mask_cmd->callback([&] { exit_code = run_mask(mask_opt); });

    CommonOptions table1_common;
    auto* table1_cmd =
        app.add_subcommand("table1", "Active-parameter table for n = 2..5 (CSV on stdout)");
    add_common_options(table1_cmd, &table1_common);
    table1_cmd->callback([&] { exit_code = run_table1(table1_common); });

    NoiseSources synth_src;
    CommonOptions synth_common;
    auto* synth_cmd = app.add_subcommand(
        "noise-synth", "Synthesize a ground-truth channel and write it with its sidecar");
    add_noise_sources(synth_cmd, &synth_src, /*topology_required=*/false);
    add_common_options(synth_cmd, &synth_common);
    synth_cmd->callback([&] { exit_code = run_noise_synth(synth_cmd, synth_src, synth_common); });

    CharacterizeOptions char_opt;
    auto* char_cmd = app.add_subcommand(
        "characterize", "Run the two-stage fit and write models, traces, and a manifest");
    add_noise_sources(char_cmd, &char_opt.src, /*topology_required=*/false);
    char_cmd->add_option("--config", char_opt.config_path, "Optimizer config JSON file");
    add_common_options(char_cmd, &char_opt.common);
    char_cmd->callback([&] { exit_code = run_characterize(char_cmd, char_opt); });

    QemOptions qem_opt;
    auto* qem_cmd = app.add_subcommand(
        "qem", "Mini-QPE error-mitigation benchmark: raw vs depolarizing vs learned inverse");
    qem_cmd->add_option("--n", qem_opt.n, "Qubit count (3..5)")->required();
    qem_cmd->add_option("--phase", qem_opt.phase, "Phase to estimate (default 0.25)");
    qem_cmd->add_option("--noise", qem_opt.src.noise_path, "NoiseParams JSON file");
    qem_cmd->add_option("--p-depol", qem_opt.src.p_depol, "Depolarizing probability per qubit");
    qem_cmd->add_option("--gamma-ad", qem_opt.src.gamma_ad, "Amplitude damping rate per qubit");
    qem_cmd->add_option("--theta-zz", qem_opt.src.theta_zz, "ZZ crosstalk angle per edge");
    qem_cmd->add_option("--residual-magnitude", qem_opt.src.residual_magnitude,
                        "Injected residual magnitude");
    qem_cmd->add_option("--residual-density", qem_opt.src.residual_density,
                        "Fraction of residual-mask coordinates that receive an entry");
    auto* model_opt =
        qem_cmd->add_option("--model", qem_opt.model_path, "Learned model JSON to mitigate with");
    qem_cmd->add_option("--config", qem_opt.config_path, "Optimizer config for an inline fit")
        ->excludes(model_opt);
    add_common_options(qem_cmd, &qem_opt.common);
    qem_cmd->callback([&] { exit_code = run_qem(qem_cmd, qem_opt); });

    int scaling_max_n = 5;
    CommonOptions scaling_common;
    auto* scaling_cmd =
        app.add_subcommand("scaling", "Full vs active parameter growth per qubit count (CSV)");
    scaling_cmd->add_option("--max-n", scaling_max_n, "Last row to emit (2..12)");
    add_common_options(scaling_cmd, &scaling_common);
    scaling_cmd->callback([&] { exit_code = run_scaling(scaling_max_n, scaling_common); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const hpo::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return exit_code;
}
