#pragma once

#include "config.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace steinflow {

/// SHA-1 of "blob <size>\0<content>", hex encoded (the hash git assigns to a file).
std::string git_blob_hash(const std::string& content);

/// Output directory after the STEINFLOW_OUT override.
std::filesystem::path resolve_output_dir(const ExperimentConfig& cfg);

struct RunSummary {
    std::filesystem::path output_dir;
    std::string content_hash;
    double initial_kl = 0;
    double final_kl = 0;
    Index records = 0;
};

/// Writes metrics.csv, snapshots/particles_<iter>.csv, trajectory.svg and manifest.json.
RunSummary run_experiment(const ExperimentConfig& cfg);

/// Writes spectral_report.json and rate_table.csv; returns the report.
nlohmann::json analyze_spectrum(const ExperimentConfig& cfg);

struct SweepResult {
    std::vector<std::string> values;
    std::vector<std::filesystem::path> dirs;
    // empty on success
    std::vector<std::string> errors;
};

/// One run per value on worker threads. Run i uses seed = cfg.seed + i and writes to
/// <output_dir>/<param>_<i>.
SweepResult run_sweep(const ExperimentConfig& cfg, const std::string& param, const std::vector<std::string>& values,
                      unsigned threads = 0);

/// Particle paths over potential level lines; initial particles are circles, final ones squares.
void write_trajectory_svg(std::ostream& os, const std::vector<MatX<double>>& snapshots,
                          const TargetSpec<double>& target);

} // namespace steinflow
