#pragma once

#include "diagnostics.hpp"
#include "kernels.hpp"
#include "samplers.hpp"
#include "targets.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace steinflow {

/// Flat experiment description. Every field has a JSON key of the same name except where noted
/// in the README schema table.
struct ExperimentConfig {
    std::string sampler = "asvgd";
    std::string kernel = "gaussian";
    double sigma2 = 0.1;
    // bilinear kernel matrix; empty means identity of the target dimension
    MatX<double> A;

    std::string target;
    // read [[3,-2],[-2,3]] of gauss-correlated as a precision
    bool q_is_precision = true;
    // only for target "gaussian"; target_cov is always a covariance
    VecX<double> target_mean;
    MatX<double> target_cov;
    double banana_a = 1.0, banana_c1 = 0.5, banana_c2 = 5.0;

    long N = 500;
    long n_steps = 1000;
    double tau = 0.1;
    double eps = 0.1;
    std::uint64_t seed = 0;

    std::string damping = "restart";
    bool speed_restart = true;
    bool gradient_restart = true;
    double damping_r = 3.0;
    double beta = 0.9;
    bool alg2_literal = false;
    bool restart_literal = false;

    // empty means (1,...,1) and I for the initial Gaussian
    VecX<double> init_mean;
    MatX<double> init_cov;

    long record_every = 10;
    std::string output_dir = "steinflow_out";
    // "auto" picks gaussian-fit for Gaussian targets and kde otherwise
    std::string kl_method = "auto";

    // analyze subcommand
    std::string analyze_mode = "asvgd";
    std::optional<double> alpha;
    long sweep_points = 61;
};

class ConfigError : public ContractError {
public:
    using ContractError::ContractError;
};

/// Parses a flat JSON object. Unknown keys, wrong types and out-of-range values throw
/// ConfigError naming the key (or the line for malformed text).
ExperimentConfig parse_config(const std::string& text);

/// Applies key=value from the command line. The value is read as JSON when it parses as JSON,
/// otherwise as a plain string.
void apply_override(ExperimentConfig& cfg, const std::string& assignment);

/// Sets one key from a JSON value, with the same checks as parse_config.
void set_config_value(ExperimentConfig& cfg, const std::string& key, const nlohmann::json& value);

/// Range and cross-field checks; also requires a target.
void validate_config(const ExperimentConfig& cfg);

/// Resolved config with every default filled in; the manifest echoes this.
nlohmann::json to_json(const ExperimentConfig& cfg);

const std::vector<std::string>& config_keys();

TargetSpec<double> make_target(const ExperimentConfig& cfg);
KernelSpec<double> make_kernel(const ExperimentConfig& cfg, Index dim);
SamplerConfig<double> make_sampler_config(const ExperimentConfig& cfg);
KlMethod resolve_kl_method(const ExperimentConfig& cfg, const TargetSpec<double>& target);
VecX<double> resolved_init_mean(const ExperimentConfig& cfg, Index dim);
MatX<double> resolved_init_cov(const ExperimentConfig& cfg, Index dim);

} // namespace steinflow
