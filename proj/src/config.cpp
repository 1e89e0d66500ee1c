#include "steinflow/config.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace steinflow {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& key, const std::string& what)
{
    throw ConfigError("config key '" + key + "': " + what);
}

double get_number(const std::string& key, const json& v)
{
    if (!v.is_number())
        fail(key, "expected a number, got " + std::string(v.type_name()));
    const double x = v.get<double>();
    if (!std::isfinite(x))
        fail(key, "must be finite");
    return x;
}

long get_count(const std::string& key, const json& v)
{
    if (!v.is_number_integer())
        fail(key, "expected an integer, got " + std::string(v.is_number() ? "a fractional number" : v.type_name()));
    if (v.is_number_unsigned() && v.get<std::uint64_t>() > std::uint64_t(std::numeric_limits<long>::max()))
        fail(key, "value too large");
    return v.get<long>();
}

bool get_bool(const std::string& key, const json& v)
{
    if (!v.is_boolean())
        fail(key, "expected true or false, got " + std::string(v.type_name()));
    return v.get<bool>();
}

std::string get_string(const std::string& key, const json& v)
{
    if (!v.is_string())
        fail(key, "expected a string, got " + std::string(v.type_name()));
    return v.get<std::string>();
}

VecX<double> get_vector(const std::string& key, const json& v)
{
    if (!v.is_array() || v.empty())
        fail(key, "expected a non-empty array of numbers");
    VecX<double> out(static_cast<Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i)
        out(static_cast<Index>(i)) = get_number(key, v[i]);
    return out;
}

// [[a, b], [c, d]]; a bare number becomes a 1x1 matrix (read as a multiple of I later)
MatX<double> get_matrix(const std::string& key, const json& v, bool allow_scalar)
{
    if (allow_scalar && v.is_number()) {
        MatX<double> m(1, 1);
        m(0, 0) = get_number(key, v);
        return m;
    }
    if (!v.is_array() || v.empty() || !v[0].is_array())
        fail(key, allow_scalar ? "expected a number or an array of rows" : "expected an array of rows");
    const std::size_t rows = v.size(), cols = v[0].size();
    if (rows != cols)
        fail(key, "matrix must be square");
    MatX<double> m(static_cast<Index>(rows), static_cast<Index>(cols));
    for (std::size_t i = 0; i < rows; ++i) {
        if (!v[i].is_array() || v[i].size() != cols)
            fail(key, "rows must all have the same length");
        for (std::size_t j = 0; j < cols; ++j)
            m(static_cast<Index>(i), static_cast<Index>(j)) = get_number(key, v[i][j]);
    }
    if (!is_symmetric(m))
        fail(key, "matrix must be symmetric");
    return m;
}

std::string one_of(const std::string& key, const json& v, std::initializer_list<const char*> names)
{
    const std::string s = get_string(key, v);
    std::string valid;
    for (const char* n : names) {
        if (s == n)
            return s;
        valid += (valid.empty() ? "" : ", ") + std::string(n);
    }
    fail(key, "unknown value '" + s + "'; valid values: " + valid);
}

json matrix_json(const MatX<double>& m)
{
    json rows = json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        json r = json::array();
        for (Index j = 0; j < m.cols(); ++j)
            r.push_back(m(i, j));
        rows.push_back(r);
    }
    return rows;
}

json vector_json(const VecX<double>& v)
{
    json a = json::array();
    for (Index i = 0; i < v.size(); ++i)
        a.push_back(v(i));
    return a;
}

std::size_t line_of(const std::string& text, std::size_t byte)
{
    byte = std::min(byte, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(byte), '\n'));
}

} // namespace

const std::vector<std::string>& config_keys()
{
    static const std::vector<std::string> keys{
        "sampler",     "kernel",        "sigma2",          "A",          "target",          "q_is_precision",
        "target_mean", "target_cov",    "banana_a",        "banana_c1",  "banana_c2",       "N",
        "n_steps",     "tau",           "eps",             "seed",       "damping",         "speed_restart",
        "gradient_restart", "damping_r", "beta",           "alg2_literal", "restart_literal", "init_mean",
        "init_cov",    "record_every",  "output_dir",      "kl_method",  "analyze_mode",    "alpha",
        "sweep_points"};
    return keys;
}

void set_config_value(ExperimentConfig& cfg, const std::string& key, const json& v)
{
    if (key == "sampler") {
        cfg.sampler = one_of(key, v, {"asvgd", "svgd", "ula", "mala", "uld"});
    } else if (key == "kernel") {
        cfg.kernel = one_of(key, v, {"gaussian", "bilinear"});
    } else if (key == "sigma2") {
        cfg.sigma2 = get_number(key, v);
        if (cfg.sigma2 <= 0)
            fail(key, "must be positive");
    } else if (key == "A") {
        cfg.A = get_matrix(key, v, true);
    } else if (key == "target") {
        cfg.target = get_string(key, v);
        if (cfg.target != "gaussian" &&
            std::find(builtin_target_names().begin(), builtin_target_names().end(), cfg.target) ==
                builtin_target_names().end()) {
            std::string valid = "gaussian";
            for (const auto& n : builtin_target_names())
                valid += ", " + n;
            fail(key, "unknown target '" + cfg.target + "'; valid names: " + valid);
        }
    } else if (key == "q_is_precision") {
        cfg.q_is_precision = get_bool(key, v);
    } else if (key == "target_mean") {
        cfg.target_mean = get_vector(key, v);
    } else if (key == "target_cov") {
        cfg.target_cov = get_matrix(key, v, false);
    } else if (key == "banana_a") {
        cfg.banana_a = get_number(key, v);
    } else if (key == "banana_c1" || key == "banana_c2") {
        const double x = get_number(key, v);
        if (x <= 0)
            fail(key, "must be positive");
        (key == "banana_c1" ? cfg.banana_c1 : cfg.banana_c2) = x;
    } else if (key == "N") {
        cfg.N = get_count(key, v);
        if (cfg.N < 2)
            fail(key, "need at least 2 particles");
    } else if (key == "n_steps") {
        cfg.n_steps = get_count(key, v);
        if (cfg.n_steps < 0)
            fail(key, "must be nonnegative");
    } else if (key == "tau") {
        cfg.tau = get_number(key, v);
        if (cfg.tau <= 0)
            fail(key, "must be positive");
    } else if (key == "eps") {
        cfg.eps = get_number(key, v);
        if (cfg.eps < 0)
            fail(key, "must be nonnegative");
    } else if (key == "seed") {
        if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0))
            fail(key, "expected a nonnegative integer");
        cfg.seed = v.get<std::uint64_t>();
    } else if (key == "damping") {
        cfg.damping = one_of(key, v, {"restart", "constant"});
    } else if (key == "speed_restart") {
        cfg.speed_restart = get_bool(key, v);
    } else if (key == "gradient_restart") {
        cfg.gradient_restart = get_bool(key, v);
    } else if (key == "damping_r") {
        cfg.damping_r = get_number(key, v);
        if (cfg.damping_r <= 0)
            fail(key, "must be positive");
    } else if (key == "beta") {
        cfg.beta = get_number(key, v);
        if (!(cfg.beta > 0 && cfg.beta < 1))
            fail(key, "must lie strictly between 0 and 1");
    } else if (key == "alg2_literal") {
        cfg.alg2_literal = get_bool(key, v);
    } else if (key == "restart_literal") {
        cfg.restart_literal = get_bool(key, v);
    } else if (key == "init_mean") {
        cfg.init_mean = get_vector(key, v);
    } else if (key == "init_cov") {
        cfg.init_cov = get_matrix(key, v, false);
        if (!is_spd(cfg.init_cov))
            fail(key, "must be positive definite");
    } else if (key == "record_every") {
        cfg.record_every = get_count(key, v);
        if (cfg.record_every < 1)
            fail(key, "must be at least 1");
    } else if (key == "output_dir") {
        cfg.output_dir = get_string(key, v);
        if (cfg.output_dir.empty())
            fail(key, "must not be empty");
    } else if (key == "kl_method") {
        cfg.kl_method = one_of(key, v, {"auto", "gaussian-fit", "kde"});
    } else if (key == "analyze_mode") {
        cfg.analyze_mode = one_of(key, v, {"svgd", "asvgd"});
    } else if (key == "alpha") {
        if (v.is_null()) {
            cfg.alpha.reset();
            return;
        }
        const double a = get_number(key, v);
        if (a < 0)
            fail(key, "must be nonnegative");
        cfg.alpha = a;
    } else if (key == "sweep_points") {
        cfg.sweep_points = get_count(key, v);
        if (cfg.sweep_points < 2)
            fail(key, "need at least 2 points");
    } else {
        throw ConfigError("unknown config key '" + key + "'");
    }
}

ExperimentConfig parse_config(const std::string& text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(detail::concat("malformed config at line ", line_of(text, e.byte), ": ", e.what()));
    }
    if (!doc.is_object())
        throw ConfigError("config must be a flat JSON object");
    ExperimentConfig cfg;
    for (const auto& [key, value] : doc.items()) {
        if (value.is_object())
            fail(key, "nested objects are not allowed");
        set_config_value(cfg, key, value);
    }
    validate_config(cfg);
    return cfg;
}

void apply_override(ExperimentConfig& cfg, const std::string& assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError("override '" + assignment + "' is not of the form key=value");
    const std::string key = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(raw);
    } catch (const json::parse_error&) {
        value = raw;
    }
    set_config_value(cfg, key, value);
}

TargetSpec<double> make_target(const ExperimentConfig& cfg)
{
    if (cfg.target.empty())
        throw ConfigError("config key 'target': missing (required)");
    if (cfg.target == "gaussian") {
        if (cfg.target_mean.size() == 0 || cfg.target_cov.size() == 0)
            fail("target_mean", "target 'gaussian' needs target_mean and target_cov");
        if (cfg.target_cov.rows() != cfg.target_mean.size())
            fail("target_cov", "dimension does not match target_mean");
        if (!is_spd(cfg.target_cov))
            fail("target_cov", "must be positive definite");
        return TargetSpec<double>::gaussian(cfg.target_mean, cfg.target_cov);
    }
    if (cfg.target == "double-bananas")
        return TargetSpec<double>::double_bananas({cfg.banana_a, cfg.banana_c1, cfg.banana_c2});
    return builtin_target<double>(cfg.target, cfg.q_is_precision);
}

KernelSpec<double> make_kernel(const ExperimentConfig& cfg, Index dim)
{
    if (cfg.kernel == "gaussian")
        return KernelSpec<double>::gaussian(cfg.sigma2);
    MatX<double> A;
    if (cfg.A.size() == 0)
        A = MatX<double>::Identity(dim, dim);
    else if (cfg.A.rows() == 1)
        A = cfg.A(0, 0) * MatX<double>::Identity(dim, dim);
    else
        A = cfg.A;
    if (A.rows() != dim)
        fail("A", detail::concat("expected a ", dim, "x", dim, " matrix for this target"));
    if (!is_spd(A))
        fail("A", "must be symmetric positive definite");
    return KernelSpec<double>::bilinear(A);
}

SamplerConfig<double> make_sampler_config(const ExperimentConfig& cfg)
{
    auto target = make_target(cfg);
    SamplerConfig<double> sc(make_kernel(cfg, target.dim()), std::move(target));
    sc.tau = cfg.tau;
    sc.eps = cfg.eps;
    sc.seed = cfg.seed;
    sc.n_steps = cfg.n_steps;
    sc.alg2_literal = cfg.alg2_literal;
    sc.restart_literal = cfg.restart_literal;
    sc.damping = cfg.damping == "constant"
                     ? DampingSchedule<double>::constant(cfg.beta)
                     : DampingSchedule<double>::restart(cfg.speed_restart, cfg.gradient_restart, cfg.damping_r);
    return sc;
}

KlMethod resolve_kl_method(const ExperimentConfig& cfg, const TargetSpec<double>& target)
{
    if (cfg.kl_method == "auto")
        return target.is_gaussian() ? KlMethod::GaussianFit : KlMethod::Kde;
    const KlMethod m = parse_kl_method(cfg.kl_method);
    if (m == KlMethod::GaussianFit && !target.is_gaussian())
        fail("kl_method", "gaussian-fit requires a Gaussian target");
    return m;
}

VecX<double> resolved_init_mean(const ExperimentConfig& cfg, Index dim)
{
    if (cfg.init_mean.size() == 0)
        return VecX<double>::Ones(dim);
    if (cfg.init_mean.size() != dim)
        fail("init_mean", detail::concat("expected ", dim, " entries"));
    return cfg.init_mean;
}

MatX<double> resolved_init_cov(const ExperimentConfig& cfg, Index dim)
{
    if (cfg.init_cov.size() == 0)
        return MatX<double>::Identity(dim, dim);
    if (cfg.init_cov.rows() != dim)
        fail("init_cov", detail::concat("expected a ", dim, "x", dim, " matrix"));
    return cfg.init_cov;
}

void validate_config(const ExperimentConfig& cfg)
{
    const auto target = make_target(cfg);
    const Index d = target.dim();
    make_kernel(cfg, d);
    resolved_init_mean(cfg, d);
    resolved_init_cov(cfg, d);
    resolve_kl_method(cfg, target);
    if (cfg.restart_literal && cfg.damping != "restart")
        fail("restart_literal", "only meaningful with damping 'restart'");
}

json to_json(const ExperimentConfig& cfg)
{
    validate_config(cfg);
    const auto target = make_target(cfg);
    const Index d = target.dim();
    json j;
    j["sampler"] = cfg.sampler;
    j["kernel"] = cfg.kernel;
    j["sigma2"] = cfg.sigma2;
    j["A"] = cfg.kernel == "bilinear" ? matrix_json(make_kernel(cfg, d).matrix()) : json(nullptr);
    j["target"] = cfg.target;
    j["q_is_precision"] = cfg.q_is_precision;
    j["target_mean"] = cfg.target_mean.size() ? vector_json(cfg.target_mean) : json(nullptr);
    j["target_cov"] = cfg.target_cov.size() ? matrix_json(cfg.target_cov) : json(nullptr);
    j["banana_a"] = cfg.banana_a;
    j["banana_c1"] = cfg.banana_c1;
    j["banana_c2"] = cfg.banana_c2;
    j["N"] = cfg.N;
    j["n_steps"] = cfg.n_steps;
    j["tau"] = cfg.tau;
    j["eps"] = cfg.eps;
    j["seed"] = cfg.seed;
    j["damping"] = cfg.damping;
    j["speed_restart"] = cfg.speed_restart;
    j["gradient_restart"] = cfg.gradient_restart;
    j["damping_r"] = cfg.damping_r;
    j["beta"] = cfg.beta;
    j["alg2_literal"] = cfg.alg2_literal;
    j["restart_literal"] = cfg.restart_literal;
    j["init_mean"] = vector_json(resolved_init_mean(cfg, d));
    j["init_cov"] = matrix_json(resolved_init_cov(cfg, d));
    j["record_every"] = cfg.record_every;
    j["output_dir"] = cfg.output_dir;
    j["kl_method"] = resolve_kl_method(cfg, target) == KlMethod::GaussianFit ? "gaussian-fit" : "kde";
    j["analyze_mode"] = cfg.analyze_mode;
    j["alpha"] = cfg.alpha ? json(*cfg.alpha) : json(nullptr);
    j["sweep_points"] = cfg.sweep_points;
    return j;
}

} // namespace steinflow
