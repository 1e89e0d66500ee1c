#include "steinflow/experiment.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot read config '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

steinflow::ExperimentConfig load(const std::string& path, const std::vector<std::string>& overrides)
{
    auto cfg = steinflow::parse_config(read_file(path));
    for (const auto& o : overrides)
        steinflow::apply_override(cfg, o);
    steinflow::validate_config(cfg);
    return cfg;
}

std::vector<std::string> split(const std::string& s)
{
    // commas inside brackets belong to a JSON value
    std::vector<std::string> out;
    std::string cur;
    int depth = 0;
    for (char c : s) {
        if (c == '[')
            ++depth;
        else if (c == ']')
            --depth;
        if (c == ',' && depth == 0) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty())
        out.push_back(cur);
    return out;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"steinflow: accelerated Stein variational gradient descent and baseline samplers"};
    app.require_subcommand(1);

    std::string config;
    std::vector<std::string> overrides;
    auto* run = app.add_subcommand("run", "run one experiment");
    run->add_option("config", config, "flat JSON config")->required();
    run->add_option("--override", overrides, "key=value, repeatable");

    auto* analyze = app.add_subcommand("analyze", "spectral report for a Gaussian target");
    analyze->add_option("config", config, "flat JSON config")->required();
    analyze->add_option("--override", overrides, "key=value, repeatable");

    std::string param, values;
    unsigned threads = 0;
    auto* sweep = app.add_subcommand("sweep", "one run per value on worker threads");
    sweep->add_option("config", config, "flat JSON config")->required();
    sweep->add_option("--param", param, "config key to vary")->required();
    sweep->add_option("--values", values, "comma separated values")->required();
    sweep->add_option("--threads", threads, "worker threads (0: hardware concurrency)");
    sweep->add_option("--override", overrides, "key=value, repeatable");

    CLI11_PARSE(app, argc, argv);

    try {
        const auto cfg = load(config, overrides);
        if (*run) {
            const auto s = steinflow::run_experiment(cfg);
            std::cout << "wrote " << s.output_dir.string() << " (" << s.records << " records, KL " << s.initial_kl
                      << " -> " << s.final_kl << ", hash " << s.content_hash << ")\n";
        } else if (*analyze) {
            const auto rep = steinflow::analyze_spectrum(cfg);
            std::cout << rep.dump(2) << '\n';
        } else {
            const auto res = steinflow::run_sweep(cfg, param, split(values), threads);
            int failed = 0;
            for (std::size_t i = 0; i < res.values.size(); ++i) {
                if (res.errors[i].empty()) {
                    std::cout << param << '=' << res.values[i] << " -> " << res.dirs[i].string() << '\n';
                } else {
                    std::cerr << param << '=' << res.values[i] << " failed: " << res.errors[i] << '\n';
                    ++failed;
                }
            }
            return failed ? 1 : 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
