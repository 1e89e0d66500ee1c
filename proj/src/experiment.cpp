#include "steinflow/experiment.hpp"

#include "steinflow/gaussian_dynamics.hpp"
#include "steinflow/spectral.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

namespace steinflow {

namespace fs = std::filesystem;
using nlohmann::json;

std::string git_blob_hash(const std::string& content)
{
    const std::string blob = "blob " + std::to_string(content.size()) + '\0' + content;
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(blob.data(), blob.size(), md, &len, EVP_sha1(), nullptr) != 1)
        throw std::runtime_error("SHA-1 digest failed");
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i)
        os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    return os.str();
}

fs::path resolve_output_dir(const ExperimentConfig& cfg)
{
    if (const char* env = std::getenv("STEINFLOW_OUT"); env && *env)
        return fs::path(env);
    return fs::path(cfg.output_dir);
}

namespace {

std::ofstream open_out(const fs::path& p)
{
    std::ofstream os(p, std::ios::binary);
    if (!os)
        throw std::runtime_error("cannot open '" + p.string() + "' for writing");
    return os;
}

void close_checked(std::ofstream& os, const fs::path& p)
{
    os.close();
    if (!os)
        throw std::runtime_error("write to '" + p.string() + "' failed");
}

void write_particles_csv(const fs::path& p, const MatX<double>& X)
{
    auto os = open_out(p);
    for (Index j = 0; j < X.cols(); ++j)
        os << (j ? "," : "") << 'x' << j;
    os << '\n';
    for (Index i = 0; i < X.rows(); ++i) {
        for (Index j = 0; j < X.cols(); ++j) {
            if (j)
                os << ',';
            detail::write_number(os, X(i, j));
        }
        os << '\n';
    }
    close_checked(os, p);
}

// initial particles come from their own stream so that sampler noise does not depend on N
MatX<double> initial_particles(const ExperimentConfig& cfg, Index dim)
{
    std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed & 0xffffffffu), static_cast<std::uint32_t>(cfg.seed >> 32),
                      0x5eedu};
    std::mt19937_64 rng(seq);
    return sample_gaussian<double>(cfg.N, resolved_init_mean(cfg, dim), resolved_init_cov(cfg, dim), rng);
}

RunSummary run_in(const ExperimentConfig& cfg, const fs::path& dir)
{
    validate_config(cfg);
    ExperimentConfig resolved = cfg;
    resolved.output_dir = dir.string();
    const json manifest_cfg = to_json(resolved);

    const SamplerConfig<double> sc = make_sampler_config(cfg);
    const SamplerKind kind = parse_sampler_kind(cfg.sampler);
    const KlMethod kl_method = resolve_kl_method(cfg, sc.target);
    const Index d = sc.target.dim();

    fs::create_directories(dir / "snapshots");
    const fs::path metrics_path = dir / "metrics.csv";
    auto metrics = open_out(metrics_path);
    write_metrics_header(metrics, d);

    RunSummary summary;
    summary.output_dir = dir;
    std::vector<MatX<double>> snaps;
    std::vector<std::string> snapshot_files;

    const MatX<double> X0 = initial_particles(cfg, d);
    auto recorder = [&](Index k, const MatX<double>& X, const StepDiagnostics<double>& diag) {
        if (k % cfg.record_every != 0 && k != cfg.n_steps)
            return;
        MetricRecord<double> r;
        r.iteration = k;
        const auto kl = kl_estimate<double>(X, sc.target, kl_method, cfg.seed);
        r.kl_estimate = kl.value;
        r.regularized = kl.regularized;
        const auto m = empirical_moments(X);
        r.mean = m.mean;
        r.cov = m.cov;
        r.grad_restart_stat = diag.grad_restart_stat;
        r.mean_speed = diag.mean_speed;
        r.acceptance_rate = diag.acceptance_rate;
        write_metrics_row(metrics, r);
        const std::string name = "particles_" + std::to_string(k) + ".csv";
        write_particles_csv(dir / "snapshots" / name, X);
        snapshot_files.push_back("snapshots/" + name);
        snaps.push_back(X);
        if (k == 0)
            summary.initial_kl = kl.value;
        summary.final_kl = kl.value;
        ++summary.records;
    };
    run<double>(sc, kind, X0, cfg.n_steps, recorder, std::max<Index>(1, cfg.n_steps));
    close_checked(metrics, metrics_path);

    const fs::path svg_path = dir / "trajectory.svg";
    auto svg = open_out(svg_path);
    write_trajectory_svg(svg, snaps, sc.target);
    close_checked(svg, svg_path);

    summary.content_hash = git_blob_hash(manifest_cfg.dump());
    json manifest;
    manifest["config"] = manifest_cfg;
    manifest["content_hash"] = summary.content_hash;
    manifest["content_hash_scheme"] = "git blob SHA-1 of the compact resolved config JSON";
    manifest["files"] = json::array({"metrics.csv", "trajectory.svg"});
    for (const auto& f : snapshot_files)
        manifest["files"].push_back(f);
    const fs::path manifest_path = dir / "manifest.json";
    auto mf = open_out(manifest_path);
    mf << manifest.dump(2) << '\n';
    close_checked(mf, manifest_path);
    return summary;
}

json complex_list(const std::vector<std::complex<double>>& v)
{
    json a = json::array();
    for (const auto& z : v)
        a.push_back(json::array({z.real(), z.imag()}));
    return a;
}

json mat_json(const MatX<double>& m)
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

// NaN and infinities have no JSON literal
json num(double x)
{
    return std::isfinite(x) ? json(x) : json(nullptr);
}

} // namespace

RunSummary run_experiment(const ExperimentConfig& cfg)
{
    return run_in(cfg, resolve_output_dir(cfg));
}

json analyze_spectrum(const ExperimentConfig& cfg)
{
    validate_config(cfg);
    const auto target = make_target(cfg);
    if (!target.is_gaussian())
        throw ConfigError("analyze: requires a Gaussian target");
    const Index d = target.dim();
    ExperimentConfig kcfg = cfg;
    kcfg.kernel = "bilinear";
    const MatX<double> A = make_kernel(kcfg, d).matrix();
    const VecX<double> b = target.mean();
    const MatX<double> Q = target.covariance();

    const auto g = gamma_rate<double>(A, b, Q);
    json rep;
    rep["mode"] = cfg.analyze_mode;
    rep["A"] = mat_json(A);
    rep["b"] = mat_json(b);
    rep["Q"] = mat_json(Q);
    rep["gamma"] = g.gamma;
    rep["gamma_lower_bound"] = g.lower_bound;
    rep["gamma_corrected_bound"] = g.corrected_bound;
    rep["alpha_star"] = optimal_damping<double>(A);

    const fs::path dir = resolve_output_dir(cfg);
    fs::create_directories(dir);
    const fs::path table_path = dir / "rate_table.csv";
    auto table = open_out(table_path);
    table << std::setprecision(17);
    const long n = cfg.sweep_points;

    if (cfg.analyze_mode == "svgd") {
        const MatX<double> B = svgd_linearized_matrix<double>(A, b, Q);
        const auto sr = make_report<double>(eigenvalues<double>(B));
        rep["eigenvalues"] = complex_list(sr.eigenvalues);
        rep["spectral_abscissa"] = sr.spectral_abscissa;
        rep["condition_number"] = sr.condition_number;
        rep["h_star"] = sr.optimal_step;
        rep["rho"] = sr.contraction;
        if (d == 1) {
            const auto opt = optimal_A_svgd<double>(b, Q, OptimalAMode::Scalar1D);
            rep["optimal_A"] = mat_json(opt.A);
            rep["optimal_h_star"] = opt.h_star;
        } else if (b.isZero(0)) {
            rep["optimal_A"] = mat_json(optimal_A_svgd<double>(b, Q, OptimalAMode::Commuting).A);
        }
        // A scaled by s over [1e-2, 1e2]; for d = 1 and A = 1 this is the A grid itself
        table << "scale,condition_number,spectral_abscissa,h_star,rho\n";
        for (long i = 0; i < n; ++i) {
            const double s = std::pow(10.0, -2.0 + 4.0 * double(i) / double(n - 1));
            const auto r = make_report<double>(eigenvalues<double>(svgd_linearized_matrix<double>(s * A, b, Q)));
            table << s << ',' << r.condition_number << ',' << r.spectral_abscissa << ',' << r.optimal_step << ','
                  << r.contraction << '\n';
        }
    } else {
        if (!commute(A, Q))
            throw ConfigError("analyze: accelerated mode needs commuting A and Q");
        const double alpha_star = optimal_damping<double>(A);
        const double alpha = cfg.alpha.value_or(alpha_star);
        const auto sr = asvgd_linearized_spectrum<double>(A, Q, alpha);
        rep["alpha"] = alpha;
        rep["centered"] = true;
        rep["eigenvalues"] = complex_list(sr.eigenvalues);
        rep["spectral_abscissa"] = sr.spectral_abscissa;
        rep["condition_number"] = sr.condition_number;
        rep["verification_error"] = sr.verification_error;
        const double theta = A.trace() / double(d);
        if ((A - theta * MatX<double>::Identity(d, d)).norm() <= 1e-12 * theta) {
            const auto rates = asvgd_rates<double>(Q, theta);
            rep["theta"] = theta;
            rep["kappa_Q"] = rates.kappa_Q;
            rep["kappa_tilde"] = rates.kappa_tilde;
            rep["rho"] = rates.rho;
            rep["h_star"] = rates.h_star;
            rep["reference_rate"] = rates.reference_rate;
        } else {
            rep["theta"] = nullptr;
            rep["kappa_tilde"] = nullptr;
            rep["rho"] = nullptr;
            rep["h_star"] = nullptr;
        }
        table << "alpha,spectral_abscissa,condition_number\n";
        for (long i = 0; i < n; ++i) {
            const double a = alpha_star * (0.1 + 2.9 * double(i) / double(n - 1));
            const auto r = make_report<double>(asvgd_spectrum_closed_form<double>(A, Q, a));
            table << a << ',' << r.spectral_abscissa << ',' << r.condition_number << '\n';
        }
    }
    close_checked(table, table_path);

    for (auto& [key, value] : rep.items())
        if (value.is_number_float())
            value = num(value.get<double>());
    const fs::path rep_path = dir / "spectral_report.json";
    auto os = open_out(rep_path);
    os << rep.dump(2) << '\n';
    close_checked(os, rep_path);
    return rep;
}

SweepResult run_sweep(const ExperimentConfig& cfg, const std::string& param, const std::vector<std::string>& values,
                      unsigned threads)
{
    if (values.empty())
        throw ConfigError("sweep: no values given");
    const fs::path base = resolve_output_dir(cfg);
    std::vector<ExperimentConfig> runs;
    SweepResult res;
    for (std::size_t i = 0; i < values.size(); ++i) {
        ExperimentConfig c = cfg;
        apply_override(c, param + "=" + values[i]);
        if (param != "seed")
            c.seed = cfg.seed + i;
        c.output_dir = (base / (param + "_" + std::to_string(i))).string();
        validate_config(c);
        runs.push_back(std::move(c));
        res.values.push_back(values[i]);
        res.dirs.emplace_back(runs.back().output_dir);
    }
    res.errors.assign(runs.size(), "");
    if (threads == 0)
        threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(runs.size()));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < runs.size(); i = next++) {
            try {
                run_in(runs[i], res.dirs[i]);
            } catch (const std::exception& e) {
                res.errors[i] = e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t)
        pool.emplace_back(worker);
    for (auto& t : pool)
        t.join();
    return res;
}

namespace {

struct Frame {
    double x0, x1, y0, y1;
    double W = 640, H = 640, pad = 20;

    double px(double x) const { return pad + (x - x0) / (x1 - x0) * (W - 2 * pad); }
    double py(double y) const { return H - pad - (y - y0) / (y1 - y0) * (H - 2 * pad); }
};

// marching squares over a regular grid of potential values
void contour(std::ostream& os, const Frame& fr, const TargetSpec<double>& target, const std::vector<double>& levels)
{
    const int n = 80;
    MatX<double> F(n + 1, n + 1);
    VecX<double> p(2);
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j) {
            p << fr.x0 + (fr.x1 - fr.x0) * i / n, fr.y0 + (fr.y1 - fr.y0) * j / n;
            F(i, j) = target.potential(p);
        }
    auto gx = [&](double i) { return fr.px(fr.x0 + (fr.x1 - fr.x0) * i / n); };
    auto gy = [&](double j) { return fr.py(fr.y0 + (fr.y1 - fr.y0) * j / n); };
    for (double lv : levels) {
        os << "<path fill=\"none\" stroke=\"#999\" stroke-width=\"0.8\" d=\"";
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const double c[4] = {F(i, j), F(i + 1, j), F(i + 1, j + 1), F(i, j + 1)};
                const double cx[4] = {double(i), double(i + 1), double(i + 1), double(i)};
                const double cy[4] = {double(j), double(j), double(j + 1), double(j + 1)};
                double ex[4], ey[4];
                int m = 0;
                for (int e = 0; e < 4; ++e) {
                    const int a = e, b = (e + 1) % 4;
                    if ((c[a] < lv) != (c[b] < lv)) {
                        const double t = (lv - c[a]) / (c[b] - c[a]);
                        ex[m] = cx[a] + t * (cx[b] - cx[a]);
                        ey[m] = cy[a] + t * (cy[b] - cy[a]);
                        ++m;
                    }
                }
                for (int s = 0; s + 1 < m; s += 2)
                    os << 'M' << gx(ex[s]) << ',' << gy(ey[s]) << 'L' << gx(ex[s + 1]) << ',' << gy(ey[s + 1]);
            }
        os << "\"/>\n";
    }
}

} // namespace

void write_trajectory_svg(std::ostream& os, const std::vector<MatX<double>>& snapshots,
                          const TargetSpec<double>& target)
{
    os << std::setprecision(6);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"640\" viewBox=\"0 0 640 640\">\n"
       << "<rect width=\"640\" height=\"640\" fill=\"white\"/>\n";
    if (snapshots.empty()) {
        os << "</svg>\n";
        return;
    }
    const Index d = snapshots.front().cols();
    const Index n = snapshots.front().rows();
    const Index shown = std::min<Index>(n, 60);
    // d = 1: horizontal axis is the snapshot index
    auto coord = [&](std::size_t s, Index i) -> std::pair<double, double> {
        if (d == 1)
            return {double(s), snapshots[s](i, 0)};
        return {snapshots[s](i, 0), snapshots[s](i, 1)};
    };
    Frame fr{1e300, -1e300, 1e300, -1e300};
    for (std::size_t s = 0; s < snapshots.size(); ++s)
        for (Index i = 0; i < n; ++i) {
            const auto [x, y] = coord(s, i);
            fr.x0 = std::min(fr.x0, x);
            fr.x1 = std::max(fr.x1, x);
            fr.y0 = std::min(fr.y0, y);
            fr.y1 = std::max(fr.y1, y);
        }
    const double mx = 0.05 * std::max(fr.x1 - fr.x0, 1e-9), my = 0.05 * std::max(fr.y1 - fr.y0, 1e-9);
    fr.x0 -= mx;
    fr.x1 += mx;
    fr.y0 -= my;
    fr.y1 += my;

    if (d == 2) {
        // levels at potential quantiles of the final particles
        std::vector<double> f;
        for (Index i = 0; i < n; ++i)
            f.push_back(target.potential(snapshots.back().row(i).transpose()));
        std::sort(f.begin(), f.end());
        std::vector<double> levels;
        for (double q : {0.1, 0.3, 0.5, 0.7, 0.9, 0.99})
            levels.push_back(f[static_cast<std::size_t>(q * double(f.size() - 1))]);
        levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
        contour(os, fr, target, levels);
    }
    for (Index i = 0; i < shown; ++i) {
        os << "<polyline fill=\"none\" stroke=\"#4a7\" stroke-width=\"0.6\" points=\"";
        for (std::size_t s = 0; s < snapshots.size(); ++s) {
            const auto [x, y] = coord(s, i);
            os << (s ? " " : "") << fr.px(x) << ',' << fr.py(y);
        }
        os << "\"/>\n";
    }
    for (Index i = 0; i < n; ++i) {
        const auto [x, y] = coord(0, i);
        os << "<circle cx=\"" << fr.px(x) << "\" cy=\"" << fr.py(y) << "\" r=\"2\" fill=\"#36c\"/>\n";
    }
    const std::size_t last = snapshots.size() - 1;
    for (Index i = 0; i < n; ++i) {
        const auto [x, y] = coord(last, i);
        os << "<rect x=\"" << fr.px(x) - 2 << "\" y=\"" << fr.py(y) - 2
           << "\" width=\"4\" height=\"4\" fill=\"#c33\"/>\n";
    }
    os << "</svg>\n";
}

} // namespace steinflow
