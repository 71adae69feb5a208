#include "commands.hpp"

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "cavem/constants.hpp"
#include "cavem/device_model.hpp"
#include "cavem/fit.hpp"
#include "cavem/harness.hpp"
#include "cavem/io.hpp"
#include "cavem/response.hpp"

#ifndef CAVEM_VERSION_STRING
#define CAVEM_VERSION_STRING "0.0.0"
#endif

namespace cavem::cli {

namespace {

using constants::hz_from_rad;
using constants::rad_from_hz;
using constants::two_pi;

constexpr int kExitOk = 0;
constexpr int kExitNumerical = 1;
constexpr int kExitUsage = 2;

// Default output directory: $CAVEM_OUT_DIR when set, else the working directory.
std::string out_dir() {
    const char* env = std::getenv("CAVEM_OUT_DIR");
    if (env != nullptr && *env != '\0') return env;
    return ".";
}

std::string resolve_out(const std::string& user_path, const std::string& default_name) {
    namespace fs = std::filesystem;
    fs::path p = user_path.empty() ? fs::path(out_dir()) / default_name : fs::path(user_path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    return p.string();
}

void write_run_manifest(const std::string& subcommand, const std::vector<std::string>& argv,
                        std::uint64_t seed, std::map<std::string, std::string> resolved,
                        const std::vector<std::string>& outputs) {
    io::RunManifest m;
    m.tool_version = CAVEM_VERSION_STRING;
    m.subcommand = subcommand;
    m.seed = seed;
    m.argv = argv;
    m.resolved = std::move(resolved);
    m.outputs = outputs;
    io::write_manifest(outputs.front() + ".manifest.json", m);
}

// Drive selection shared by spectrum / map / fit --model coupling: at most one
// of photon number, coupling rate (Hz) or input power (W), plus the sideband
// offset delta (Hz) that places the drive at omega_c - Omega_m + 2 pi delta.
struct DriveFlags {
    std::optional<double> n_d;
    std::optional<double> g_hz;
    std::optional<double> power_w;
    double delta_hz = 0.0;

    [[nodiscard]] bool any() const { return n_d || g_hz || power_w; }

    [[nodiscard]] double omega_d(const device::DeviceParams& params) const {
        return params.omega_c - params.Omega_m + rad_from_hz(delta_hz);
    }

    [[nodiscard]] response::DriveConfig drive(const device::DeviceParams& params) const {
        const double wd = omega_d(params);
        if (g_hz) return response::DriveConfig::from_coupling(wd, rad_from_hz(*g_hz), params);
        if (power_w) return response::DriveConfig::from_power(wd, *power_w, params);
        return response::DriveConfig::from_photon_number(wd, n_d.value_or(0.0), params);
    }

    [[nodiscard]] harness::CouplingSpec coupling(double fallback_n_d) const {
        if (g_hz) return harness::CouplingSpec::coupling_rate(rad_from_hz(*g_hz));
        if (power_w) return harness::CouplingSpec::input_power(*power_w);
        return harness::CouplingSpec::photon_number(n_d.value_or(fallback_n_d));
    }

    void describe(std::map<std::string, std::string>& resolved) const {
        resolved["delta_hz"] = io::format_double(delta_hz);
        if (g_hz) resolved["g_hz"] = io::format_double(*g_hz);
        else if (power_w) resolved["power_w"] = io::format_double(*power_w);
        else resolved["n_d"] = io::format_double(n_d.value_or(0.0));
    }
};

void add_drive_flags(CLI::App* sub, DriveFlags& flags) {
    auto* nd = sub->add_option("--nd", flags.n_d, "drive photon number (default 0: undriven)");
    auto* g = sub->add_option("--g-hz", flags.g_hz, "coupling rate g/2pi in Hz");
    auto* pw = sub->add_option("--power-w", flags.power_w, "drive input power in W");
    nd->excludes(g)->excludes(pw);
    g->excludes(pw);
    sub->add_option("--delta", flags.delta_hz,
                    "drive offset from the lower mechanical sideband, Hz (default 0)");
}

std::optional<harness::NoiseModel> noise_or_none(double sigma, std::uint64_t seed) {
    if (sigma <= 0.0) return std::nullopt;
    return harness::NoiseModel{sigma, seed};
}

bool frequency_like(const std::string& name) {
    return name == "omega_c" || name == "kappa" || name == "kappa_ex" ||
           name == "Omega_m_eff" || name == "Gamma_m_eff" || name == "g" || name == "g0";
}

std::string fit_result_text(const fitting::FitResult& r) {
    std::ostringstream out;
    out << "model: " << r.model_id << '\n'
        << "converged: " << (r.converged ? "yes" : "no") << " (" << r.iterations
        << " iterations)\n"
        << "residual norm: " << io::format_double(r.residual_norm) << '\n';
    for (std::size_t i = 0; i < r.names.size(); ++i) {
        out << "  " << r.names[i] << " = " << io::format_double(r.estimates[i]);
        if (r.has_std_errors()) out << " +- " << io::format_double(r.std_errors[i]);
        if (frequency_like(r.names[i]))
            out << "  (/2pi = " << io::format_double(hz_from_rad(r.estimates[i])) << " Hz)";
        if (r.names[i] == "G")
            out << "  (/2pi = " << io::format_double(hz_from_rad(r.estimates[i])) << " Hz/m)";
        out << '\n';
    }
    return out.str();
}

std::string fit_result_json(const fitting::FitResult& r) {
    std::ostringstream out;
    out << "{\n  \"model\": \"" << r.model_id << "\",\n  \"converged\": "
        << (r.converged ? "true" : "false") << ",\n  \"iterations\": " << r.iterations
        << ",\n  \"residual_norm\": " << io::format_double(r.residual_norm)
        << ",\n  \"parameters\": [\n";
    for (std::size_t i = 0; i < r.names.size(); ++i) {
        out << "    {\"name\": \"" << r.names[i]
            << "\", \"estimate\": " << io::format_double(r.estimates[i]);
        if (r.has_std_errors()) out << ", \"std_error\": " << io::format_double(r.std_errors[i]);
        if (frequency_like(r.names[i]) || r.names[i] == "G")
            out << ", \"per_2pi\": " << io::format_double(hz_from_rad(r.estimates[i]));
        out << '}' << (i + 1 < r.names.size() ? "," : "") << '\n';
    }
    out << "  ]\n}\n";
    return out.str();
}

// ---------------------------------------------------------------------------
// Subcommand configs. Parsing fills these; execution happens after parse so
// that input errors and numerical errors get distinct exit codes.

struct FiguresCfg {
    std::string params_path;
    std::string out;
    bool json = false;
};

struct SpectrumCfg {
    std::string params_path;
    std::string out;
    DriveFlags drive;
    double span_hz = 2.5e6;
    std::size_t points = 2001;
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;
};

struct SweepPowerCfg {
    std::string params_path;
    std::string out;
    double nd_min = 1.0;
    double nd_max = 5e6;
    std::size_t nd_count = 25;
    double delta_hz = 0.0;
    double span_hz = 2.5e6;
    std::size_t points = 2001;
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;
};

struct SweepDetuningCfg {
    std::string params_path;
    std::string out;
    double power_w = 1e-11;
    double span_hz = 600e3;
    std::size_t points = 121;
    bool extract = false;
};

struct MapCfg {
    std::string params_path;
    std::string out;
    DriveFlags drive;
    double drive_span_hz = 300e3;
    std::size_t drive_points = 61;
    double span_hz = 2e6;
    std::size_t points = 401;
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;
};

struct FitCfg {
    std::string model;
    std::string input;
    std::string params_path;
    std::string out;
    DriveFlags drive;
    bool json = false;
};

struct RoundtripCfg {
    std::string params_path;
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;
    std::size_t points = 2001;
};

struct ReplayCfg {
    std::string manifest_path;
};

// ---------------------------------------------------------------------------

int run_figures(const FiguresCfg& cfg, const std::vector<std::string>& argv) {
    const auto params = io::load_device_params(cfg.params_path);
    const auto fom = device::figures_of_merit(params);
    const std::string report =
        cfg.json ? io::format_figures_json(params, fom) : io::format_figures_table(params, fom);
    std::cout << report;
    if (!cfg.out.empty()) {
        const std::string path = resolve_out(cfg.out, "figures.txt");
        std::ofstream file(path, std::ios::binary | std::ios::trunc);
        if (!file) throw std::runtime_error("cannot write " + path);
        file << report;
        write_run_manifest("figures", argv, 0, {{"params", cfg.params_path}}, {path});
    }
    return kExitOk;
}

int run_spectrum(const SpectrumCfg& cfg, const std::vector<std::string>& argv) {
    const auto params = io::load_device_params(cfg.params_path);
    const auto drive = cfg.drive.drive(params);
    if (drive.g != 0.0 && !drive.within_validated_detuning(params))
        std::cerr << "note: drive offset exceeds kappa; dressed response is extrapolated there\n";

    const auto grid =
        response::linear_grid(params.omega_c, rad_from_hz(cfg.span_hz), cfg.points);
    const auto spectrum =
        harness::probe_sweep(params, drive, grid, noise_or_none(cfg.noise_sigma, cfg.seed));

    const std::string path = resolve_out(cfg.out, "spectrum.csv");
    io::write_spectrum_csv(path, spectrum);

    std::map<std::string, std::string> resolved{
        {"params", cfg.params_path},
        {"center_hz", io::format_double(hz_from_rad(params.omega_c))},
        {"span_hz", io::format_double(cfg.span_hz)},
        {"points", std::to_string(cfg.points)},
        {"noise_sigma", io::format_double(cfg.noise_sigma)},
    };
    cfg.drive.describe(resolved);
    write_run_manifest("spectrum", argv, cfg.seed, resolved, {path});

    std::cout << "wrote " << path << " (" << spectrum.size() << " points)\n";
    if (cfg.noise_sigma == 0.0) {
        const auto minima = response::find_minima(spectrum);
        if (minima.size() >= 2) {
            const double sep = std::abs(minima[0].omega - minima[1].omega);
            std::cout << "two deepest |T| minima separated by "
                      << io::format_double(hz_from_rad(sep)) << " Hz\n";
        } else if (minima.size() == 1) {
            std::cout << "single |T| minimum at "
                      << io::format_double(hz_from_rad(minima[0].omega - params.omega_c))
                      << " Hz from the cavity\n";
        }
    }
    return kExitOk;
}

int run_sweep_power(const SweepPowerCfg& cfg, const std::vector<std::string>& argv) {
    const auto params = io::load_device_params(cfg.params_path);
    std::vector<double> nd_list;
    if (cfg.nd_count == 1) {
        nd_list.push_back(cfg.nd_min);
    } else {
        const double log_min = std::log(cfg.nd_min);
        const double log_max = std::log(cfg.nd_max);
        for (std::size_t i = 0; i < cfg.nd_count; ++i)
            nd_list.push_back(std::exp(log_min + (log_max - log_min) *
                                                     static_cast<double>(i) /
                                                     static_cast<double>(cfg.nd_count - 1)));
    }

    const double omega_d = params.omega_c - params.Omega_m + rad_from_hz(cfg.delta_hz);
    const auto grid =
        response::linear_grid(params.omega_c, rad_from_hz(cfg.span_hz), cfg.points);
    const auto sweep = harness::power_sweep(params, omega_d, nd_list, grid,
                                            noise_or_none(cfg.noise_sigma, cfg.seed));

    io::PowerSweepRecord record;
    for (const auto& point : sweep.points) {
        record.n_d.push_back(point.n_d);
        record.g_true_hz.push_back(hz_from_rad(point.g_true));
        record.g_fit_hz.push_back(point.fit_ok
                                      ? hz_from_rad(point.coupling_fit.estimate("g"))
                                      : std::numeric_limits<double>::quiet_NaN());
        record.converged.push_back(point.fit_ok);
    }
    const std::string path = resolve_out(cfg.out, "sweep_power.csv");
    io::write_power_sweep_csv(path, record);

    write_run_manifest("sweep-power", argv, cfg.seed,
                       {{"params", cfg.params_path},
                        {"nd_min", io::format_double(cfg.nd_min)},
                        {"nd_max", io::format_double(cfg.nd_max)},
                        {"nd_count", std::to_string(cfg.nd_count)},
                        {"delta_hz", io::format_double(cfg.delta_hz)},
                        {"span_hz", io::format_double(cfg.span_hz)},
                        {"points", std::to_string(cfg.points)},
                        {"noise_sigma", io::format_double(cfg.noise_sigma)}},
                       {path});

    std::cout << "wrote " << path << " (" << sweep.points.size() << " drive powers)\n";
    if (sweep.sqrt_law_ok) {
        std::cout << "g0/2pi = " << io::format_double(hz_from_rad(sweep.sqrt_law.estimate("g0")))
                  << " Hz";
        if (sweep.sqrt_law.has_std_errors())
            std::cout << " +- " << io::format_double(hz_from_rad(sweep.sqrt_law.std_error("g0")))
                      << " Hz";
        std::cout << '\n';
        return kExitOk;
    }
    std::cerr << "sqrt-law fit failed (too few converged per-power fits)\n";
    return kExitNumerical;
}

int run_sweep_detuning(const SweepDetuningCfg& cfg, const std::vector<std::string>& argv) {
    const auto params = io::load_device_params(cfg.params_path);
    const auto delta_grid = response::linear_grid(0.0, rad_from_hz(cfg.span_hz), cfg.points);
    harness::DetuningSweepOptions options;
    options.extract_from_spectra = cfg.extract;
    const auto sweep = harness::detuning_sweep(params, cfg.power_w, delta_grid, options);

    io::DetuningSweepRecord record{sweep, cfg.extract};
    const std::string path = resolve_out(cfg.out, "sweep_detuning.csv");
    io::write_detuning_csv(path, record);

    write_run_manifest("sweep-detuning", argv, 0,
                       {{"params", cfg.params_path},
                        {"power_w", io::format_double(cfg.power_w)},
                        {"span_hz", io::format_double(cfg.span_hz)},
                        {"points", std::to_string(cfg.points)},
                        {"extract", cfg.extract ? "1" : "0"}},
                       {path});
    std::cout << "wrote " << path << " (" << sweep.size() << " detunings)\n";

    // Infer the frequency-pull constant back from the sweep as a consistency
    // report: the joint fit shares one coupling rate across both curves.
    std::vector<fitting::BackactionPoint> points;
    points.reserve(sweep.size());
    for (const auto& p : sweep) points.push_back({p.delta, p.Omega_m_eff, p.Gamma_m_eff});
    const auto drive_ref = response::DriveConfig::from_power(
        params.omega_c - params.Omega_m, cfg.power_w, params);
    const auto fit = fitting::fit_backaction(points, params, drive_ref.n_d.value());
    if (!fit.converged) {
        std::cerr << "backaction fit did not converge\n";
        return kExitNumerical;
    }
    std::cout << "inferred cavity pull |G|/2pi = "
              << io::format_double(hz_from_rad(fit.estimate("G"))) << " Hz/m\n";
    return kExitOk;
}

int run_map(const MapCfg& cfg, const std::vector<std::string>& argv) {
    const auto params = io::load_device_params(cfg.params_path);
    const auto drive_grid = response::linear_grid(params.omega_c - params.Omega_m,
                                                  rad_from_hz(cfg.drive_span_hz),
                                                  cfg.drive_points);
    const auto probe_grid =
        response::linear_grid(params.omega_c, rad_from_hz(cfg.span_hz), cfg.points);
    const auto coupling = cfg.drive.coupling(1e4);
    const auto map = harness::two_tone_map(params, drive_grid, probe_grid, coupling,
                                           noise_or_none(cfg.noise_sigma, cfg.seed));

    const std::string path = resolve_out(cfg.out, "map.csv");
    io::write_map_csv(path, io::MapRecord::from_map(map));

    std::map<std::string, std::string> resolved{
        {"params", cfg.params_path},
        {"drive_span_hz", io::format_double(cfg.drive_span_hz)},
        {"drive_points", std::to_string(cfg.drive_points)},
        {"span_hz", io::format_double(cfg.span_hz)},
        {"points", std::to_string(cfg.points)},
        {"noise_sigma", io::format_double(cfg.noise_sigma)},
    };
    cfg.drive.describe(resolved);
    write_run_manifest("map", argv, cfg.seed, resolved, {path});

    std::cout << "wrote " << path << " (" << map.drive_freqs.size() << " x "
              << map.probe_freqs.size() << " cells)\n";
    return kExitOk;
}

int run_fit(const FitCfg& cfg, const std::vector<std::string>& argv) {
    fitting::FitResult result;
    if (cfg.model == "cavity") {
        const auto spectrum = io::read_spectrum_csv(cfg.input).to_spectrum();
        result = fitting::fit_cavity(spectrum);
    } else if (cfg.model == "mechanical") {
        const auto xy = io::read_xy_csv(cfg.input);
        fitting::Dataset data;
        data.x.reserve(xy.x.size());
        for (const double f : xy.x) data.x.push_back(rad_from_hz(f));
        data.y = xy.y;
        result = fitting::fit_mechanical(data);
    } else { // coupling
        if (cfg.params_path.empty())
            throw std::runtime_error("fit --model coupling requires --params");
        if (!cfg.drive.any())
            throw std::runtime_error(
                "fit --model coupling requires one of --nd / --g-hz / --power-w as the "
                "initial drive estimate");
        const auto params = io::load_device_params(cfg.params_path);
        const auto spectrum = io::read_spectrum_csv(cfg.input).to_spectrum();
        const auto drive = cfg.drive.drive(params);
        result = fitting::fit_coupling(spectrum, params, drive);
    }

    const std::string report = cfg.json ? fit_result_json(result) : fit_result_text(result);
    std::cout << report;
    if (!cfg.out.empty()) {
        const std::string path = resolve_out(cfg.out, "fit.json");
        std::ofstream file(path, std::ios::binary | std::ios::trunc);
        if (!file) throw std::runtime_error("cannot write " + path);
        file << fit_result_json(result);
        write_run_manifest("fit", argv, 0,
                           {{"model", cfg.model}, {"input", cfg.input}}, {path});
    }
    return result.converged ? kExitOk : kExitNumerical;
}

struct RoundtripRow {
    std::string pipeline;
    std::string name;
    double truth = 0.0;
    double estimate = 0.0;
    double std_error = 0.0; // 0 when unavailable
    bool pass = false;
    std::string measure;
};

int run_roundtrip(const RoundtripCfg& cfg, const std::vector<std::string>& argv) {
    (void)argv; // report-only subcommand: no files, no manifest
    const auto params = io::load_device_params(cfg.params_path);
    const bool noisy = cfg.noise_sigma > 0.0;
    std::vector<RoundtripRow> rows;

    const auto judge = [&](RoundtripRow& row) {
        if (noisy) {
            if (row.std_error > 0.0) {
                const double dist = std::abs(row.estimate - row.truth) / row.std_error;
                std::ostringstream m;
                m << std::fixed << std::setprecision(2) << dist << " sigma";
                row.measure = m.str();
                row.pass = dist <= 3.0;
            } else {
                row.measure = "no uncertainty reported";
                row.pass = false;
            }
        } else {
            const double rel = std::abs(row.estimate - row.truth) / std::abs(row.truth);
            std::ostringstream m;
            m << std::scientific << std::setprecision(2) << rel << " rel";
            row.measure = m.str();
            row.pass = rel <= 1e-6;
        }
    };

    // Bare-cavity notch: synthesize, fit, compare the three cavity rates.
    {
        const auto grid = response::linear_grid(params.omega_c, rad_from_hz(2.5e6), cfg.points);
        const auto drive = response::DriveConfig::from_photon_number(
            params.omega_c - params.Omega_m, 0.0, params);
        const auto spectrum = harness::probe_sweep(params, drive, grid,
                                                   noise_or_none(cfg.noise_sigma, cfg.seed));
        const auto fit = fitting::fit_cavity(spectrum);
        const double truths[] = {params.omega_c, params.kappa, params.kappa_ex};
        const char* names[] = {"omega_c", "kappa", "kappa_ex"};
        for (int i = 0; i < 3; ++i) {
            RoundtripRow row{"cavity", names[i], truths[i], fit.estimate(names[i]),
                             fit.has_std_errors() ? fit.std_error(names[i]) : 0.0, false, ""};
            judge(row);
            rows.push_back(row);
        }
    }

    // Dressed-response coupling rate at one drive power, then the sqrt-law
    // slope over a power ladder.
    {
        const double omega_d = params.omega_c - params.Omega_m;
        const auto grid = response::linear_grid(params.omega_c, rad_from_hz(2.5e6), cfg.points);
        const auto drive = response::DriveConfig::from_photon_number(omega_d, 1e4, params);
        const auto spectrum = harness::probe_sweep(params, drive, grid,
                                                   noise_or_none(cfg.noise_sigma, cfg.seed + 1));
        const auto fit = fitting::fit_coupling(spectrum, params, drive);
        RoundtripRow row{"coupling", "g", drive.g, fit.estimate("g"),
                         fit.has_std_errors() ? fit.std_error("g") : 0.0, false, ""};
        judge(row);
        rows.push_back(row);

        const std::vector<double> nd_list{1e2, 1e3, 1e4, 1e5, 1e6};
        const auto sweep = harness::power_sweep(params, omega_d, nd_list, grid,
                                                noise_or_none(cfg.noise_sigma, cfg.seed + 2));
        RoundtripRow g0_row{"coupling", "g0", params.g0(),
                            sweep.sqrt_law_ok ? sweep.sqrt_law.estimate("g0") : 0.0,
                            sweep.sqrt_law_ok && sweep.sqrt_law.has_std_errors()
                                ? sweep.sqrt_law.std_error("g0")
                                : 0.0,
                            false, ""};
        if (sweep.sqrt_law_ok) judge(g0_row);
        else g0_row.measure = "sqrt-law fit failed";
        rows.push_back(g0_row);
    }

    // Backaction detuning sweep (closed form, noise-free by construction):
    // recover the frequency-pull constant.
    {
        const auto delta_grid = response::linear_grid(0.0, rad_from_hz(600e3), 61);
        const auto sweep = harness::detuning_sweep(params, 1e-11, delta_grid);
        std::vector<fitting::BackactionPoint> points;
        for (const auto& p : sweep) points.push_back({p.delta, p.Omega_m_eff, p.Gamma_m_eff});
        const auto drive_ref = response::DriveConfig::from_power(
            params.omega_c - params.Omega_m, 1e-11, params);
        const auto fit = fitting::fit_backaction(points, params, drive_ref.n_d.value());
        RoundtripRow row{"backaction", "G", std::abs(params.cavity_pull), fit.estimate("G"),
                         0.0, false, ""};
        const double rel = std::abs(row.estimate - row.truth) / row.truth;
        std::ostringstream m;
        m << std::scientific << std::setprecision(2) << rel << " rel";
        row.measure = m.str();
        row.pass = fit.converged && rel <= 1e-6;
        rows.push_back(row);
    }

    std::cout << "pipeline    parameter  truth                   estimate                error"
                 "             status\n";
    bool all_pass = true;
    for (const auto& row : rows) {
        all_pass = all_pass && row.pass;
        std::ostringstream line;
        line << std::left << std::setw(12) << row.pipeline << std::setw(11) << row.name
             << std::setw(24) << io::format_double(row.truth) << std::setw(24)
             << io::format_double(row.estimate) << std::setw(18) << row.measure
             << (row.pass ? "PASS" : "FAIL");
        std::cout << line.str() << '\n';
    }
    return all_pass ? kExitOk : kExitNumerical;
}

int run_replay(const ReplayCfg& cfg) {
    const auto manifest = io::read_manifest(cfg.manifest_path);
    if (manifest.tool_version != CAVEM_VERSION_STRING)
        std::cerr << "note: manifest was written by version " << manifest.tool_version
                  << ", this is " << CAVEM_VERSION_STRING << '\n';
    std::cout << "replaying: cavem";
    for (const auto& a : manifest.argv) std::cout << ' ' << a;
    std::cout << '\n';
    return run(manifest.argv);
}

} // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"coupled cavity-oscillator response simulator and estimation toolkit"};
    app.name("cavem");
    app.set_version_flag("--version", CAVEM_VERSION_STRING);
    app.require_subcommand(1);

    FiguresCfg figures_cfg;
    auto* figures = app.add_subcommand("figures", "derived device figures of merit");
    figures->add_option("--params", figures_cfg.params_path, "device parameter JSON")
        ->required()
        ->check(CLI::ExistingFile);
    figures->add_flag("--json", figures_cfg.json, "machine-readable output");
    figures->add_option("--out", figures_cfg.out, "also write the report to this file");

    SpectrumCfg spectrum_cfg;
    auto* spectrum = app.add_subcommand("spectrum", "probe transmission spectrum at fixed drive");
    spectrum->add_option("--params", spectrum_cfg.params_path, "device parameter JSON")
        ->required()
        ->check(CLI::ExistingFile);
    add_drive_flags(spectrum, spectrum_cfg.drive);
    spectrum->add_option("--span-hz", spectrum_cfg.span_hz, "probe half-span around the cavity");
    spectrum->add_option("--points", spectrum_cfg.points, "probe grid points");
    spectrum->add_option("--noise-sigma", spectrum_cfg.noise_sigma,
                         "additive complex noise per quadrature");
    spectrum->add_option("--seed", spectrum_cfg.seed, "noise seed");
    spectrum->add_option("--out", spectrum_cfg.out, "output CSV (default spectrum.csv)");

    SweepPowerCfg sweep_power_cfg;
    auto* sweep_power =
        app.add_subcommand("sweep-power", "coupling extraction across drive photon numbers");
    sweep_power->add_option("--params", sweep_power_cfg.params_path, "device parameter JSON")
        ->required()
        ->check(CLI::ExistingFile);
    sweep_power->add_option("--nd-min", sweep_power_cfg.nd_min, "smallest photon number")
        ->check(CLI::PositiveNumber);
    sweep_power->add_option("--nd-max", sweep_power_cfg.nd_max, "largest photon number")
        ->check(CLI::PositiveNumber);
    sweep_power->add_option("--nd-count", sweep_power_cfg.nd_count, "log-spaced steps");
    sweep_power->add_option("--delta", sweep_power_cfg.delta_hz,
                            "drive offset from the lower sideband, Hz");
    sweep_power->add_option("--span-hz", sweep_power_cfg.span_hz, "probe half-span");
    sweep_power->add_option("--points", sweep_power_cfg.points, "probe grid points");
    sweep_power->add_option("--noise-sigma", sweep_power_cfg.noise_sigma,
                            "additive complex noise per quadrature");
    sweep_power->add_option("--seed", sweep_power_cfg.seed, "noise seed");
    sweep_power->add_option("--out", sweep_power_cfg.out,
                            "output CSV (default sweep_power.csv)");

    SweepDetuningCfg sweep_detuning_cfg;
    auto* sweep_detuning =
        app.add_subcommand("sweep-detuning", "backaction vs drive detuning at fixed power");
    sweep_detuning
        ->add_option("--params", sweep_detuning_cfg.params_path, "device parameter JSON")
        ->required()
        ->check(CLI::ExistingFile);
    sweep_detuning->add_option("--power-w", sweep_detuning_cfg.power_w,
                               "drive input power in W (default 10 pW)");
    sweep_detuning->add_option("--span-hz", sweep_detuning_cfg.span_hz,
                               "detuning half-span (default 600 kHz)");
    sweep_detuning->add_option("--points", sweep_detuning_cfg.points, "detuning grid points");
    sweep_detuning->add_flag("--extract", sweep_detuning_cfg.extract,
                             "also measure the response feature from spectra");
    sweep_detuning->add_option("--out", sweep_detuning_cfg.out,
                               "output CSV (default sweep_detuning.csv)");

    MapCfg map_cfg;
    auto* map = app.add_subcommand("map", "two-tone drive/probe magnitude map");
    map->add_option("--params", map_cfg.params_path, "device parameter JSON")
        ->required()
        ->check(CLI::ExistingFile);
    add_drive_flags(map, map_cfg.drive);
    map->add_option("--drive-span-hz", map_cfg.drive_span_hz,
                    "drive half-span around the lower sideband");
    map->add_option("--drive-points", map_cfg.drive_points, "drive grid points");
    map->add_option("--span-hz", map_cfg.span_hz, "probe half-span around the cavity");
    map->add_option("--points", map_cfg.points, "probe grid points");
    map->add_option("--noise-sigma", map_cfg.noise_sigma,
                    "additive complex noise per quadrature");
    map->add_option("--seed", map_cfg.seed, "noise seed");
    map->add_option("--out", map_cfg.out, "output CSV (default map.csv)");

    FitCfg fit_cfg;
    auto* fit = app.add_subcommand("fit", "parameter estimation from a data file");
    fit->add_option("--model", fit_cfg.model, "cavity | mechanical | coupling")
        ->required()
        ->check(CLI::IsMember({"cavity", "mechanical", "coupling"}));
    fit->add_option("--input", fit_cfg.input, "input CSV")
        ->required()
        ->check(CLI::ExistingFile);
    fit->add_option("--params", fit_cfg.params_path,
                    "device parameter JSON (coupling model only)")
        ->check(CLI::ExistingFile);
    add_drive_flags(fit, fit_cfg.drive);
    fit->add_flag("--json", fit_cfg.json, "machine-readable output");
    fit->add_option("--out", fit_cfg.out, "also write the JSON report to this file");

    RoundtripCfg roundtrip_cfg;
    auto* roundtrip =
        app.add_subcommand("roundtrip", "synthesize -> fit -> compare, all three pipelines");
    roundtrip->add_option("--params", roundtrip_cfg.params_path, "device parameter JSON")
        ->required()
        ->check(CLI::ExistingFile);
    roundtrip->add_option("--noise-sigma", roundtrip_cfg.noise_sigma,
                          "additive complex noise per quadrature (0: exact round-trip)");
    roundtrip->add_option("--seed", roundtrip_cfg.seed, "noise seed");
    roundtrip->add_option("--points", roundtrip_cfg.points, "probe grid points");

    ReplayCfg replay_cfg;
    auto* replay = app.add_subcommand("replay", "re-run a recorded manifest");
    replay->add_option("manifest", replay_cfg.manifest_path, "run manifest JSON")
        ->required()
        ->check(CLI::ExistingFile);

    std::vector<const char*> argv_c;
    argv_c.reserve(args.size() + 1);
    argv_c.push_back("cavem");
    for (const auto& a : args) argv_c.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv_c.size()), argv_c.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*figures) return run_figures(figures_cfg, args);
        if (*spectrum) return run_spectrum(spectrum_cfg, args);
        if (*sweep_power) return run_sweep_power(sweep_power_cfg, args);
        if (*sweep_detuning) return run_sweep_detuning(sweep_detuning_cfg, args);
        if (*map) return run_map(map_cfg, args);
        if (*fit) return run_fit(fit_cfg, args);
        if (*roundtrip) return run_roundtrip(roundtrip_cfg, args);
        if (*replay) return run_replay(replay_cfg);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::runtime_error& e) {
        // Input ingestion problems (missing/unknown keys, malformed CSV) are
        // usage errors; anything thrown past that point is a numerical failure.
        const std::string what = e.what();
        const bool input_error = what.find("missing required key") != std::string::npos ||
                                 what.find("unknown key") != std::string::npos ||
                                 what.find("cannot open") != std::string::npos ||
                                 what.find("cannot parse") != std::string::npos ||
                                 what.find("header mismatch") != std::string::npos ||
                                 what.find("requires") != std::string::npos;
        std::cerr << "error: " << what << '\n';
        return input_error ? kExitUsage : kExitNumerical;
    }
    return kExitUsage;
}

int run(int argc, const char* const* argv) {
    std::vector<std::string> args;
    args.reserve(argc > 0 ? static_cast<std::size_t>(argc - 1) : 0);
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args);
}

} // namespace cavem::cli
