// Acceptance gate: one PASS/FAIL line per headline requirement, each printing
// the measured value next to its pinned anchor and tolerance. Exits nonzero if
// any line fails. Runs from the reference parameter file alone.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cavem/constants.hpp"
#include "cavem/device_model.hpp"
#include "cavem/fit.hpp"
#include "cavem/harness.hpp"
#include "cavem/io.hpp"
#include "cavem/oracle.hpp"
#include "cavem/response.hpp"
#include "commands.hpp"

using namespace cavem;
using constants::hz_from_rad;
using constants::rad_from_hz;

namespace {

int g_failures = 0;

void detail(const std::string& line) { std::printf("    %s\n", line.c_str()); }

void verdict(bool pass, const std::string& name, const std::string& summary) {
    if (!pass) ++g_failures;
    std::printf("%s [%s] %s\n", pass ? "PASS" : "FAIL", name.c_str(), summary.c_str());
}

std::string fmt(const char* format, ...) {
    char buf[256];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof buf, format, args);
    va_end(args);
    return buf;
}

double rel_err(double measured, double anchor) {
    return std::abs(measured - anchor) / std::abs(anchor);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// --- 1: device-scale constants against their published round numbers --------

void check_constants(const device::DeviceParams& p) {
    const auto fom = device::figures_of_merit(p);
    const double f_lc = hz_from_rad(device::lc_resonance(p.inductance, p.capacitance));

    struct Row {
        const char* name;
        double measured;
        double anchor;
        double tol;
    };
    const Row rows[] = {
        {"x_zp_m", fom.x_zp, 4.1e-15, 0.05},
        {"g0_over_pi_hz", 2.0 * hz_from_rad(fom.g0), 460.0, 0.05},
        {"f_lc_hz", f_lc, 7.45e9, 0.02},
        {"q_mechanical", fom.q_mechanical, 360000.0, 0.02},
        {"sideband_ratio", fom.sideband_ratio, 63.0, 0.02},
        {"n_mech", fom.n_mech, 80.0, 0.05},
        {"n_cavity", fom.n_cavity, 1.3e-4, 0.02},
        {"thermal_storage_s", fom.storage_time, 70e-6, 0.05},
        {"group_delay_s", fom.group_delay, 5e-3, 0.10},
        {"cooling_factor", fom.cooling_factor, 5000.0, 0.15},
    };
    int ok = 0;
    for (const auto& r : rows) {
        const double e = rel_err(r.measured, r.anchor);
        const bool pass = e <= r.tol;
        ok += pass ? 1 : 0;
        detail(fmt("%-18s measured=%.6g anchor=%.3g rel=%.2e tol=%.0e%s", r.name, r.measured,
                   r.anchor, e, r.tol, pass ? "" : "  <-- FAIL"));
    }
    verdict(ok == 10, "constants", fmt("%d/10 derived quantities within pinned tolerances", ok));
}

// --- 2: strong-drive normal-mode splitting ----------------------------------

void check_splitting(const device::DeviceParams& p) {
    const auto drive = response::DriveConfig::from_photon_number(p.omega_c - p.Omega_m, 5e6, p);
    const auto spectrum =
        response::evaluate(response::linear_grid(p.omega_c, rad_from_hz(2.5e6), 2001), drive, p);
    const auto minima = response::find_minima(spectrum);
    bool pass = minima.size() >= 2;
    double sep_hz = 0.0, sep_kappa = 0.0;
    if (pass) {
        sep_hz = hz_from_rad(std::abs(minima[0].omega - minima[1].omega));
        sep_kappa = rad_from_hz(sep_hz) / p.kappa;
        detail(fmt("minima separation = %.6g Hz (anchor 1.0e6, rel %.2e, tol 5e-2)", sep_hz,
                   rel_err(sep_hz, 1.0e6)));
        detail(fmt("separation / kappa = %.4g (anchor 6, |diff| %.3g, tol 0.5)", sep_kappa,
                   std::abs(sep_kappa - 6.0)));
        pass = rel_err(sep_hz, 1.0e6) <= 0.05 && std::abs(sep_kappa - 6.0) <= 0.5;
    }

    const auto strong = response::DriveConfig::from_coupling(p.omega_c - p.Omega_m, 3.0 * p.kappa, p);
    const auto modes = response::normal_modes(strong, p);
    const double expected = (p.kappa + p.Gamma_m) / 2.0;
    const double e1 = rel_err(modes.linewidths.first, expected);
    const double e2 = rel_err(modes.linewidths.second, expected);
    detail(fmt("hybrid linewidths at g=3k: %.6g / %.6g Hz vs (k+Gm)/2 = %.6g Hz (tol 2e-2)",
               hz_from_rad(modes.linewidths.first), hz_from_rad(modes.linewidths.second),
               hz_from_rad(expected)));
    pass = pass && e1 <= 0.02 && e2 <= 0.02;

    verdict(pass, "mode-splitting",
            fmt("split = %.4g kHz = %.3g kappa; equal hybrid linewidths", sep_hz / 1e3, sep_kappa));
}

// --- 3: onset of the resolved doublet as drive power grows ------------------

bool doublet_resolved(const device::DeviceParams& p, double n_d) {
    const auto drive = response::DriveConfig::from_photon_number(p.omega_c - p.Omega_m, n_d, p);
    const auto spectrum =
        response::evaluate(response::linear_grid(p.omega_c, rad_from_hz(2.5e6), 4001), drive, p);
    const auto minima = response::find_minima(spectrum);
    if (minima.size() < 2) return false;
    return std::abs(minima[0].omega - minima[1].omega) >= p.kappa;
}

void check_crossover(const device::DeviceParams& p) {
    double lo = std::log10(1e4), hi = std::log10(1e6);
    if (doublet_resolved(p, std::pow(10.0, lo)) || !doublet_resolved(p, std::pow(10.0, hi))) {
        verdict(false, "doublet-onset", "bracketing failed: onset outside [1e4, 1e6]");
        return;
    }
    for (int i = 0; i < 50; ++i) {
        const double mid = 0.5 * (lo + hi);
        (doublet_resolved(p, std::pow(10.0, mid)) ? hi : lo) = mid;
    }
    const double n_star = std::pow(10.0, hi);
    detail(fmt("smallest n_d with minima separation >= kappa: %.4g (window [5e4, 2e5])", n_star));

    const double g = p.g0() * std::sqrt(1e5);
    const double damping_ratio = response::backaction(0.0, g, p).Gamma_m_eff / p.kappa;
    detail(fmt("broadened damping at n_d=1e5: Gamma_eff = %.4g kappa (window [0.5, 1.5])",
               damping_ratio));

    const bool pass =
        n_star >= 5e4 && n_star <= 2e5 && damping_ratio >= 0.5 && damping_ratio <= 1.5;
    verdict(pass, "doublet-onset",
            fmt("onset n_d = %.4g; Gamma_eff(1e5)/kappa = %.3g", n_star, damping_ratio));
}

// --- 4: closed form vs the independent linear-system solve ------------------

void check_oracle(const device::DeviceParams& p) {
    double worst = 0.0;
    for (double delta : {-p.kappa, 0.0, p.kappa}) {
        for (double g : {0.0, 0.1 * p.kappa, p.kappa, 3.0 * p.kappa}) {
            const auto drive =
                response::DriveConfig::from_coupling(p.omega_c - p.Omega_m + delta, g, p);
            for (double w : response::cavity_grid(p, 10.0, 2001)) {
                const auto solved = oracle::sideband_linear_solve(w, drive, p);
                const auto closed = response::dressed_transmission(w, drive, p);
                const double scale = std::max(std::abs(solved), 1e-12);
                worst = std::max(worst, std::abs(closed.real() - solved.real()) / scale);
                worst = std::max(worst, std::abs(closed.imag() - solved.imag()) / scale);
            }
        }
    }
    detail(fmt("max per-quadrature relative deviation over 12 drive configs x 2001 points: %.3e",
               worst));
    verdict(worst <= 1e-6, "independent-solve",
            fmt("max deviation %.3e <= 1e-6 (closed form vs linear solve)", worst));
}

// --- 5: backaction read off the isolated response feature -------------------

void check_feature_extraction(const device::DeviceParams& p) {
    const double g = p.kappa / 20.0;
    double worst_center = 0.0, worst_fwhm = 0.0;
    for (double delta : {0.0, -p.kappa / 2.0, p.kappa / 2.0}) {
        const auto drive = response::DriveConfig::from_coupling(p.omega_c - p.Omega_m + delta, g, p);
        const auto measured = harness::measure_response_feature(p, drive);
        const auto expected = response::backaction(delta, g, p);
        const double ce = rel_err(measured.center - drive.omega_d, expected.Omega_m_eff);
        const double fe = rel_err(measured.fwhm, expected.Gamma_m_eff);
        detail(fmt("delta=%+.3g kHz: center rel=%.2e, fwhm rel=%.2e (tol 2e-2 each)",
                   hz_from_rad(delta) / 1e3, ce, fe));
        worst_center = std::max(worst_center, ce);
        worst_fwhm = std::max(worst_fwhm, fe);
    }
    verdict(worst_center <= 0.02 && worst_fwhm <= 0.02, "feature-extraction",
            fmt("worst center rel %.2e, worst fwhm rel %.2e vs closed-form backaction",
                worst_center, worst_fwhm));
}

// --- 6: synthesize -> fit closure, noiseless and under noise ----------------

void check_roundtrip(const device::DeviceParams& p) {
    bool pass = true;

    // Noiseless: every extracted parameter lands within 1e-6 of its input.
    double worst = 0.0;
    const auto grid = response::linear_grid(p.omega_c, rad_from_hz(2.5e6), 2001);
    {
        const auto bare = response::evaluate(
            grid, response::DriveConfig::from_photon_number(p.omega_c - p.Omega_m, 0.0, p), p);
        const auto r = fitting::fit_cavity(bare);
        worst = std::max(worst, rel_err(r.estimate("omega_c"), p.omega_c));
        worst = std::max(worst, rel_err(r.estimate("kappa"), p.kappa));
        worst = std::max(worst, rel_err(r.estimate("kappa_ex"), p.kappa_ex));
    }
    const auto truth_drive = response::DriveConfig::from_photon_number(p.omega_c - p.Omega_m, 1e4, p);
    {
        auto biased = truth_drive;
        biased.g *= 1.2;
        const auto r =
            fitting::fit_coupling(response::evaluate(grid, truth_drive, p), p, biased);
        worst = std::max(worst, rel_err(r.estimate("g"), truth_drive.g));
    }
    {
        std::vector<fitting::SqrtLawPoint> points;
        for (double n : {1e2, 1e3, 1e4, 1e5, 1e6})
            points.push_back({n, p.g0() * std::sqrt(n)});
        worst = std::max(worst, rel_err(fitting::fit_sqrt_law(points).estimate("g0"), p.g0()));
    }
    double g_err = 0.0;
    {
        const auto sweep =
            harness::detuning_sweep(p, 1e-11, harness::default_delta_grid(p, 61));
        std::vector<fitting::BackactionPoint> points;
        double n_d_ref = 0.0;
        for (const auto& s : sweep) {
            points.push_back({s.delta, s.Omega_m_eff, s.Gamma_m_eff});
            if (std::abs(s.delta) < 1e-6) n_d_ref = s.n_d;
        }
        const auto r = fitting::fit_backaction(points, p, n_d_ref);
        g_err = rel_err(r.estimate("G"), std::abs(p.cavity_pull));
        worst = std::max(worst, g_err);
    }
    detail(fmt("noiseless worst rel error across {omega_c, kappa, kappa_ex, g, g0, G}: %.2e "
               "(tol 1e-6)",
               worst));
    detail(fmt("frequency-pull recovery from the detuning sweep: rel %.2e (tol 1e-2)", g_err));
    pass = pass && worst <= 1e-6 && g_err <= 0.01;

    // Noisy: 3-sigma coverage over 100 seeded realizations at sigma = 0.01.
    int covered = 0;
    for (std::uint64_t trial = 0; trial < 100; ++trial) {
        bool ok = true;
        {
            const auto bare = response::evaluate(
                grid, response::DriveConfig::from_photon_number(p.omega_c - p.Omega_m, 0.0, p), p);
            const auto noisy = harness::inject_noise(bare, {0.01, trial + 1});
            const auto r = fitting::fit_cavity(noisy);
            ok = ok && r.converged && r.has_std_errors();
            if (ok) {
                ok = ok && std::abs(r.estimate("omega_c") - p.omega_c) <= 3 * r.std_error("omega_c");
                ok = ok && std::abs(r.estimate("kappa") - p.kappa) <= 3 * r.std_error("kappa");
                ok = ok &&
                     std::abs(r.estimate("kappa_ex") - p.kappa_ex) <= 3 * r.std_error("kappa_ex");
            }
        }
        if (ok) {
            const auto noisy = harness::inject_noise(response::evaluate(grid, truth_drive, p),
                                                     {0.01, trial + 1000});
            auto biased = truth_drive;
            biased.g *= 1.1;
            const auto r = fitting::fit_coupling(noisy, p, biased);
            ok = r.converged && r.has_std_errors() &&
                 std::abs(r.estimate("g") - truth_drive.g) <= 3 * r.std_error("g");
        }
        covered += ok ? 1 : 0;
    }
    detail(fmt("noisy trials with all of {omega_c, kappa, kappa_ex, g} inside 3 sigma: %d/100 "
               "(need >= 95)",
               covered));
    pass = pass && covered >= 95;

    verdict(pass, "fit-closure",
            fmt("noiseless worst %.2e; 3-sigma coverage %d/100", worst, covered));
}

// --- 7: undriven notch depth -------------------------------------------------

void check_dip_depth(const device::DeviceParams& p) {
    const double t_min = std::abs(response::bare_transmission(p.omega_c, p));
    const double db = 20.0 * std::log10(t_min);
    detail(fmt("on-resonance |T| = %.6g -> %.4g dB (anchor -12.6 dB, tol 0.5 dB)", t_min, db));
    verdict(std::abs(db - (-12.6)) <= 0.5, "notch-depth", fmt("dip depth %.4g dB", db));
}

// --- 8: byte-level reproducibility through the CLI ---------------------------

void check_determinism() {
    namespace fs = std::filesystem;
    const fs::path dir = fs::path(CAVEM_TEST_SCRATCH) / "acceptance";
    fs::create_directories(dir);
    const std::string out = (dir / "seeded.csv").string();
    const std::string again = (dir / "seeded_again.csv").string();

    auto run_spectrum = [&](const std::string& path) {
        return cli::run({"spectrum", "--params", CAVEM_PARAMS_JSON, "--nd", "1e4", "--points",
                         "301", "--noise-sigma", "0.02", "--seed", "7", "--out", path});
    };

    bool pass = run_spectrum(out) == 0 && run_spectrum(again) == 0;
    const std::string bytes = slurp(out);
    pass = pass && !bytes.empty() && bytes == slurp(again);
    detail(fmt("re-running the identical seeded command: %s", pass ? "byte-identical" : "DIFFERS"));

    bool replay_ok = false;
    if (pass) {
        fs::remove(out);
        replay_ok = cli::run({"replay", out + ".manifest.json"}) == 0 && slurp(out) == bytes;
        detail(fmt("replaying the run manifest after deleting the output: %s",
                   replay_ok ? "byte-identical" : "DIFFERS"));
    }
    verdict(pass && replay_ok, "reproducibility",
            "seeded rerun and manifest replay both reproduce the CSV byte-for-byte");
}

} // namespace

int main() {
    std::printf("acceptance checks, parameter file: %s\n", CAVEM_PARAMS_JSON);
    device::DeviceParams p;
    try {
        p = io::load_device_params(CAVEM_PARAMS_JSON);
    } catch (const std::exception& e) {
        std::printf("FAIL [setup] cannot load parameters: %s\n", e.what());
        return 1;
    }

    check_constants(p);
    check_splitting(p);
    check_crossover(p);
    check_oracle(p);
    check_feature_extraction(p);
    check_roundtrip(p);
    check_dip_depth(p);
    check_determinism();

    std::printf("%d/8 acceptance checks passed\n", 8 - g_failures);
    return g_failures == 0 ? 0 : 1;
}
