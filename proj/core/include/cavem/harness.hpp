#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "cavem/device_model.hpp"
#include "cavem/fit.hpp"
#include "cavem/response.hpp"

// End-to-end synthetic experiments: probe sweeps at fixed drive, drive-power
// sweeps with per-point coupling extraction, backaction detuning sweeps,
// two-tone drive/probe maps, and reproducible noise injection.
//
// Determinism contract: every result is a pure function of (params, drive
// spec, grid, seed). Noise is derived per point from (seed, point index), so
// parallel or reordered evaluation cannot change a realization.

namespace cavem::harness {

using response::ComplexSpectrum;
using response::DriveConfig;

/// Additive complex white noise: independent Gaussian of standard deviation
/// `sigma` on each quadrature of T, per point.
struct NoiseModel {
    double sigma = 0.0;
    std::uint64_t seed = 0;
};

/// Deterministic standard-normal pair for (seed, index); the basis of every
/// noise realization in the library.
[[nodiscard]] std::pair<double, double> gaussian_pair(std::uint64_t seed, std::uint64_t index);

/// Returns a copy of the spectrum with noise applied (identity for sigma = 0).
[[nodiscard]] ComplexSpectrum inject_noise(const ComplexSpectrum& spectrum,
                                           const NoiseModel& model);

/// Dressed-transmission sweep over a probe grid, with optional noise.
[[nodiscard]] ComplexSpectrum probe_sweep(const device::DeviceParams& params,
                                          const DriveConfig& drive,
                                          const std::vector<double>& grid,
                                          const std::optional<NoiseModel>& noise = {});

/// Coupling specification for sweeps where omega_d varies: the drive strength
/// is pinned by one of coupling rate, photon number, or input power.
struct CouplingSpec {
    enum class Kind { coupling_rate, photon_number, input_power };
    Kind kind = Kind::photon_number;
    double value = 0.0;

    [[nodiscard]] DriveConfig drive_at(double omega_d, const device::DeviceParams& params) const;

    static CouplingSpec coupling_rate(double g);
    static CouplingSpec photon_number(double n_d);
    static CouplingSpec input_power(double watts);
};

struct PowerSweepPoint {
    double n_d = 0.0;
    double g_true = 0.0;             // coupling implied by params (rad/s)
    ComplexSpectrum spectrum;        // synthesized (possibly noisy) spectrum
    fitting::FitResult coupling_fit; // per-point g extraction
    bool fit_ok = false;
};

struct PowerSweepResult {
    std::vector<PowerSweepPoint> points;
    fitting::FitResult sqrt_law; // g0 from the fitted g values
    bool sqrt_law_ok = false;
};

/// Drive-power (photon-number) sweep at fixed drive frequency: per-point
/// spectrum synthesis and coupling-rate fit, then the sqrt(n_d) law for g0.
/// Individual fit failures are recorded and skipped, never fatal.
[[nodiscard]] PowerSweepResult power_sweep(const device::DeviceParams& params, double omega_d,
                                           const std::vector<double>& n_d_list,
                                           const std::vector<double>& grid,
                                           const std::optional<NoiseModel>& noise = {});

struct DetuningSweepPoint {
    double delta = 0.0; // (omega_d + Omega_m) - omega_c (rad/s)
    double n_d = 0.0;
    double g = 0.0;
    double Omega_m_eff = 0.0; // backaction closed form (rad/s)
    double Gamma_m_eff = 0.0; // backaction closed form (rad/s)
    // Cross-check extraction from the dressed spectrum's isolated response
    // feature, when requested: center offset from drive, and FWHM.
    std::optional<double> extracted_center;
    std::optional<double> extracted_fwhm;
};

struct DetuningSweepOptions {
    bool extract_from_spectra = false; // also measure the feature numerically
    std::size_t feature_points = 20001;
    double feature_halfwidths = 60.0; // grid half-span in units of Gamma_m_eff
};

/// Constant-input-power detuning sweep: per-delta photon number, coupling and
/// backaction prediction, optionally cross-checked against spectra.
[[nodiscard]] std::vector<DetuningSweepPoint> detuning_sweep(
    const device::DeviceParams& params, double p_in, const std::vector<double>& delta_grid,
    const DetuningSweepOptions& options = {});

/// Isolated dressed-response feature |T_dressed - T_bare|^2 around the
/// backaction-predicted center, fitted as a Lorentzian. The squared complex
/// difference is an exact Lorentzian of FWHM Gamma_m_eff up to slow-envelope
/// corrections; extracting the width from |T| alone is badly biased by
/// interference with the cavity background.
struct FeatureMeasurement {
    double center = 0.0; // rad/s, absolute probe frequency of the peak
    double fwhm = 0.0;   // rad/s
};
[[nodiscard]] FeatureMeasurement measure_response_feature(const device::DeviceParams& params,
                                                          const DriveConfig& drive,
                                                          std::size_t points = 20001,
                                                          double halfwidths = 60.0);

struct TwoToneMap {
    std::vector<double> drive_freqs; // rad/s
    std::vector<double> probe_freqs; // rad/s
    std::vector<double> mag_db;      // row-major [drive][probe], 20*log10|T|
    [[nodiscard]] double at(std::size_t i_drive, std::size_t i_probe) const {
        return mag_db[i_drive * probe_freqs.size() + i_probe];
    }
};

/// Two-tone drive/probe magnitude map in dB.
[[nodiscard]] TwoToneMap two_tone_map(const device::DeviceParams& params,
                                      const std::vector<double>& omega_d_grid,
                                      const std::vector<double>& omega_p_grid,
                                      const CouplingSpec& coupling,
                                      const std::optional<NoiseModel>& noise = {});

/// Default grids mirroring the measurement layouts: probe span ±2.5 MHz around
/// the cavity, backaction detuning span ±600 kHz, drive span ±300 kHz around
/// the lower sideband with ±2 MHz probe span.
[[nodiscard]] std::vector<double> default_probe_grid(const device::DeviceParams& params,
                                                     std::size_t points = 2001);
[[nodiscard]] std::vector<double> default_delta_grid(const device::DeviceParams& params,
                                                     std::size_t points = 121);
[[nodiscard]] std::vector<double> default_drive_grid(const device::DeviceParams& params,
                                                     std::size_t points = 121);
[[nodiscard]] std::vector<double> default_map_probe_grid(const device::DeviceParams& params,
                                                         std::size_t points = 801);

} // namespace cavem::harness
