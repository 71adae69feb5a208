#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cavem/device_model.hpp"
#include "cavem/harness.hpp"
#include "cavem/response.hpp"

// File formats: JSON parameter files, CSV spectrum / sweep / map serialization,
// and the run manifest written alongside every output.
//
// All on-disk frequencies are ordinary frequencies in Hz; the rad/s conversion
// happens exactly once at this boundary. Numbers are printed with 17
// significant digits so every double round-trips the text exactly; the
// *_Record types mirror the file columns verbatim, making
// parse(serialize(record)) == record bit-exact.

namespace cavem::io {

using complex = std::complex<double>;

/// Loads a device parameter file. Keys (all required unless noted):
/// f_cavity_hz, kappa_hz, kappa_ext_hz, kappa_int_hz, f_mech_hz, gamma_m_hz,
/// mass_kg, gap_m, inductance_h, capacitance_f, eta, temperature_k,
/// cavity_pull_hz_per_m (optional; derived from the plate geometry when
/// absent). Unknown keys are an error naming the key. Throws std::runtime_error
/// with a diagnostic message; the result is validated before return.
[[nodiscard]] device::DeviceParams load_device_params(const std::string& path);

/// Writes the parameter file (all keys, including the resolved cavity pull).
void save_device_params(const std::string& path, const device::DeviceParams& params);

/// File-domain spectrum: columns probe_freq_hz, re_t, im_t, mag_db, phase_rad.
struct SpectrumRecord {
    std::vector<double> freq_hz;
    std::vector<complex> t;

    [[nodiscard]] static SpectrumRecord from_spectrum(const response::ComplexSpectrum& s);
    [[nodiscard]] response::ComplexSpectrum to_spectrum() const;
};
void write_spectrum_csv(const std::string& path, const SpectrumRecord& record);
void write_spectrum_csv(const std::string& path, const response::ComplexSpectrum& spectrum);
[[nodiscard]] SpectrumRecord read_spectrum_csv(const std::string& path);

/// Long-form two-tone map: columns drive_freq_hz, probe_freq_hz, mag_db.
struct MapRecord {
    std::vector<double> drive_freq_hz; // one entry per row
    std::vector<double> probe_freq_hz;
    std::vector<double> mag_db;

    [[nodiscard]] static MapRecord from_map(const harness::TwoToneMap& map);
};
void write_map_csv(const std::string& path, const MapRecord& record);
[[nodiscard]] MapRecord read_map_csv(const std::string& path);

/// Backaction detuning sweep: columns delta_hz, n_d, g_hz, f_mech_eff_hz,
/// gamma_m_eff_hz (+ extracted_center_hz, extracted_fwhm_hz when measured).
struct DetuningSweepRecord {
    std::vector<harness::DetuningSweepPoint> points; // rad/s internally
    bool has_extraction = false;
};
void write_detuning_csv(const std::string& path, const DetuningSweepRecord& record);
[[nodiscard]] DetuningSweepRecord read_detuning_csv(const std::string& path);

/// Generic two-column real table with a verbatim header, used for scalar data
/// such as mechanical noise-power spectra (freq_hz, power).
struct XyRecord {
    std::string x_name = "x";
    std::string y_name = "y";
    std::vector<double> x;
    std::vector<double> y;
};
void write_xy_csv(const std::string& path, const XyRecord& record);
[[nodiscard]] XyRecord read_xy_csv(const std::string& path);

/// Power sweep summary: columns n_d, g_true_hz, g_fit_hz, converged.
struct PowerSweepRecord {
    std::vector<double> n_d;
    std::vector<double> g_true_hz;
    std::vector<double> g_fit_hz; // NaN when the per-point fit failed
    std::vector<bool> converged;
};
void write_power_sweep_csv(const std::string& path, const PowerSweepRecord& record);
[[nodiscard]] PowerSweepRecord read_power_sweep_csv(const std::string& path);

/// Run manifest written next to every output; re-running `argv` with the same
/// tool version reproduces the outputs byte-exactly.
struct RunManifest {
    std::string tool_version;
    std::string subcommand;
    std::uint64_t seed = 0;
    std::vector<std::string> argv; // exact command line, program name omitted
    std::map<std::string, std::string> resolved; // human-readable settings
    std::vector<std::string> outputs;            // files this run wrote
};
void write_manifest(const std::string& path, const RunManifest& manifest);
[[nodiscard]] RunManifest read_manifest(const std::string& path);

/// 17-significant-digit formatting used for every numeric CSV/JSON field.
[[nodiscard]] std::string format_double(double v);

/// Human- and machine-readable figure-of-merit reports.
[[nodiscard]] std::string format_figures_table(const device::DeviceParams& params,
                                               const device::FiguresOfMerit& fom);
[[nodiscard]] std::string format_figures_json(const device::DeviceParams& params,
                                              const device::FiguresOfMerit& fom);

} // namespace cavem::io
