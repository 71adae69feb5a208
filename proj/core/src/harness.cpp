#include "cavem/harness.hpp"

#include <cmath>
#include <stdexcept>

#include "cavem/constants.hpp"

namespace cavem::harness {

using device::DeviceParams;

namespace {

// splitmix64: tiny, stateless, and bit-stable everywhere — the properties the
// reproducibility contract needs (std engines are sequential and their normal
// variates are not specified bit-exactly).
std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

double uniform01(std::uint64_t h) {
    return static_cast<double>(h >> 11) * 0x1.0p-53; // [0, 1)
}

} // namespace

std::pair<double, double> gaussian_pair(std::uint64_t seed, std::uint64_t index) {
    const std::uint64_t base = splitmix64(seed ^ splitmix64(index));
    const double u = uniform01(splitmix64(base));
    const double v = uniform01(splitmix64(base + 0x9E3779B97F4A7C15ull));
    // Box-Muller; 1-u keeps the log argument in (0, 1].
    const double r = std::sqrt(-2.0 * std::log(1.0 - u));
    const double theta = constants::two_pi * v;
    return {r * std::cos(theta), r * std::sin(theta)};
}

ComplexSpectrum inject_noise(const ComplexSpectrum& spectrum, const NoiseModel& model) {
    if (model.sigma < 0.0) throw std::domain_error("inject_noise: sigma must be nonnegative");
    ComplexSpectrum out = spectrum;
    if (model.sigma == 0.0) return out;
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        const auto [re, im] = gaussian_pair(model.seed, static_cast<std::uint64_t>(i));
        out.values[i] += response::complex(model.sigma * re, model.sigma * im);
    }
    return out;
}

ComplexSpectrum probe_sweep(const DeviceParams& params, const DriveConfig& drive,
                            const std::vector<double>& grid,
                            const std::optional<NoiseModel>& noise) {
    ComplexSpectrum s = response::evaluate(grid, drive, params);
    if (noise) s = inject_noise(s, *noise);
    return s;
}

DriveConfig CouplingSpec::drive_at(double omega_d, const DeviceParams& params) const {
    switch (kind) {
        case Kind::coupling_rate: return DriveConfig::from_coupling(omega_d, value, params);
        case Kind::photon_number: return DriveConfig::from_photon_number(omega_d, value, params);
        case Kind::input_power: return DriveConfig::from_power(omega_d, value, params);
    }
    throw std::logic_error("CouplingSpec: unknown kind");
}

CouplingSpec CouplingSpec::coupling_rate(double g) {
    return {Kind::coupling_rate, g};
}
CouplingSpec CouplingSpec::photon_number(double n_d) {
    return {Kind::photon_number, n_d};
}
CouplingSpec CouplingSpec::input_power(double watts) {
    return {Kind::input_power, watts};
}

PowerSweepResult power_sweep(const DeviceParams& params, double omega_d,
                             const std::vector<double>& n_d_list,
                             const std::vector<double>& grid,
                             const std::optional<NoiseModel>& noise) {
    if (n_d_list.empty()) throw std::invalid_argument("power_sweep: empty n_d list");
    PowerSweepResult result;
    result.points.reserve(n_d_list.size());

    std::vector<fitting::SqrtLawPoint> law_points;
    for (std::size_t k = 0; k < n_d_list.size(); ++k) {
        PowerSweepPoint pt;
        pt.n_d = n_d_list[k];
        DriveConfig drive = DriveConfig::from_photon_number(omega_d, pt.n_d, params);
        pt.g_true = drive.g;

        // Derive a distinct per-point noise stream from the sweep seed.
        std::optional<NoiseModel> point_noise = noise;
        if (point_noise)
            point_noise->seed =
                splitmix64(noise->seed ^ (0xA5A5A5A5A5A5A5A5ull + static_cast<std::uint64_t>(k)));
        pt.spectrum = probe_sweep(params, drive, grid, point_noise);

        try {
            pt.coupling_fit = fitting::fit_coupling(pt.spectrum, params, drive);
            pt.fit_ok = pt.coupling_fit.converged;
        } catch (const std::exception&) {
            pt.fit_ok = false; // recorded, sweep continues
        }
        if (pt.fit_ok)
            law_points.push_back({pt.n_d, pt.coupling_fit.estimate("g")});
        result.points.push_back(std::move(pt));
    }

    try {
        result.sqrt_law = fitting::fit_sqrt_law(law_points);
        result.sqrt_law_ok = true;
    } catch (const std::exception&) {
        result.sqrt_law_ok = false;
    }
    return result;
}

FeatureMeasurement measure_response_feature(const DeviceParams& params, const DriveConfig& drive,
                                            std::size_t points, double halfwidths) {
    const double delta = drive.relative_detuning(params);
    const response::Backaction ba = response::backaction(delta, drive.g, params);
    const double center_guess = drive.omega_d + ba.Omega_m_eff;
    const double span = halfwidths * ba.Gamma_m_eff;

    fitting::Dataset feature;
    feature.x = response::linear_grid(center_guess, span, points);
    feature.y.resize(points);
    for (std::size_t i = 0; i < points; ++i) {
        const response::complex d =
            response::dressed_transmission(feature.x[i], drive, params) -
            response::bare_transmission(feature.x[i], params);
        feature.y[i] = std::norm(d);
    }

    const fitting::FitResult fit = fitting::fit_mechanical(feature);
    if (!fit.converged)
        throw std::runtime_error("measure_response_feature: Lorentzian fit did not converge");
    FeatureMeasurement m;
    m.center = fit.estimate("Omega_m_eff");
    m.fwhm = fit.estimate("Gamma_m_eff");
    return m;
}

std::vector<DetuningSweepPoint> detuning_sweep(const DeviceParams& params, double p_in,
                                               const std::vector<double>& delta_grid,
                                               const DetuningSweepOptions& options) {
    std::vector<DetuningSweepPoint> sweep;
    sweep.reserve(delta_grid.size());
    for (double delta : delta_grid) {
        const double omega_d = params.omega_c - params.Omega_m + delta;
        const DriveConfig drive = DriveConfig::from_power(omega_d, p_in, params);

        DetuningSweepPoint pt;
        pt.delta = delta;
        pt.n_d = drive.n_d.value_or(0.0);
        pt.g = drive.g;
        const response::Backaction ba = response::backaction(delta, drive.g, params);
        pt.Omega_m_eff = ba.Omega_m_eff;
        pt.Gamma_m_eff = ba.Gamma_m_eff;

        if (options.extract_from_spectra) {
            const FeatureMeasurement m = measure_response_feature(
                params, drive, options.feature_points, options.feature_halfwidths);
            pt.extracted_center = m.center - drive.omega_d; // offset from the drive
            pt.extracted_fwhm = m.fwhm;
        }
        sweep.push_back(pt);
    }
    return sweep;
}

TwoToneMap two_tone_map(const DeviceParams& params, const std::vector<double>& omega_d_grid,
                        const std::vector<double>& omega_p_grid, const CouplingSpec& coupling,
                        const std::optional<NoiseModel>& noise) {
    for (std::size_t i = 1; i < omega_d_grid.size(); ++i)
        if (!(omega_d_grid[i] > omega_d_grid[i - 1]))
            throw std::invalid_argument("two_tone_map: drive grid must be strictly increasing");
    for (std::size_t i = 1; i < omega_p_grid.size(); ++i)
        if (!(omega_p_grid[i] > omega_p_grid[i - 1]))
            throw std::invalid_argument("two_tone_map: probe grid must be strictly increasing");

    TwoToneMap map;
    map.drive_freqs = omega_d_grid;
    map.probe_freqs = omega_p_grid;
    map.mag_db.resize(omega_d_grid.size() * omega_p_grid.size());

    for (std::size_t i = 0; i < omega_d_grid.size(); ++i) {
        const DriveConfig drive = coupling.drive_at(omega_d_grid[i], params);
        for (std::size_t k = 0; k < omega_p_grid.size(); ++k) {
            response::complex t = response::dressed_transmission(omega_p_grid[k], drive, params);
            if (noise && noise->sigma > 0.0) {
                const std::uint64_t cell =
                    static_cast<std::uint64_t>(i) * omega_p_grid.size() + k;
                const auto [re, im] = gaussian_pair(noise->seed, cell);
                t += response::complex(noise->sigma * re, noise->sigma * im);
            }
            map.mag_db[i * omega_p_grid.size() + k] = 20.0 * std::log10(std::abs(t));
        }
    }
    return map;
}

std::vector<double> default_probe_grid(const DeviceParams& params, std::size_t points) {
    return response::linear_grid(params.omega_c, constants::rad_from_hz(2.5e6), points);
}

std::vector<double> default_delta_grid(const DeviceParams& params, std::size_t points) {
    (void)params;
    return response::linear_grid(0.0, constants::rad_from_hz(600e3), points);
}

std::vector<double> default_drive_grid(const DeviceParams& params, std::size_t points) {
    return response::linear_grid(params.omega_c - params.Omega_m, constants::rad_from_hz(300e3),
                                 points);
}

std::vector<double> default_map_probe_grid(const DeviceParams& params, std::size_t points) {
    return response::linear_grid(params.omega_c, constants::rad_from_hz(2e6), points);
}

} // namespace cavem::harness
