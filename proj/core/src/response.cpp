#include "cavem/response.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <stdexcept>

#include "cavem/constants.hpp"

namespace cavem::response {

using device::DeviceParams;

DriveConfig DriveConfig::from_coupling(double omega_d, double g, const DeviceParams& params) {
    if (g < 0.0) throw std::domain_error("DriveConfig: coupling rate must be nonnegative");
    DriveConfig d;
    d.omega_d = omega_d;
    d.g = g;
    const double g0 = params.g0();
    if (g0 > 0.0) d.n_d = (g / g0) * (g / g0);
    return d;
}

DriveConfig DriveConfig::from_photon_number(double omega_d, double n_d,
                                            const DeviceParams& params) {
    DriveConfig d;
    d.omega_d = omega_d;
    d.g = device::pumped_coupling(params.g0(), n_d);
    d.n_d = n_d;
    return d;
}

DriveConfig DriveConfig::from_power(double omega_d, double p_in, const DeviceParams& params) {
    DriveConfig d;
    d.omega_d = omega_d;
    d.p_in = p_in;
    const double n_d = device::drive_photon_number(p_in, omega_d, omega_d - params.omega_c,
                                                   params.kappa, params.kappa_ex);
    d.n_d = n_d;
    d.g = device::pumped_coupling(params.g0(), n_d);
    return d;
}

void ComplexSpectrum::validate() const {
    if (probe.size() != values.size())
        throw std::invalid_argument("ComplexSpectrum: probe/value length mismatch");
    if (probe.size() < 2) throw std::invalid_argument("ComplexSpectrum: need at least 2 points");
    for (std::size_t i = 0; i < probe.size(); ++i) {
        if (!std::isfinite(probe[i]) || !std::isfinite(values[i].real()) ||
            !std::isfinite(values[i].imag()))
            throw std::invalid_argument("ComplexSpectrum: non-finite entry");
        if (i > 0 && !(probe[i] > probe[i - 1]))
            throw std::invalid_argument("ComplexSpectrum: probe grid must be strictly increasing");
    }
}

complex bare_transmission(double omega_p, const DeviceParams& params) {
    const double dpc = omega_p - params.omega_c;
    return 1.0 - params.kappa_ex / complex(params.kappa, 2.0 * dpc);
}

complex chi(double omega_p, double omega_d, double g, const DeviceParams& params) {
    // Frequency differences are formed before any multiplication so the
    // GHz-scale absolute frequencies never meet the kHz-scale rates.
    const double beat = omega_p - omega_d;               // probe-drive beat
    const double idler = beat - (omega_d - params.omega_c); // omega_p - 2 omega_d + omega_c
    const complex idler_response(params.kappa, 2.0 * idler);
    const complex mech(params.Omega_m * params.Omega_m - beat * beat, beat * params.Gamma_m);
    return 4.0 * g * g * params.Omega_m / (idler_response * mech);
}

complex dressed_transmission(double omega_p, const DriveConfig& drive,
                             const DeviceParams& params) {
    if (drive.g == 0.0) return bare_transmission(omega_p, params); // bit-exact reduction
    const complex x = chi(omega_p, drive.omega_d, drive.g, params);
    const double dpc = omega_p - params.omega_c;
    const double ddc = drive.omega_d - params.omega_c;
    return 1.0 - params.kappa_ex * (1.0 - complex(0.0, 1.0) * x) /
                     (complex(params.kappa, 2.0 * dpc) + 4.0 * x * ddc);
}

Backaction backaction(double delta, double g, const DeviceParams& params) {
    if (params.Omega_m / params.kappa < 10.0) {
        static std::once_flag warned;
        std::call_once(warned, [] {
            std::fputs("cavem: warning: backaction formulas assume a deeply resolved-sideband "
                       "device (Omega_m/kappa >= 10); results outside that regime are "
                       "extrapolation\n",
                       stderr);
        });
    }
    const double lorentz = params.kappa * params.kappa + 4.0 * delta * delta;
    Backaction b;
    b.Omega_m_eff = params.Omega_m + 4.0 * g * g * delta / lorentz;
    b.Gamma_m_eff = params.Gamma_m + 4.0 * g * g * params.kappa / lorentz;
    return b;
}

NormalModes normal_modes(const DriveConfig& drive, const DeviceParams& params) {
    // Rotating-wave 2x2 coupled-mode matrix; exact closed-form eigenvalues.
    const complex j(0.0, 1.0);
    const double Delta = drive.omega_d - params.omega_c;
    const complex a = j * Delta - params.kappa / 2.0;            // cavity pole
    const complex b = -j * params.Omega_m - params.Gamma_m / 2.0; // mechanical pole
    const complex avg = 0.5 * (a + b);
    const complex diff = 0.5 * (a - b);
    const complex root = std::sqrt(diff * diff - drive.g * drive.g);
    complex lp = avg + root;
    complex lm = avg - root;
    if (lp.imag() < lm.imag()) std::swap(lp, lm);
    NormalModes nm;
    nm.lambda_plus = lp;
    nm.lambda_minus = lm;
    nm.splitting = std::abs(lp.imag() - lm.imag());
    nm.linewidths = {2.0 * std::abs(lp.real()), 2.0 * std::abs(lm.real())};
    return nm;
}

double thermal_sideband(double omega, double Omega_m_eff, double Gamma_m_eff, double n_mech,
                        double scale) {
    if (Gamma_m_eff <= 0.0) throw std::domain_error("thermal_sideband: Gamma_m_eff must be positive");
    const double hwhm = Gamma_m_eff / 2.0;
    auto lorentz = [&](double x) {
        // unit-area Lorentzian with FWHM Gamma_m_eff
        return (hwhm / std::numbers::pi) / (x * x + hwhm * hwhm);
    };
    return n_mech * scale * (lorentz(omega - Omega_m_eff) + lorentz(omega + Omega_m_eff));
}

double thermal_sideband_window_area(double Gamma_m_eff, double n_mech, double scale,
                                    double half_window) {
    const double hwhm = Gamma_m_eff / 2.0;
    return n_mech * scale * (2.0 / std::numbers::pi) * std::atan(half_window / hwhm);
}

std::vector<double> linear_grid(double center, double span_half, std::size_t points) {
    if (points < 2) throw std::invalid_argument("linear_grid: need at least 2 points");
    std::vector<double> grid(points);
    const double step = 2.0 * span_half / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i)
        grid[i] = center - span_half + step * static_cast<double>(i);
    return grid;
}

std::vector<double> cavity_grid(const DeviceParams& params, double n_linewidths,
                                std::size_t points) {
    return linear_grid(params.omega_c, n_linewidths * params.kappa, points);
}

ComplexSpectrum evaluate(const std::vector<double>& grid, const DriveConfig& drive,
                         const DeviceParams& params) {
    ComplexSpectrum s;
    s.probe = grid;
    s.values.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        s.values[i] = dressed_transmission(grid[i], drive, params);
    s.drive = drive;
    s.params = params;
    return s;
}

std::vector<SpectrumMinimum> find_minima(const ComplexSpectrum& spectrum) {
    spectrum.validate();
    const auto& w = spectrum.probe;
    std::vector<double> mag(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) mag[i] = std::abs(spectrum.values[i]);

    std::vector<SpectrumMinimum> minima;
    for (std::size_t i = 1; i + 1 < w.size(); ++i) {
        if (!(mag[i] < mag[i - 1] && mag[i] < mag[i + 1])) continue;
        // Parabolic refinement through the three bracketing samples.
        const double a = mag[i - 1], b = mag[i], c = mag[i + 1];
        const double denom = a - 2.0 * b + c;
        const double shift = denom > 0.0 ? 0.5 * (a - c) / denom : 0.0;
        const double h = w[i + 1] - w[i];
        SpectrumMinimum m;
        m.omega = w[i] + shift * h;
        m.value = b - 0.25 * (a - c) * shift;
        minima.push_back(m);
    }
    std::sort(minima.begin(), minima.end(),
              [](const SpectrumMinimum& x, const SpectrumMinimum& y) { return x.value < y.value; });
    return minima;
}

} // namespace cavem::response
