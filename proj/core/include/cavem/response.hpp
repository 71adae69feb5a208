#pragma once

#include <complex>
#include <optional>
#include <utility>
#include <vector>

#include "cavem/device_model.hpp"

// Closed-form frequency-domain response models: bare cavity transmission, the
// dressed two-tone transmission with its mechanical susceptibility, dynamical
// backaction (effective mechanical frequency and damping), the thermal
// mechanical sideband, and the rotating-wave normal-mode eigenstructure.
//
// Everything here is a pure function; spectra over a grid may be evaluated in
// any order (or in parallel) with identical results.

namespace cavem::response {

using complex = std::complex<double>;

/// A drive tone: absolute frequency plus the linearized coupling rate it
/// produces. Construct through the factories so that g, n_d and p_in stay
/// mutually consistent with the device parameters.
struct DriveConfig {
    double omega_d = 0.0; // drive angular frequency (rad/s)
    double g = 0.0;       // linearized coupling rate g = g0 sqrt(n_d) (rad/s)
    std::optional<double> n_d;  // drive photon number, when known
    std::optional<double> p_in; // input power (W), when specified

    /// Detuning of the drive from the cavity: Delta = omega_d - omega_c.
    [[nodiscard]] double detuning(const device::DeviceParams& p) const {
        return omega_d - p.omega_c;
    }
    /// Offset of the drive's upper mechanical sideband from the cavity:
    /// delta = (omega_d + Omega_m) - omega_c.
    [[nodiscard]] double relative_detuning(const device::DeviceParams& p) const {
        return (omega_d - p.omega_c) + p.Omega_m;
    }
    /// The dressed-response model is validated for drives near the lower
    /// mechanical sideband; outside |delta| <= kappa results are extrapolation.
    [[nodiscard]] bool within_validated_detuning(const device::DeviceParams& p) const {
        return std::abs(relative_detuning(p)) <= p.kappa;
    }

    /// Drive with an explicit coupling rate; n_d is back-computed when g0 > 0.
    static DriveConfig from_coupling(double omega_d, double g,
                                     const device::DeviceParams& params);
    /// Drive specified by intracavity photon number.
    static DriveConfig from_photon_number(double omega_d, double n_d,
                                          const device::DeviceParams& params);
    /// Drive specified by input power (photon number via the cavity Lorentzian).
    static DriveConfig from_power(double omega_d, double p_in,
                                  const device::DeviceParams& params);
};

/// Ordered probe-frequency grid with complex transmission values and the
/// inputs that produced it.
struct ComplexSpectrum {
    std::vector<double> probe;   // strictly increasing angular frequencies (rad/s)
    std::vector<complex> values; // transmission T per frequency
    std::optional<DriveConfig> drive;
    std::optional<device::DeviceParams> params;

    /// Validates ordering, matching lengths and finiteness; throws on violation.
    void validate() const;
    [[nodiscard]] std::size_t size() const { return probe.size(); }
};

/// Eigenstructure of the rotating-wave coupled-mode matrix
/// [[j Delta - kappa/2, j g], [j g, -j Omega_m - Gamma_m/2]].
struct NormalModes {
    complex lambda_plus;  // amplitude-decay eigenvalue, larger Im
    complex lambda_minus; // amplitude-decay eigenvalue, smaller Im
    double splitting = 0.0;                 // |Im(l+) - Im(l-)| (rad/s)
    std::pair<double, double> linewidths{}; // intensity rates 2|Re(l±)| (rad/s)
};

/// Bare (undriven) cavity transmission T = 1 - kappa_ex / (kappa + 2j (omega_p - omega_c)).
[[nodiscard]] complex bare_transmission(double omega_p, const device::DeviceParams& params);

/// Mechanical susceptibility entering the dressed response:
/// chi = 4 g^2 Omega_m / { [kappa + 2j(omega_p - 2 omega_d + omega_c)]
///                        * [Omega_m^2 - (omega_p - omega_d)^2 + j (omega_p - omega_d) Gamma_m] }.
/// The first bracket is the idler response (probe mirrored about the drive);
/// the second is the mechanical resonance at the probe-drive beat.
[[nodiscard]] complex chi(double omega_p, double omega_d, double g,
                          const device::DeviceParams& params);

/// Dressed two-tone transmission
/// T = 1 - kappa_ex (1 - j chi) / [kappa + 2j(omega_p - omega_c) + 4 chi (omega_d - omega_c)].
/// Reduces bit-exactly to bare_transmission when g = 0.
[[nodiscard]] complex dressed_transmission(double omega_p, const DriveConfig& drive,
                                           const device::DeviceParams& params);

/// Dynamical backaction at relative detuning delta = (omega_d + Omega_m) - omega_c:
///   Omega_m_eff = Omega_m + 4 g^2 delta / (kappa^2 + 4 delta^2)
///   Gamma_m_eff = Gamma_m + 4 g^2 kappa / (kappa^2 + 4 delta^2)
/// Valid deep in the resolved-sideband regime; warns (once per process) when
/// Omega_m / kappa < 10.
struct Backaction {
    double Omega_m_eff = 0.0; // rad/s
    double Gamma_m_eff = 0.0; // rad/s
};
[[nodiscard]] Backaction backaction(double delta, double g, const device::DeviceParams& params);

/// Rotating-wave normal modes for a drive near the lower sideband.
/// At delta = 0 the eigenvalues are -j Omega_m - (kappa+Gamma_m)/4 ± sqrt((kappa-Gamma_m)^2/16 - g^2);
/// the splitting threshold is g* = |kappa - Gamma_m| / 4.
[[nodiscard]] NormalModes normal_modes(const DriveConfig& drive, const device::DeviceParams& params);

/// Thermally driven mechanical sideband power density at offset `omega` from
/// the drive tone: a pair of Lorentzians centered at ±Omega_m_eff with FWHM
/// Gamma_m_eff, each of integrated area n_mech * scale.
[[nodiscard]] double thermal_sideband(double omega, double Omega_m_eff, double Gamma_m_eff,
                                      double n_mech, double scale);

/// Analytic integral of one thermal-sideband Lorentzian over
/// [center - half_window, center + half_window] (the window that a numerical
/// integration of the sampled curve covers; the tails outside any finite
/// window carry a few tenths of a percent and must be compared like for like).
[[nodiscard]] double thermal_sideband_window_area(double Gamma_m_eff, double n_mech,
                                                  double scale, double half_window);

/// Linear probe grid centered on the cavity spanning ±span_half (rad/s).
[[nodiscard]] std::vector<double> linear_grid(double center, double span_half, std::size_t points);

/// Convenience cavity-centered grid spanning ±n_linewidths * kappa, default 10 kappa / 2001 pts.
[[nodiscard]] std::vector<double> cavity_grid(const device::DeviceParams& params,
                                              double n_linewidths = 10.0,
                                              std::size_t points = 2001);

/// Evaluate the dressed model over a grid.
[[nodiscard]] ComplexSpectrum evaluate(const std::vector<double>& grid, const DriveConfig& drive,
                                       const device::DeviceParams& params);

/// Locations of local minima of |T| on a sampled spectrum, refined by parabolic
/// interpolation of the three bracketing samples. Ordered by depth
/// (deepest first).
struct SpectrumMinimum {
    double omega = 0.0; // rad/s
    double value = 0.0; // |T| at the minimum (interpolated)
};
[[nodiscard]] std::vector<SpectrumMinimum> find_minima(const ComplexSpectrum& spectrum);

} // namespace cavem::response
