#pragma once

#include <string>

// Static device description of a parametrically coupled microwave cavity /
// mechanical oscillator, plus every closed-form quantity derived from it:
// zero-point motion, parallel-plate frequency pull, LC resonance, coupling
// rates, drive photon number, thermal occupancies and figure-of-merit rates.
//
// All functions are pure; DeviceParams is immutable after validation and safe
// to share across threads.

namespace cavem::device {

struct DeviceParams {
    double omega_c = 0.0;     // cavity angular frequency (rad/s)
    double kappa = 0.0;       // loaded intensity decay rate (rad/s)
    double kappa_ex = 0.0;    // external coupling rate (rad/s)
    double kappa_0 = 0.0;     // intrinsic cavity loss rate (rad/s)
    double Omega_m = 0.0;     // mechanical angular frequency (rad/s)
    double Gamma_m = 0.0;     // intrinsic mechanical decay rate (rad/s)
    double mass = 0.0;        // effective mass (kg)
    double gap = 0.0;         // capacitor plate separation (m)
    double inductance = 0.0;  // H
    double capacitance = 0.0; // F
    double eta = 1.0;         // capacitive participation fraction, 0 < eta <= 1
    double temperature = 0.0; // bath temperature (K)
    double cavity_pull = 0.0; // G = d(omega_c)/dx (rad/s per m), signed

    /// Validates field ranges and the decay-rate budget kappa = kappa_ex + kappa_0
    /// (relative tolerance 1e-12). Throws std::invalid_argument on violation.
    void validate() const;

    /// Ratio Omega_m / kappa; the resolved-sideband condition is ratio > 1 and is
    /// always computed from the fields, never assumed.
    [[nodiscard]] double sideband_ratio() const { return Omega_m / kappa; }
    [[nodiscard]] bool resolved_sideband() const { return sideband_ratio() > 1.0; }

    [[nodiscard]] double x_zp() const;                 // zero-point motion (m)
    [[nodiscard]] double g0() const;                   // single-drive-photon coupling (rad/s)
    [[nodiscard]] double cooperativity(double g) const; // C = 4 g^2 / (kappa Gamma_m)
};

struct FiguresOfMerit {
    double q_mechanical = 0.0;  // Omega_m / Gamma_m
    double sideband_ratio = 0.0; // Omega_m / kappa
    double cooling_factor = 0.0; // kappa / Gamma_m
    double n_cavity = 0.0;      // thermal cavity occupancy
    double n_mech = 0.0;        // thermal mechanical occupancy
    double gamma_th = 0.0;      // thermal decoherence rate n_mech * Gamma_m (rad/s)
    double group_delay = 0.0;   // 1 / Gamma_m (s)
    double storage_time = 0.0;  // 1 / gamma_th (s)
    double x_zp = 0.0;          // m
    double g0 = 0.0;            // rad/s
};

/// sqrt(hbar / (2 m Omega_m)). Throws std::domain_error on non-positive input.
[[nodiscard]] double zero_point_motion(double mass, double Omega_m);

/// Parallel-plate cavity pull G = -eta * omega_c / (2 gap), signed (the cavity
/// softens as the gap shrinks). Throws std::domain_error on invalid gap/eta.
[[nodiscard]] double parallel_plate_pull(double omega_c, double gap, double eta);

/// 1 / sqrt(L C). Throws std::domain_error on non-positive input.
[[nodiscard]] double lc_resonance(double inductance, double capacitance);

/// g0 = |G| * x_zp (magnitude convention; the sign of G lives in DeviceParams).
[[nodiscard]] double single_photon_coupling(double cavity_pull, double x_zp);

/// g = g0 * sqrt(n_d). Throws std::domain_error for n_d < 0.
[[nodiscard]] double pumped_coupling(double g0, double n_d);

/// Intracavity drive photon number n_d = 2 P_in kappa_ex / (hbar omega_d (kappa^2 + 4 Delta^2)),
/// with detuning Delta = omega_d - omega_c. Throws std::domain_error for
/// omega_d <= 0 or negative power.
[[nodiscard]] double drive_photon_number(double p_in, double omega_d, double detuning,
                                         double kappa, double kappa_ex);

/// Bose-Einstein occupancy 1/(exp(hbar omega / kB T) - 1); exactly 0 at T = 0.
/// Throws std::domain_error for omega <= 0 or T < 0.
[[nodiscard]] double thermal_occupancy(double omega, double temperature);

/// All derived figures for a validated parameter set.
[[nodiscard]] FiguresOfMerit figures_of_merit(const DeviceParams& params);

} // namespace cavem::device
