#pragma once

#include <complex>
#include <vector>

#include "cavem/device_model.hpp"
#include "cavem/response.hpp"

// Independent verification of the closed-form dressed transmission: the
// linearized coupled-mode equations are solved directly, by frequency-domain
// harmonic balance over the full quadrature basis and by explicit time-domain
// integration. Neither path shares code with response::dressed_transmission.

namespace cavem::oracle {

using complex = std::complex<double>;

/// Steady-state response amplitudes in the drive rotating frame for a probe at
/// beat frequency omega_p - omega_d: the probe-frequency cavity amplitude, the
/// idler (probe mirrored about the drive, stored conjugated), and the two
/// mechanical quadrature amplitudes at the beat.
struct SidebandBasis {
    complex probe;
    complex idler_conj;
    complex beat;
    complex beat_conj;
    double residual = 0.0; // relative back-substitution residual of the solve
};

/// Harmonic-balance solve of the linearized quadrature equations; returns the
/// probe transmission via the input-output relation. Agrees with
/// response::dressed_transmission to the documented floor (~1e-8); the
/// agreement is asserted, not assumed.
/// Throws std::runtime_error if the linear system is effectively singular
/// (possible only for kappa = 0 or Gamma_m = 0).
[[nodiscard]] complex sideband_linear_solve(double omega_p, const response::DriveConfig& drive,
                                            const device::DeviceParams& params);

/// Same solve, also exposing the response amplitudes and solve residual.
[[nodiscard]] SidebandBasis sideband_basis(double omega_p, const response::DriveConfig& drive,
                                           const device::DeviceParams& params);

/// Ablation: the rotating-wave two-mode truncation (probe and lower mechanical
/// quadrature only; idler and counter-rotating rows dropped). Deviates from the
/// full solve at first order in kappa/Omega_m — evidence for why the full
/// susceptibility keeps the idler response in its denominator.
[[nodiscard]] complex two_mode_transmission(double omega_p, const response::DriveConfig& drive,
                                            const device::DeviceParams& params);

/// Sampled free evolution of the coupled quadrature equations (no probe).
struct TimeTrace {
    double dt = 0.0;       // s
    double duration = 0.0; // s
    std::vector<double> t;
    std::vector<complex> cavity;     // a(t) in the drive frame
    std::vector<complex> mechanical; // b(t) in the drive frame

    /// No NaN samples and dt within the integrator's declared stability bound.
    void validate() const;
};

/// Fixed-step RK4 integration of the linearized equations of motion with the
/// drives off, from initial amplitudes (a0, b0). Used for decay-rate checks.
[[nodiscard]] TimeTrace integrate_free_decay(const response::DriveConfig& drive,
                                             const device::DeviceParams& params, complex a0,
                                             complex b0, double duration,
                                             std::size_t samples = 2000);

/// Time-domain cross-check: integrates the probed equations of motion, waits
/// at least ten amplitude-decay times of the slowest hybrid mode, then
/// demodulates the cavity output at the probe frequency over `cycles` beat
/// periods. Throws std::runtime_error when consecutive demodulation windows
/// still drift by more than 1e-4 relative (non-convergent steady state).
/// Intended for desk-scaled parameters; the step bound pins
/// dt = (2*pi / (2*Omega_m)) / 50 and the caller keeps total steps sane.
[[nodiscard]] complex time_domain_transmission(double omega_p, const response::DriveConfig& drive,
                                               const device::DeviceParams& params,
                                               std::size_t cycles = 10);

} // namespace cavem::oracle
