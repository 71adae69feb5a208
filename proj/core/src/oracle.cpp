#include "cavem/oracle.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "cavem/constants.hpp"

namespace cavem::oracle {

using device::DeviceParams;
using response::DriveConfig;

namespace {

// The solver works in the opposite complex convention from the reported
// spectra (exp(-i w t) time dependence); outputs are conjugated at the end.
constexpr complex j{0.0, 1.0};

struct SolveResult {
    Eigen::Vector4cd x;
    double residual;
};

// Quadrature-basis harmonic balance at beat frequency W = omega_p - omega_d,
// drive detuning D = omega_d - omega_c. Unknowns: cavity amplitude at the
// probe, conjugated cavity amplitude at the idler, and the two mechanical
// quadrature amplitudes at the beat. A unit probe input enters through the
// external port at rate sqrt(kappa_ex/2).
SolveResult solve_full(double omega_p, const DriveConfig& drive, const DeviceParams& params) {
    const double D = drive.omega_d - params.omega_c;
    const double W = omega_p - drive.omega_d;
    const double g = drive.g;

    Eigen::Matrix4cd M;
    M << j * (D + W) - params.kappa / 2.0, 0.0, j * g, j * g,
         0.0, j * (W - D) - params.kappa / 2.0, -j * g, -j * g,
         j * g, j * g, j * (W - params.Omega_m) - params.Gamma_m / 2.0, 0.0,
         -j * g, -j * g, 0.0, j * (W + params.Omega_m) - params.Gamma_m / 2.0;

    Eigen::Vector4cd rhs;
    rhs << -std::sqrt(params.kappa_ex / 2.0), 0.0, 0.0, 0.0;

    SolveResult r;
    r.x = M.partialPivLu().solve(rhs);
    r.residual = (M * r.x - rhs).norm() / rhs.norm();
    if (!std::isfinite(r.residual) || r.residual > 1e-8)
        throw std::runtime_error("sideband_linear_solve: singular coupled-mode system "
                                 "(kappa or Gamma_m vanishing?)");
    return r;
}

} // namespace

SidebandBasis sideband_basis(double omega_p, const DriveConfig& drive,
                             const DeviceParams& params) {
    const SolveResult r = solve_full(omega_p, drive, params);
    SidebandBasis b;
    b.probe = r.x(0);
    b.idler_conj = r.x(1);
    b.beat = r.x(2);
    b.beat_conj = r.x(3);
    b.residual = r.residual;
    return b;
}

complex sideband_linear_solve(double omega_p, const DriveConfig& drive,
                              const DeviceParams& params) {
    const SolveResult r = solve_full(omega_p, drive, params);
    return std::conj(1.0 - std::sqrt(params.kappa_ex / 2.0) * r.x(0));
}

complex two_mode_transmission(double omega_p, const DriveConfig& drive,
                              const DeviceParams& params) {
    const double D = drive.omega_d - params.omega_c;
    const double W = omega_p - drive.omega_d;
    const double g = drive.g;

    Eigen::Matrix2cd M;
    M << j * (D + W) - params.kappa / 2.0, j * g,
         j * g, j * (W - params.Omega_m) - params.Gamma_m / 2.0;
    Eigen::Vector2cd rhs;
    rhs << -std::sqrt(params.kappa_ex / 2.0), 0.0;

    const Eigen::Vector2cd x = M.partialPivLu().solve(rhs);
    if (!x.allFinite())
        throw std::runtime_error("two_mode_transmission: singular truncated system");
    return std::conj(1.0 - std::sqrt(params.kappa_ex / 2.0) * x(0));
}

void TimeTrace::validate() const {
    if (t.size() != cavity.size() || t.size() != mechanical.size())
        throw std::invalid_argument("TimeTrace: sample length mismatch");
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!std::isfinite(cavity[i].real()) || !std::isfinite(cavity[i].imag()) ||
            !std::isfinite(mechanical[i].real()) || !std::isfinite(mechanical[i].imag()))
            throw std::invalid_argument("TimeTrace: non-finite sample");
    }
}

namespace {

struct State {
    complex a;
    complex b;
};

State operator+(const State& x, const State& y) { return {x.a + y.a, x.b + y.b}; }
State operator*(double s, const State& x) { return {s * x.a, s * x.b}; }

// Linearized equations of motion in the drive rotating frame. The probe input
// oscillates at the beat frequency W; probe_amp = 0 gives free decay.
class Dynamics {
public:
    Dynamics(const DriveConfig& drive, const DeviceParams& params, double W, double probe_amp)
        : D_(drive.omega_d - params.omega_c),
          g_(drive.g),
          kappa_(params.kappa),
          Gamma_m_(params.Gamma_m),
          Omega_m_(params.Omega_m),
          W_(W),
          in_(std::sqrt(params.kappa_ex / 2.0) * probe_amp) {}

    [[nodiscard]] State deriv(double t, const State& s) const {
        const complex drive_term = in_ * std::exp(-j * W_ * t);
        State d;
        d.a = (j * D_ - kappa_ / 2.0) * s.a + j * g_ * (s.b + std::conj(s.b)) + drive_term;
        d.b = (-j * Omega_m_ - Gamma_m_ / 2.0) * s.b + j * g_ * (s.a + std::conj(s.a));
        return d;
    }

private:
    double D_, g_, kappa_, Gamma_m_, Omega_m_, W_;
    complex in_;
};

State rk4_step(const Dynamics& dyn, double t, double h, const State& s) {
    const State k1 = dyn.deriv(t, s);
    const State k2 = dyn.deriv(t + h / 2.0, s + (h / 2.0) * k1);
    const State k3 = dyn.deriv(t + h / 2.0, s + (h / 2.0) * k2);
    const State k4 = dyn.deriv(t + h, s + h * k3);
    return s + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Declared stability/accuracy bound: 50 steps per period of the fastest scale
// 2*Omega_m in the rotating frame.
double step_size(const DeviceParams& params) {
    return (constants::two_pi / (2.0 * params.Omega_m)) / 50.0;
}

} // namespace

TimeTrace integrate_free_decay(const DriveConfig& drive, const DeviceParams& params, complex a0,
                               complex b0, double duration, std::size_t samples) {
    const double h = step_size(params);
    const auto n_steps = static_cast<std::size_t>(std::ceil(duration / h));
    if (n_steps == 0) throw std::invalid_argument("integrate_free_decay: duration too short");
    const std::size_t stride = std::max<std::size_t>(1, n_steps / samples);

    Dynamics dyn(drive, params, 0.0, 0.0);
    State s{a0, b0};
    TimeTrace trace;
    trace.dt = h;
    trace.duration = static_cast<double>(n_steps) * h;
    double t = 0.0;
    for (std::size_t i = 0; i < n_steps; ++i) {
        if (i % stride == 0) {
            trace.t.push_back(t);
            trace.cavity.push_back(s.a);
            trace.mechanical.push_back(s.b);
        }
        s = rk4_step(dyn, t, h, s);
        t += h;
    }
    trace.t.push_back(t);
    trace.cavity.push_back(s.a);
    trace.mechanical.push_back(s.b);
    trace.validate();
    return trace;
}

complex time_domain_transmission(double omega_p, const DriveConfig& drive,
                                 const DeviceParams& params, std::size_t cycles) {
    if (cycles == 0) throw std::invalid_argument("time_domain_transmission: cycles must be >= 1");
    const double W = omega_p - drive.omega_d;
    const double h = step_size(params);

    // Slowest hybrid decay sets the transient; wait >= 10 amplitude-decay times.
    const response::NormalModes nm = response::normal_modes(drive, params);
    const double slowest =
        std::min(std::abs(nm.lambda_plus.real()), std::abs(nm.lambda_minus.real()));
    if (slowest <= 0.0)
        throw std::runtime_error("time_domain_transmission: non-decaying normal mode");

    const double beat_period = constants::two_pi / std::max(std::abs(W), params.kappa / 100.0);
    const double window_time = static_cast<double>(cycles) * beat_period;

    Dynamics dyn(drive, params, W, 1.0);
    State s{0.0, 0.0};
    double t = 0.0;
    const double sqrt_kex2 = std::sqrt(params.kappa_ex / 2.0);

    auto integrate_until = [&](double t_end) {
        while (t < t_end - h / 2.0) {
            s = rk4_step(dyn, t, h, s);
            t += h;
        }
    };
    // Demodulate <a(t) e^{+jWt}> over one window (trapezoid in steps).
    auto demod_window = [&]() {
        complex acc = 0.0;
        std::size_t n = 0;
        const double t_end = t + window_time;
        while (t < t_end - h / 2.0) {
            acc += s.a * std::exp(j * W * t);
            s = rk4_step(dyn, t, h, s);
            t += h;
            ++n;
        }
        return acc / static_cast<double>(n);
    };

    double wait = 10.0 / slowest;
    for (int attempt = 0; attempt < 4; ++attempt) {
        integrate_until(wait);
        const complex a1 = demod_window();
        const complex a2 = demod_window();
        const double drift = std::abs(a2 - a1) / std::max(std::abs(a2), 1e-30);
        if (drift <= 1e-4) return std::conj(1.0 - sqrt_kex2 * a2);
        wait = t + wait; // transient not settled; double the waiting budget
    }
    throw std::runtime_error("time_domain_transmission: steady state did not converge "
                             "(demodulation windows drift > 1e-4)");
}

} // namespace cavem::oracle
