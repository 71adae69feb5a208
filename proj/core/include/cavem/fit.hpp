#pragma once

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "cavem/device_model.hpp"
#include "cavem/response.hpp"

// Nonlinear least squares and the parameter extractions built on it: cavity
// Lorentzian, mechanical noise peak, coupling rate from dressed spectra, the
// sqrt(n_d) coupling law, and the frequency-pull constant from a backaction
// detuning sweep.
//
// The engine is damped Gauss-Newton (Levenberg-Marquardt): adaptive damping,
// central finite-difference Jacobians (relative step 1e-6), parameters scaled
// to order unity internally, complex data fitted as stacked re/im residuals.

namespace cavem::fitting {

using complex = std::complex<double>;

struct Dataset {
    std::vector<double> x;
    std::vector<double> y;        // real ordinates (leave empty for complex data)
    std::vector<complex> yc;      // complex ordinates (leave empty for real data)
    std::vector<double> weights;  // optional per-point weights (applied to residuals)

    [[nodiscard]] bool is_complex() const { return !yc.empty(); }
    void validate() const;
};

struct FitOptions {
    int max_iterations = 200;
    double residual_tol = 1e-10; // stop on relative residual-norm change below this
    double gradient_tol = 1e-8;  // stop when the gradient is this small against the
                                 // Jacobian-column and residual scale
    double fd_relative_step = 1e-6;
    int max_failed_steps = 10;   // consecutive rejected damped steps before giving up
};

struct FitResult {
    std::vector<std::string> names;
    std::vector<double> estimates;
    std::vector<double> std_errors; // empty when the normal matrix is ill-conditioned
    double residual_norm = 0.0;     // sqrt(sum of squared residuals) at the solution
    double gradient_norm = 0.0;     // scaled-gradient infinity norm at the solution
    int iterations = 0;
    bool converged = false;
    std::string model_id;

    [[nodiscard]] double estimate(const std::string& name) const;
    [[nodiscard]] double std_error(const std::string& name) const;
    [[nodiscard]] bool has_std_errors() const { return !std_errors.empty(); }
};

/// Residual generator: maps a parameter vector to the stacked residual vector.
using ResidualFn = std::function<std::vector<double>(const std::vector<double>&)>;

/// Core minimizer over an arbitrary residual function.
[[nodiscard]] FitResult least_squares_residuals(const ResidualFn& residuals,
                                                const std::vector<double>& init,
                                                const std::vector<std::string>& names,
                                                const FitOptions& options = {});

/// Real-valued parametric model y(x; p) fit to a real dataset.
using RealModel =
    std::function<std::vector<double>(const std::vector<double>& p, const std::vector<double>& x)>;
[[nodiscard]] FitResult least_squares(const RealModel& model, const Dataset& data,
                                      const std::vector<double>& init,
                                      const std::vector<std::string>& names,
                                      const FitOptions& options = {});

/// Complex-valued model fit with stacked re/im residuals.
using ComplexModel =
    std::function<std::vector<complex>(const std::vector<double>& p, const std::vector<double>& x)>;
[[nodiscard]] FitResult least_squares(const ComplexModel& model, const Dataset& data,
                                      const std::vector<double>& init,
                                      const std::vector<std::string>& names,
                                      const FitOptions& options = {});

/// Heuristic starting point for fit_cavity, public and tested: dip location for
/// omega_c, half-depth width of |T|^2 for kappa (exactly kappa for the notch
/// model), dip depth for kappa_ex.
struct CavityGuess {
    double omega_c = 0.0;
    double kappa = 0.0;
    double kappa_ex = 0.0;
};
[[nodiscard]] CavityGuess cavity_initial_guess(const response::ComplexSpectrum& spectrum);

/// Fit of the bare cavity notch; estimates {omega_c, kappa, kappa_ex}.
/// Throws std::runtime_error("no resolvable dip...") when the dip does not
/// clear 3x the wing noise floor.
[[nodiscard]] FitResult fit_cavity(const response::ComplexSpectrum& spectrum,
                                   const FitOptions& options = {});

/// Heuristic starting point for fit_mechanical (peak analog of the above).
struct PeakGuess {
    double center = 0.0;
    double fwhm = 0.0;
    double area = 0.0;
    double baseline = 0.0;
};
[[nodiscard]] PeakGuess mechanical_initial_guess(const Dataset& data);

/// Lorentzian peak fit for the thermal mechanical sideband; estimates
/// {Omega_m_eff, Gamma_m_eff, area, baseline}. Throws on fewer than 5 points
/// ("insufficient points") or a peak below 3x the wing noise ("no resolvable peak").
[[nodiscard]] FitResult fit_mechanical(const Dataset& noise_spectrum,
                                       const FitOptions& options = {});

struct CouplingFitOptions {
    bool background = false;     // complex amplitude nuisance (re, im) in front of the model
    bool magnitude_only = false; // fit |T| instead of stacked re/im
    FitOptions base{};
};
/// One-parameter coupling-rate fit of the dressed model to a spectrum, cavity
/// and mechanical parameters held fixed; estimates {g} (+ background when enabled).
/// The drive supplies omega_d and the initial guess for g.
[[nodiscard]] FitResult fit_coupling(const response::ComplexSpectrum& spectrum,
                                     const device::DeviceParams& params,
                                     const response::DriveConfig& drive,
                                     const CouplingFitOptions& options = {});

/// Closed-form least-squares slope of g = g0 sqrt(n_d); estimates {g0}.
struct SqrtLawPoint {
    double n_d = 0.0;
    double g = 0.0; // rad/s
};
[[nodiscard]] FitResult fit_sqrt_law(const std::vector<SqrtLawPoint>& points);

struct BackactionPoint {
    double delta = 0.0;       // rad/s
    double Omega_m_eff = 0.0; // rad/s
    double Gamma_m_eff = 0.0; // rad/s
};
enum class BackactionObservable { both, frequency_only, damping_only };
struct BackactionFitOptions {
    // A constant-input-power sweep changes the drive photon number with delta
    // (the drive Lorentzian is sampled at Delta = delta - Omega_m), so
    // g^2(delta) = g_ref^2 * rho(delta) with rho computable from the device
    // geometry alone. Disable for sweeps taken at fixed g.
    bool constant_power = true;
    BackactionObservable observable = BackactionObservable::both;
    FitOptions base{};
};
/// Joint fit of the backaction frequency-pull and damping curves with one
/// shared coupling rate g_ref = g(delta = 0); estimates {g, G} where
/// G = g_ref / (x_zp sqrt(n_d_ref)) and n_d_ref is the photon number at delta = 0.
[[nodiscard]] FitResult fit_backaction(const std::vector<BackactionPoint>& sweep,
                                       const device::DeviceParams& params, double n_d_ref,
                                       const BackactionFitOptions& options = {});

} // namespace cavem::fitting
