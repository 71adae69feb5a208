#include "cavem/device_model.hpp"

#include <cmath>
#include <stdexcept>

#include "cavem/constants.hpp"

namespace cavem::device {

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw std::domain_error(what);
}

} // namespace

void DeviceParams::validate() const {
    auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
    if (!positive(omega_c)) throw std::invalid_argument("omega_c must be positive");
    if (!positive(kappa)) throw std::invalid_argument("kappa must be positive");
    if (!positive(kappa_ex)) throw std::invalid_argument("kappa_ex must be positive");
    if (!(std::isfinite(kappa_0) && kappa_0 >= 0.0))
        throw std::invalid_argument("kappa_0 must be nonnegative");
    if (!positive(Omega_m)) throw std::invalid_argument("Omega_m must be positive");
    if (!positive(Gamma_m)) throw std::invalid_argument("Gamma_m must be positive");
    if (!positive(mass)) throw std::invalid_argument("mass must be positive");
    if (!positive(gap)) throw std::invalid_argument("gap must be positive");
    if (!positive(inductance)) throw std::invalid_argument("inductance must be positive");
    if (!positive(capacitance)) throw std::invalid_argument("capacitance must be positive");
    if (!(eta > 0.0 && eta <= 1.0)) throw std::invalid_argument("eta must be in (0, 1]");
    if (!(std::isfinite(temperature) && temperature > 0.0))
        throw std::invalid_argument("temperature must be positive");
    if (!std::isfinite(cavity_pull)) throw std::invalid_argument("cavity_pull must be finite");
    // The decay-rate budget must balance exactly (up to roundoff).
    if (std::abs(kappa - (kappa_ex + kappa_0)) > 1e-12 * kappa)
        throw std::invalid_argument("kappa must equal kappa_ex + kappa_0");
}

double DeviceParams::x_zp() const { return zero_point_motion(mass, Omega_m); }

double DeviceParams::g0() const { return single_photon_coupling(cavity_pull, x_zp()); }

double DeviceParams::cooperativity(double g) const {
    return 4.0 * g * g / (kappa * Gamma_m);
}

double zero_point_motion(double mass, double Omega_m) {
    require(mass > 0.0, "zero_point_motion: mass must be positive");
    require(Omega_m > 0.0, "zero_point_motion: Omega_m must be positive");
    return std::sqrt(constants::hbar / (2.0 * mass * Omega_m));
}

double parallel_plate_pull(double omega_c, double gap, double eta) {
    require(gap > 0.0, "parallel_plate_pull: gap must be positive");
    require(eta > 0.0 && eta <= 1.0, "parallel_plate_pull: eta must be in (0, 1]");
    return -eta * omega_c / (2.0 * gap);
}

double lc_resonance(double inductance, double capacitance) {
    require(inductance > 0.0, "lc_resonance: inductance must be positive");
    require(capacitance > 0.0, "lc_resonance: capacitance must be positive");
    return 1.0 / std::sqrt(inductance * capacitance);
}

double single_photon_coupling(double cavity_pull, double x_zp) {
    require(x_zp >= 0.0, "single_photon_coupling: x_zp must be nonnegative");
    return std::abs(cavity_pull) * x_zp;
}

double pumped_coupling(double g0, double n_d) {
    require(n_d >= 0.0, "pumped_coupling: n_d must be nonnegative");
    return g0 * std::sqrt(n_d);
}

double drive_photon_number(double p_in, double omega_d, double detuning,
                           double kappa, double kappa_ex) {
    require(p_in >= 0.0, "drive_photon_number: p_in must be nonnegative");
    require(omega_d > 0.0, "drive_photon_number: omega_d must be positive");
    const double lorentz = kappa * kappa + 4.0 * detuning * detuning;
    return 2.0 * p_in * kappa_ex / (constants::hbar * omega_d * lorentz);
}

double thermal_occupancy(double omega, double temperature) {
    require(omega > 0.0, "thermal_occupancy: omega must be positive");
    require(temperature >= 0.0, "thermal_occupancy: temperature must be nonnegative");
    if (temperature == 0.0) return 0.0;
    // expm1 keeps precision in the high-temperature limit hbar*omega << kB*T.
    const double x = constants::hbar * omega / (constants::k_boltzmann * temperature);
    return 1.0 / std::expm1(x);
}

FiguresOfMerit figures_of_merit(const DeviceParams& params) {
    params.validate();
    FiguresOfMerit fom;
    fom.q_mechanical = params.Omega_m / params.Gamma_m;
    fom.sideband_ratio = params.Omega_m / params.kappa;
    fom.cooling_factor = params.kappa / params.Gamma_m;
    fom.n_cavity = thermal_occupancy(params.omega_c, params.temperature);
    fom.n_mech = thermal_occupancy(params.Omega_m, params.temperature);
    fom.gamma_th = fom.n_mech * params.Gamma_m;
    fom.group_delay = 1.0 / params.Gamma_m;
    fom.storage_time = 1.0 / fom.gamma_th;
    fom.x_zp = params.x_zp();
    fom.g0 = params.g0();
    return fom;
}

} // namespace cavem::device
