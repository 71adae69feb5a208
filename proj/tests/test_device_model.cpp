#include <cmath>
#include <stdexcept>

#include "doctest.h"

#include "cavem/constants.hpp"
#include "cavem/device_model.hpp"
#include "test_util.hpp"

using namespace cavem;
using constants::hz_from_rad;
using constants::rad_from_hz;
using testutil::reference_device;

TEST_CASE("zero-point motion: closed form, identity, and domain errors") {
    CHECK(device::zero_point_motion(1.0, 1.0) ==
          doctest::Approx(7.2614e-18).epsilon(1e-4)); // sqrt(hbar/2)

    const auto p = reference_device();
    const double x = p.x_zp();
    CHECK(x == doctest::Approx(3.962408928947299e-15).epsilon(1e-12));
    CHECK(x == device::zero_point_motion(p.mass, p.Omega_m));
    // 2 m Omega_m x_zp^2 recovers hbar exactly.
    CHECK(2.0 * p.mass * p.Omega_m * x * x ==
          doctest::Approx(constants::hbar).epsilon(1e-12));

    CHECK_THROWS_AS((void)device::zero_point_motion(0.0, 1.0), std::domain_error);
    CHECK_THROWS_AS((void)device::zero_point_motion(1e-14, -5.0), std::domain_error);
}

TEST_CASE("parallel-plate pull: magnitude, sign, participation scaling") {
    const double pull = device::parallel_plate_pull(rad_from_hz(10e9), 50e-9, 1.0);
    CHECK(hz_from_rad(pull) == doctest::Approx(-1e17).epsilon(1e-12)); // -100 MHz/nm
    CHECK(pull < 0.0);
    CHECK(device::parallel_plate_pull(rad_from_hz(10e9), 50e-9, 0.5) ==
          doctest::Approx(0.5 * pull).epsilon(1e-12));
    CHECK_THROWS_AS((void)device::parallel_plate_pull(1.0, 0.0, 1.0), std::domain_error);
    CHECK_THROWS_AS((void)device::parallel_plate_pull(1.0, 1e-9, 1.5), std::domain_error);
    CHECK_THROWS_AS((void)device::parallel_plate_pull(1.0, 1e-9, 0.0), std::domain_error);
}

TEST_CASE("LC resonance lands at 7.45 GHz for 12 nH and 38 fF") {
    const double w = device::lc_resonance(12e-9, 38e-15);
    CHECK(hz_from_rad(w) == doctest::Approx(7.4531e9).epsilon(1e-4));
    CHECK_THROWS_AS((void)device::lc_resonance(0.0, 38e-15), std::domain_error);
    CHECK_THROWS_AS((void)device::lc_resonance(12e-9, -1.0), std::domain_error);
}

TEST_CASE("single-photon coupling chain g0 = |G| x_zp") {
    // 56 MHz/nm pull and 4.1 fm spread give approximately 230 Hz.
    const double g0 = device::single_photon_coupling(rad_from_hz(5.6e16), 4.1e-15);
    CHECK(hz_from_rad(g0) == doctest::Approx(229.6).epsilon(1e-3));
    // Sign of the pull is irrelevant: magnitude convention.
    CHECK(device::single_photon_coupling(-rad_from_hz(5.6e16), 4.1e-15) == g0);

    const auto p = reference_device();
    CHECK(hz_from_rad(p.g0()) == doctest::Approx(221.89490002104876).epsilon(1e-12));
    CHECK(p.g0() == device::single_photon_coupling(p.cavity_pull, p.x_zp()));
}

TEST_CASE("pumped coupling follows the square-root law") {
    const double g0 = rad_from_hz(230.0);
    CHECK(hz_from_rad(device::pumped_coupling(g0, 5e6)) ==
          doctest::Approx(514295.26).epsilon(1e-6));
    CHECK(device::pumped_coupling(g0, 0.0) == 0.0);
    CHECK_THROWS_AS((void)device::pumped_coupling(g0, -1.0), std::domain_error);
}

TEST_CASE("drive photon number at 10 pW on the lower sideband") {
    const auto p = reference_device();
    const double omega_d = p.omega_c - p.Omega_m;
    const double n_d =
        device::drive_photon_number(1e-11, omega_d, -p.Omega_m, p.kappa, p.kappa_ex);
    CHECK(n_d == doctest::Approx(183.145).epsilon(1e-3));
    // Linear in power; resonant drive maximizes it.
    CHECK(device::drive_photon_number(2e-11, omega_d, -p.Omega_m, p.kappa, p.kappa_ex) ==
          doctest::Approx(2.0 * n_d).epsilon(1e-12));
    CHECK(device::drive_photon_number(1e-11, p.omega_c, 0.0, p.kappa, p.kappa_ex) > n_d);
    CHECK_THROWS_AS((void)device::drive_photon_number(-1e-11, omega_d, 0.0, p.kappa, p.kappa_ex),
                    std::domain_error);
    CHECK_THROWS_AS((void)device::drive_photon_number(1e-11, 0.0, 0.0, p.kappa, p.kappa_ex),
                    std::domain_error);
}

TEST_CASE("thermal occupancy: values, zero-temperature limit, monotonicity") {
    const auto p = reference_device();
    CHECK(device::thermal_occupancy(p.Omega_m, 0.04) ==
          doctest::Approx(77.4678).epsilon(1e-4));
    CHECK(device::thermal_occupancy(p.omega_c, 0.04) ==
          doctest::Approx(1.28131e-4).epsilon(1e-3));
    CHECK(device::thermal_occupancy(p.Omega_m, 0.0) == 0.0);

    double prev = 0.0;
    for (double t : {0.01, 0.02, 0.04, 0.1, 0.3, 1.0, 4.0}) {
        const double n = device::thermal_occupancy(p.Omega_m, t);
        CHECK(n > prev);
        prev = n;
    }

    // Equipartition limit: n * (hbar w / kB T) -> 1 for hbar w / kB T < 1e-3.
    const double x = 1e-4;
    const double t_hot = constants::hbar * p.Omega_m / (constants::k_boltzmann * x);
    CHECK(device::thermal_occupancy(p.Omega_m, t_hot) * x == doctest::Approx(1.0).epsilon(0.01));

    CHECK_THROWS_AS((void)device::thermal_occupancy(-1.0, 0.04), std::domain_error);
    CHECK_THROWS_AS((void)device::thermal_occupancy(p.Omega_m, -0.1), std::domain_error);
}

TEST_CASE("parameter validation rejects inconsistent decay budgets and ranges") {
    auto p = reference_device();
    p.kappa_0 = rad_from_hz(41e3); // kappa_ex + kappa_0 != kappa
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);

    p = reference_device();
    p.eta = 1.2;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);

    p = reference_device();
    p.mass = -1e-14;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);

    p = reference_device();
    p.Gamma_m = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);

    CHECK_NOTHROW(reference_device().validate());
}

TEST_CASE("figures of merit match their closed forms") {
    const auto p = reference_device();
    const auto fom = device::figures_of_merit(p);

    CHECK(fom.q_mechanical == doctest::Approx(356333.333).epsilon(1e-6));
    CHECK(fom.sideband_ratio == doctest::Approx(62.88235).epsilon(1e-6));
    CHECK(fom.cooling_factor == doctest::Approx(5666.667).epsilon(1e-6));
    CHECK(fom.n_mech == doctest::Approx(77.4678).epsilon(1e-4));
    CHECK(fom.n_cavity == doctest::Approx(1.28131e-4).epsilon(1e-3));
    CHECK(fom.gamma_th == doctest::Approx(fom.n_mech * p.Gamma_m).epsilon(1e-12));
    CHECK(fom.group_delay == doctest::Approx(1.0 / p.Gamma_m).epsilon(1e-12));
    CHECK(fom.storage_time == doctest::Approx(6.8482e-5).epsilon(1e-3));
    CHECK(fom.x_zp == p.x_zp());
    CHECK(fom.g0 == p.g0());
    CHECK(p.resolved_sideband());
}

TEST_CASE("cooperativity is quadratic in g and hits 1 at sqrt(kappa Gamma_m)/2") {
    const auto p = reference_device();
    const double g_unit = 0.5 * std::sqrt(p.kappa * p.Gamma_m);
    CHECK(p.cooperativity(g_unit) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p.cooperativity(2.0 * g_unit) == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(p.cooperativity(0.0) == 0.0);
}
