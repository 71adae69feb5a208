#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "doctest.h"

#include "cavem/constants.hpp"
#include "cavem/fit.hpp"
#include "cavem/harness.hpp"
#include "cavem/response.hpp"
#include "test_util.hpp"

using namespace cavem;
using constants::rad_from_hz;
using testutil::reference_device;

TEST_CASE("gaussian pairs are deterministic with standard-normal moments") {
    const auto a = harness::gaussian_pair(42, 7);
    const auto b = harness::gaussian_pair(42, 7);
    CHECK(a.first == b.first);
    CHECK(a.second == b.second);
    CHECK(harness::gaussian_pair(43, 7) != a);
    CHECK(harness::gaussian_pair(42, 8) != a);

    double sum = 0.0, sum2 = 0.0;
    const std::size_t n = 10000;
    for (std::size_t i = 0; i < n; ++i) {
        const auto [u, v] = harness::gaussian_pair(1, i);
        sum += u + v;
        sum2 += u * u + v * v;
    }
    const double mean = sum / (2.0 * n);
    const double var = sum2 / (2.0 * n) - mean * mean;
    CHECK(std::abs(mean) < 0.02);
    CHECK(var == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("noise injection: identity at zero sigma, reproducible, index-keyed") {
    const auto p = reference_device();
    const auto drive = response::DriveConfig::from_photon_number(p.omega_c - p.Omega_m, 1e4, p);
    const auto clean = response::evaluate(response::cavity_grid(p, 5.0, 501), drive, p);

    const auto same = harness::inject_noise(clean, {0.0, 99});
    for (std::size_t i = 0; i < clean.size(); ++i) CHECK(same.values[i] == clean.values[i]);

    const auto n1 = harness::inject_noise(clean, {0.01, 5});
    const auto n2 = harness::inject_noise(clean, {0.01, 5});
    const auto n3 = harness::inject_noise(clean, {0.01, 6});
    bool identical = true, differs = false;
    for (std::size_t i = 0; i < clean.size(); ++i) {
        identical = identical && n1.values[i] == n2.values[i];
        differs = differs || n1.values[i] != n3.values[i];
    }
    CHECK(identical);
    CHECK(differs);

    // The realization is keyed by (seed, point index), not by the data: the
    // same offsets must appear on a completely different baseline spectrum,
    // up to the rounding of the add-then-subtract round trip.
    auto other = clean;
    for (auto& v : other.values) v += std::complex<double>{0.25, -0.125};
    const auto n_other = harness::inject_noise(other, {0.01, 5});
    for (std::size_t i = 0; i < clean.size(); ++i) {
        const auto d = (n_other.values[i] - other.values[i]) - (n1.values[i] - clean.values[i]);
        CHECK(std::abs(d) < 1e-14);
    }

    double var = 0.0;
    for (std::size_t i = 0; i < clean.size(); ++i) {
        const auto d = n1.values[i] - clean.values[i];
        var += d.real() * d.real() + d.imag() * d.imag();
    }
    var /= 2.0 * static_cast<double>(clean.size());
    CHECK(std::sqrt(var) == doctest::Approx(0.01).epsilon(0.05));
}

TEST_CASE("probe sweep at a weak drive shows the narrow transparency peak") {
    const auto p = reference_device();
    const auto drive = response::DriveConfig::from_photon_number(p.omega_c - p.Omega_m, 10.0, p);
    const double c = p.cooperativity(drive.g);
    const auto grid = response::linear_grid(p.omega_c, rad_from_hz(200.0), 4001);
    const auto sweep = harness::probe_sweep(p, drive, grid);
    sweep.validate();

    const double bare_floor = std::abs(response::bare_transmission(p.omega_c, p));
    const double center = std::abs(sweep.values[sweep.size() / 2]);
    const double ideal = std::abs(1.0 - (p.kappa_ex / p.kappa) / (1.0 + c));
    CHECK(center > bare_floor);
    CHECK(center == doctest::Approx(ideal).epsilon(1e-3));
    // Wings of this narrow window sit back down near the bare dip floor.
    CHECK(std::abs(sweep.values.front()) == doctest::Approx(bare_floor).epsilon(0.02));
}

TEST_CASE("power sweep recovers per-point couplings and the sqrt law") {
    const auto p = reference_device();
    const std::vector<double> n_d{1e2, 1e3, 1e4, 1e5, 1e6};
    const auto grid = harness::default_probe_grid(p, 1001);
    const auto r = harness::power_sweep(p, p.omega_c - p.Omega_m, n_d, grid);

    REQUIRE(r.points.size() == n_d.size());
    double prev = 0.0;
    for (const auto& point : r.points) {
        CHECK(point.fit_ok);
        const double g_fit = point.coupling_fit.estimate("g");
        CHECK(g_fit == doctest::Approx(point.g_true).epsilon(1e-6));
        CHECK(g_fit >= prev);
        prev = g_fit;
    }
    CHECK(r.sqrt_law_ok);
    CHECK(r.sqrt_law.estimate("g0") == doctest::Approx(p.g0()).epsilon(1e-9));
}

TEST_CASE("power sweep degrades gracefully when nothing constrains the law") {
    const auto p = reference_device();
    const auto grid = harness::default_probe_grid(p, 501);
    harness::PowerSweepResult r;
    CHECK_NOTHROW(r = harness::power_sweep(p, p.omega_c - p.Omega_m, {0.0}, grid));
    CHECK_FALSE(r.sqrt_law_ok);
}

TEST_CASE("detuning sweep: photon-number bookkeeping and the resonant damping ratio") {
    const auto p = reference_device();
    const double p_in = 1e-11;
    const auto sweep = harness::detuning_sweep(p, p_in, harness::default_delta_grid(p, 61));
    REQUIRE(sweep.size() == 61);

    for (const auto& point : sweep) {
        const double omega_d = p.omega_c - p.Omega_m + point.delta;
        const double n_d = device::drive_photon_number(p_in, omega_d, omega_d - p.omega_c,
                                                       p.kappa, p.kappa_ex);
        CHECK(point.n_d == doctest::Approx(n_d).epsilon(1e-12));
        CHECK(point.g == doctest::Approx(p.g0() * std::sqrt(n_d)).epsilon(1e-12));
        const auto ba = response::backaction(point.delta, point.g, p);
        CHECK(point.Omega_m_eff == doctest::Approx(ba.Omega_m_eff).epsilon(1e-14));
        CHECK(point.Gamma_m_eff == doctest::Approx(ba.Gamma_m_eff).epsilon(1e-14));
    }

    const auto& mid = sweep[30];
    CHECK(std::abs(mid.delta) < 1e-3); // rad/s, against a 4e6 rad/s span
    CHECK(mid.Gamma_m_eff / p.Gamma_m ==
          doctest::Approx(1.0 + p.cooperativity(mid.g)).epsilon(1e-9));
}

TEST_CASE("detuning sweep cross-extraction matches the closed-form backaction") {
    const auto p = reference_device();
    harness::DetuningSweepOptions options;
    options.extract_from_spectra = true;
    const auto grid = response::linear_grid(0.0, rad_from_hz(300e3), 5);
    const auto sweep = harness::detuning_sweep(p, 1e-11, grid, options);
    for (const auto& point : sweep) {
        REQUIRE(point.extracted_center.has_value());
        REQUIRE(point.extracted_fwhm.has_value());
        CHECK(*point.extracted_center == doctest::Approx(point.Omega_m_eff).epsilon(1e-4));
        CHECK(*point.extracted_fwhm == doctest::Approx(point.Gamma_m_eff).epsilon(0.02));
    }
}

TEST_CASE("detuning sweep feeds the backaction fit and closes on the pull constant") {
    const auto p = reference_device();
    const auto sweep = harness::detuning_sweep(p, 1e-11, harness::default_delta_grid(p, 61));
    std::vector<fitting::BackactionPoint> points;
    double n_d_ref = 0.0;
    for (const auto& s : sweep) {
        points.push_back({s.delta, s.Omega_m_eff, s.Gamma_m_eff});
        if (std::abs(s.delta) < 1e-9) n_d_ref = s.n_d;
    }
    REQUIRE(n_d_ref > 0.0);
    const auto r = fitting::fit_backaction(points, p, n_d_ref);
    CHECK(r.converged);
    CHECK(r.estimate("G") == doctest::Approx(std::abs(p.cavity_pull)).epsilon(1e-9));
}

namespace {

// find_minima only consumes |T|, so a magnitude row from a map can be wrapped
// as a real-valued spectrum.
cavem::response::ComplexSpectrum row_as_spectrum(const cavem::harness::TwoToneMap& map,
                                                 std::size_t i_drive) {
    cavem::response::ComplexSpectrum s;
    s.probe = map.probe_freqs;
    for (std::size_t j = 0; j < map.probe_freqs.size(); ++j)
        s.values.emplace_back(std::pow(10.0, map.at(i_drive, j) / 20.0), 0.0);
    return s;
}

} // namespace

TEST_CASE("two-tone map: undriven rows are identical, strong rows split by 2g") {
    const auto p = reference_device();

    const auto drive_grid = response::linear_grid(p.omega_c - p.Omega_m, rad_from_hz(50e3), 5);
    const auto probe_grid = response::linear_grid(p.omega_c, rad_from_hz(600e3), 1001);

    const auto flat = harness::two_tone_map(p, drive_grid, probe_grid,
                                            harness::CouplingSpec::coupling_rate(0.0));
    for (std::size_t i = 1; i < drive_grid.size(); ++i)
        for (std::size_t j = 0; j < probe_grid.size(); ++j)
            CHECK(flat.at(i, j) == flat.at(0, j));

    const auto strong = harness::two_tone_map(p, drive_grid, probe_grid,
                                              harness::CouplingSpec::photon_number(1e6));
    const auto center = row_as_spectrum(strong, 2);
    const auto minima = response::find_minima(center);
    REQUIRE(minima.size() >= 2);
    const double separation = std::abs(minima[0].omega - minima[1].omega);
    const double g = p.g0() * std::sqrt(1e6);
    const auto modes = response::normal_modes(
        response::DriveConfig::from_photon_number(p.omega_c - p.Omega_m, 1e6, p), p);
    CHECK(separation == doctest::Approx(modes.splitting).epsilon(0.03));
    CHECK(separation == doctest::Approx(2.0 * g).epsilon(0.05));
}

TEST_CASE("two-tone map: weak-drive feature tracks the shifted mechanical frequency") {
    const auto p = reference_device();
    const auto drive_grid = response::linear_grid(p.omega_c - p.Omega_m, rad_from_hz(500.0), 5);
    const auto probe_grid = response::linear_grid(p.omega_c, rad_from_hz(800.0), 3201);
    const auto map = harness::two_tone_map(p, drive_grid, probe_grid,
                                           harness::CouplingSpec::photon_number(10.0));
    for (std::size_t i = 0; i < drive_grid.size(); ++i) {
        std::size_t j_max = 0;
        for (std::size_t j = 1; j < probe_grid.size(); ++j)
            if (map.at(i, j) > map.at(i, j_max)) j_max = j;
        const double omega_d = drive_grid[i];
        const double g = harness::CouplingSpec::photon_number(10.0).drive_at(omega_d, p).g;
        const double delta = omega_d + p.Omega_m - p.omega_c;
        const double expected = omega_d + response::backaction(delta, g, p).Omega_m_eff;
        CHECK(std::abs(probe_grid[j_max] - expected) < rad_from_hz(2.0));
    }
}

TEST_CASE("two-tone map noise is reproducible per cell") {
    const auto p = reference_device();
    const auto drive_grid = response::linear_grid(p.omega_c - p.Omega_m, rad_from_hz(50e3), 3);
    const auto probe_grid = response::linear_grid(p.omega_c, rad_from_hz(600e3), 101);
    const auto spec = harness::CouplingSpec::photon_number(1e4);
    const auto m1 = harness::two_tone_map(p, drive_grid, probe_grid, spec,
                                          harness::NoiseModel{0.05, 42});
    const auto m2 = harness::two_tone_map(p, drive_grid, probe_grid, spec,
                                          harness::NoiseModel{0.05, 42});
    const auto m3 = harness::two_tone_map(p, drive_grid, probe_grid, spec,
                                          harness::NoiseModel{0.05, 43});
    CHECK(m1.mag_db == m2.mag_db);
    CHECK(m1.mag_db != m3.mag_db);
}

TEST_CASE("coupling specs agree with the drive factories") {
    const auto p = reference_device();
    const double omega_d = p.omega_c - p.Omega_m;

    const auto by_g = harness::CouplingSpec::coupling_rate(rad_from_hz(3e3)).drive_at(omega_d, p);
    CHECK(by_g.g == rad_from_hz(3e3));

    const auto by_n = harness::CouplingSpec::photon_number(1e4).drive_at(omega_d, p);
    CHECK(by_n.g ==
          doctest::Approx(response::DriveConfig::from_photon_number(omega_d, 1e4, p).g)
              .epsilon(1e-15));

    const auto by_p = harness::CouplingSpec::input_power(1e-11).drive_at(omega_d, p);
    const auto direct = response::DriveConfig::from_power(omega_d, 1e-11, p);
    CHECK(by_p.g == doctest::Approx(direct.g).epsilon(1e-15));
    REQUIRE(by_p.n_d.has_value());
    CHECK(*by_p.n_d == doctest::Approx(*direct.n_d).epsilon(1e-15));
}

TEST_CASE("noisy cavity fit closes with the injected noise level") {
    const auto p = reference_device();
    const auto drive = response::DriveConfig::from_photon_number(p.omega_c - p.Omega_m, 0.0, p);
    const auto grid = harness::default_probe_grid(p);
    const double sigma = 0.01;
    const auto noisy = harness::probe_sweep(p, drive, grid, harness::NoiseModel{sigma, 9});
    const auto r = fitting::fit_cavity(noisy);
    CHECK(r.converged);
    // Stacked re/im residuals: the residual norm must match sigma * sqrt(2N).
    const double expected = sigma * std::sqrt(2.0 * static_cast<double>(grid.size()));
    CHECK(r.residual_norm == doctest::Approx(expected).epsilon(0.1));
}

TEST_CASE("default grids carry the measurement layouts") {
    const auto p = reference_device();

    const auto probe = harness::default_probe_grid(p);
    CHECK(probe.size() == 2001);
    CHECK(probe.front() == doctest::Approx(p.omega_c - rad_from_hz(2.5e6)).epsilon(1e-15));
    CHECK(probe.back() == doctest::Approx(p.omega_c + rad_from_hz(2.5e6)).epsilon(1e-15));

    const auto delta = harness::default_delta_grid(p);
    CHECK(delta.size() == 121);
    CHECK(delta.front() == doctest::Approx(-rad_from_hz(600e3)).epsilon(1e-15));
    CHECK(delta.back() == doctest::Approx(rad_from_hz(600e3)).epsilon(1e-15));

    const auto drive = harness::default_drive_grid(p);
    CHECK(drive.size() == 121);
    CHECK(drive.front() ==
          doctest::Approx(p.omega_c - p.Omega_m - rad_from_hz(300e3)).epsilon(1e-15));

    const auto map_probe = harness::default_map_probe_grid(p);
    CHECK(map_probe.size() == 801);
    CHECK(map_probe.back() == doctest::Approx(p.omega_c + rad_from_hz(2e6)).epsilon(1e-15));
}
