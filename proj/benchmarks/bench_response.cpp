#include <benchmark/benchmark.h>

#include <vector>

#include "cavem/fit.hpp"
#include "cavem/harness.hpp"
#include "cavem/io.hpp"
#include "cavem/oracle.hpp"
#include "cavem/response.hpp"

namespace {

using namespace cavem;

const device::DeviceParams& params() {
    static const device::DeviceParams p = io::load_device_params(CAVEM_PARAMS_JSON);
    return p;
}

response::DriveConfig sideband_drive(double n_d) {
    const auto& p = params();
    return response::DriveConfig::from_photon_number(p.omega_c - p.Omega_m, n_d, p);
}

void bm_dressed_spectrum(benchmark::State& state) {
    const auto& p = params();
    const auto grid = harness::default_probe_grid(p, static_cast<std::size_t>(state.range(0)));
    const auto drive = sideband_drive(1e5);
    for (auto _ : state) {
        auto spectrum = response::evaluate(grid, drive, p);
        benchmark::DoNotOptimize(spectrum.values.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(bm_dressed_spectrum)->Arg(201)->Arg(2001);

void bm_sideband_linear_solve(benchmark::State& state) {
    const auto& p = params();
    const auto drive = sideband_drive(1e5);
    const auto grid = harness::default_probe_grid(p, 201);
    std::size_t i = 0;
    for (auto _ : state) {
        auto t = oracle::sideband_linear_solve(grid[i % grid.size()], drive, p);
        benchmark::DoNotOptimize(t);
        ++i;
    }
}
BENCHMARK(bm_sideband_linear_solve);

void bm_cavity_fit(benchmark::State& state) {
    const auto& p = params();
    const auto grid = harness::default_probe_grid(p, 2001);
    const auto clean = response::evaluate(grid, sideband_drive(0.0), p);
    for (auto _ : state) {
        auto r = fitting::fit_cavity(clean);
        benchmark::DoNotOptimize(r.estimates.data());
    }
}
BENCHMARK(bm_cavity_fit);

void bm_two_tone_map(benchmark::State& state) {
    const auto& p = params();
    const auto drives = harness::default_drive_grid(p, 11);
    const auto probes = harness::default_map_probe_grid(p, 201);
    const auto coupling = harness::CouplingSpec::photon_number(1e5);
    for (auto _ : state) {
        auto map = harness::two_tone_map(p, drives, probes, coupling);
        benchmark::DoNotOptimize(map.mag_db.data());
    }
    state.SetItemsProcessed(state.iterations() * drives.size() * probes.size());
}
BENCHMARK(bm_two_tone_map);

} // namespace

BENCHMARK_MAIN();
