#include "cavem/io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "cavem/constants.hpp"

namespace cavem::io {

using json = nlohmann::ordered_json;
using constants::hz_from_rad;
using constants::rad_from_hz;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed for " + path);
}

double require_number(const json& j, const std::string& key, const std::string& path) {
    if (!j.contains(key))
        throw std::runtime_error(path + ": missing required key '" + key + "'");
    if (!j[key].is_number())
        throw std::runtime_error(path + ": key '" + key + "' must be a number");
    return j[key].get<double>();
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    return fields;
}

double parse_double(const std::string& s, const std::string& path, std::size_t line_no) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        if (pos != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                 ": cannot parse number '" + s + "'");
    }
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(const std::string& path, std::size_t expected_min_cols) {
    std::istringstream in(read_file(path));
    CsvTable table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (line_no == 1) {
            table.header = std::move(fields);
            if (table.header.size() < expected_min_cols)
                throw std::runtime_error(path + ": cannot parse: unexpected header '" + line + "'");
        } else {
            if (fields.size() != table.header.size())
                throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                         ": cannot parse: expected " +
                                         std::to_string(table.header.size()) + " columns");
            table.rows.push_back(std::move(fields));
        }
    }
    if (table.header.empty()) throw std::runtime_error(path + ": cannot parse: empty file");
    return table;
}

} // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

device::DeviceParams load_device_params(const std::string& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw std::runtime_error(path + ": invalid JSON: " + e.what());
    }
    if (!j.is_object()) throw std::runtime_error(path + ": expected a JSON object");

    static const char* known[] = {"f_cavity_hz",  "kappa_hz",     "kappa_ext_hz",
                                  "kappa_int_hz", "f_mech_hz",    "gamma_m_hz",
                                  "mass_kg",      "gap_m",        "inductance_h",
                                  "capacitance_f", "eta",         "temperature_k",
                                  "cavity_pull_hz_per_m"};
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (const char* k : known) ok = ok || key == k;
        if (!ok) throw std::runtime_error(path + ": unknown key '" + key + "'");
    }

    device::DeviceParams p;
    p.omega_c = rad_from_hz(require_number(j, "f_cavity_hz", path));
    p.kappa = rad_from_hz(require_number(j, "kappa_hz", path));
    p.kappa_ex = rad_from_hz(require_number(j, "kappa_ext_hz", path));
    p.kappa_0 = rad_from_hz(require_number(j, "kappa_int_hz", path));
    p.Omega_m = rad_from_hz(require_number(j, "f_mech_hz", path));
    p.Gamma_m = rad_from_hz(require_number(j, "gamma_m_hz", path));
    p.mass = require_number(j, "mass_kg", path);
    p.gap = require_number(j, "gap_m", path);
    p.inductance = require_number(j, "inductance_h", path);
    p.capacitance = require_number(j, "capacitance_f", path);
    p.eta = require_number(j, "eta", path);
    p.temperature = require_number(j, "temperature_k", path);
    if (j.contains("cavity_pull_hz_per_m"))
        p.cavity_pull = rad_from_hz(require_number(j, "cavity_pull_hz_per_m", path));
    else
        p.cavity_pull = device::parallel_plate_pull(p.omega_c, p.gap, p.eta);

    try {
        p.validate();
    } catch (const std::exception& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
    return p;
}

void save_device_params(const std::string& path, const device::DeviceParams& params) {
    json j;
    j["f_cavity_hz"] = hz_from_rad(params.omega_c);
    j["kappa_hz"] = hz_from_rad(params.kappa);
    j["kappa_ext_hz"] = hz_from_rad(params.kappa_ex);
    j["kappa_int_hz"] = hz_from_rad(params.kappa_0);
    j["f_mech_hz"] = hz_from_rad(params.Omega_m);
    j["gamma_m_hz"] = hz_from_rad(params.Gamma_m);
    j["mass_kg"] = params.mass;
    j["gap_m"] = params.gap;
    j["inductance_h"] = params.inductance;
    j["capacitance_f"] = params.capacitance;
    j["eta"] = params.eta;
    j["temperature_k"] = params.temperature;
    j["cavity_pull_hz_per_m"] = hz_from_rad(params.cavity_pull);
    write_file(path, j.dump(2) + "\n");
}

SpectrumRecord SpectrumRecord::from_spectrum(const response::ComplexSpectrum& s) {
    SpectrumRecord r;
    r.freq_hz.reserve(s.probe.size());
    for (double w : s.probe) r.freq_hz.push_back(hz_from_rad(w));
    r.t = s.values;
    return r;
}

response::ComplexSpectrum SpectrumRecord::to_spectrum() const {
    response::ComplexSpectrum s;
    s.probe.reserve(freq_hz.size());
    for (double f : freq_hz) s.probe.push_back(rad_from_hz(f));
    s.values = t;
    s.validate();
    return s;
}

void write_spectrum_csv(const std::string& path, const SpectrumRecord& record) {
    std::ostringstream out;
    out << "probe_freq_hz,re_t,im_t,mag_db,phase_rad\n";
    for (std::size_t i = 0; i < record.freq_hz.size(); ++i) {
        const complex t = record.t[i];
        out << format_double(record.freq_hz[i]) << ',' << format_double(t.real()) << ','
            << format_double(t.imag()) << ',' << format_double(20.0 * std::log10(std::abs(t)))
            << ',' << format_double(std::arg(t)) << '\n';
    }
    write_file(path, out.str());
}

void write_spectrum_csv(const std::string& path, const response::ComplexSpectrum& spectrum) {
    write_spectrum_csv(path, SpectrumRecord::from_spectrum(spectrum));
}

SpectrumRecord read_spectrum_csv(const std::string& path) {
    const CsvTable table = read_csv(path, 3);
    if (table.header[0] != "probe_freq_hz" || table.header[1] != "re_t" ||
        table.header[2] != "im_t")
        throw std::runtime_error(path + ": not a spectrum CSV (header mismatch)");
    SpectrumRecord r;
    std::size_t line_no = 1;
    for (const auto& row : table.rows) {
        ++line_no;
        r.freq_hz.push_back(parse_double(row[0], path, line_no));
        r.t.emplace_back(parse_double(row[1], path, line_no), parse_double(row[2], path, line_no));
    }
    return r;
}

MapRecord MapRecord::from_map(const harness::TwoToneMap& map) {
    MapRecord r;
    const std::size_t n = map.drive_freqs.size() * map.probe_freqs.size();
    r.drive_freq_hz.reserve(n);
    r.probe_freq_hz.reserve(n);
    r.mag_db.reserve(n);
    for (std::size_t i = 0; i < map.drive_freqs.size(); ++i)
        for (std::size_t k = 0; k < map.probe_freqs.size(); ++k) {
            r.drive_freq_hz.push_back(hz_from_rad(map.drive_freqs[i]));
            r.probe_freq_hz.push_back(hz_from_rad(map.probe_freqs[k]));
            r.mag_db.push_back(map.at(i, k));
        }
    return r;
}

void write_map_csv(const std::string& path, const MapRecord& record) {
    std::ostringstream out;
    out << "drive_freq_hz,probe_freq_hz,mag_db\n";
    for (std::size_t i = 0; i < record.mag_db.size(); ++i)
        out << format_double(record.drive_freq_hz[i]) << ','
            << format_double(record.probe_freq_hz[i]) << ',' << format_double(record.mag_db[i])
            << '\n';
    write_file(path, out.str());
}

MapRecord read_map_csv(const std::string& path) {
    const CsvTable table = read_csv(path, 3);
    if (table.header[0] != "drive_freq_hz" || table.header[1] != "probe_freq_hz" ||
        table.header[2] != "mag_db")
        throw std::runtime_error(path + ": not a map CSV (header mismatch)");
    MapRecord r;
    std::size_t line_no = 1;
    for (const auto& row : table.rows) {
        ++line_no;
        r.drive_freq_hz.push_back(parse_double(row[0], path, line_no));
        r.probe_freq_hz.push_back(parse_double(row[1], path, line_no));
        r.mag_db.push_back(parse_double(row[2], path, line_no));
    }
    return r;
}

void write_detuning_csv(const std::string& path, const DetuningSweepRecord& record) {
    std::ostringstream out;
    out << "delta_hz,n_d,g_hz,f_mech_eff_hz,gamma_m_eff_hz";
    if (record.has_extraction) out << ",extracted_center_hz,extracted_fwhm_hz";
    out << '\n';
    for (const auto& pt : record.points) {
        out << format_double(hz_from_rad(pt.delta)) << ',' << format_double(pt.n_d) << ','
            << format_double(hz_from_rad(pt.g)) << ',' << format_double(hz_from_rad(pt.Omega_m_eff))
            << ',' << format_double(hz_from_rad(pt.Gamma_m_eff));
        if (record.has_extraction) {
            out << ',' << format_double(hz_from_rad(pt.extracted_center.value_or(
                           std::numeric_limits<double>::quiet_NaN())))
                << ',' << format_double(hz_from_rad(pt.extracted_fwhm.value_or(
                           std::numeric_limits<double>::quiet_NaN())));
        }
        out << '\n';
    }
    write_file(path, out.str());
}

DetuningSweepRecord read_detuning_csv(const std::string& path) {
    const CsvTable table = read_csv(path, 5);
    if (table.header[0] != "delta_hz" || table.header[1] != "n_d")
        throw std::runtime_error(path + ": not a detuning-sweep CSV (header mismatch)");
    DetuningSweepRecord r;
    r.has_extraction = table.header.size() >= 7;
    std::size_t line_no = 1;
    for (const auto& row : table.rows) {
        ++line_no;
        harness::DetuningSweepPoint pt;
        pt.delta = rad_from_hz(parse_double(row[0], path, line_no));
        pt.n_d = parse_double(row[1], path, line_no);
        pt.g = rad_from_hz(parse_double(row[2], path, line_no));
        pt.Omega_m_eff = rad_from_hz(parse_double(row[3], path, line_no));
        pt.Gamma_m_eff = rad_from_hz(parse_double(row[4], path, line_no));
        if (r.has_extraction) {
            pt.extracted_center = rad_from_hz(parse_double(row[5], path, line_no));
            pt.extracted_fwhm = rad_from_hz(parse_double(row[6], path, line_no));
        }
        r.points.push_back(pt);
    }
    return r;
}

void write_xy_csv(const std::string& path, const XyRecord& record) {
    if (record.x.size() != record.y.size())
        throw std::runtime_error(path + ": x/y column length mismatch");
    std::ostringstream out;
    out << record.x_name << ',' << record.y_name << '\n';
    for (std::size_t i = 0; i < record.x.size(); ++i)
        out << format_double(record.x[i]) << ',' << format_double(record.y[i]) << '\n';
    write_file(path, out.str());
}

XyRecord read_xy_csv(const std::string& path) {
    const CsvTable table = read_csv(path, 2);
    XyRecord r;
    r.x_name = table.header[0];
    r.y_name = table.header[1];
    std::size_t line_no = 1;
    for (const auto& row : table.rows) {
        ++line_no;
        r.x.push_back(parse_double(row[0], path, line_no));
        r.y.push_back(parse_double(row[1], path, line_no));
    }
    return r;
}

void write_power_sweep_csv(const std::string& path, const PowerSweepRecord& record) {
    std::ostringstream out;
    out << "n_d,g_true_hz,g_fit_hz,converged\n";
    for (std::size_t i = 0; i < record.n_d.size(); ++i)
        out << format_double(record.n_d[i]) << ',' << format_double(record.g_true_hz[i]) << ','
            << format_double(record.g_fit_hz[i]) << ',' << (record.converged[i] ? 1 : 0) << '\n';
    write_file(path, out.str());
}

PowerSweepRecord read_power_sweep_csv(const std::string& path) {
    const CsvTable table = read_csv(path, 4);
    if (table.header[0] != "n_d" || table.header[3] != "converged")
        throw std::runtime_error(path + ": not a power-sweep CSV (header mismatch)");
    PowerSweepRecord r;
    std::size_t line_no = 1;
    for (const auto& row : table.rows) {
        ++line_no;
        r.n_d.push_back(parse_double(row[0], path, line_no));
        r.g_true_hz.push_back(parse_double(row[1], path, line_no));
        r.g_fit_hz.push_back(parse_double(row[2], path, line_no));
        r.converged.push_back(parse_double(row[3], path, line_no) != 0.0);
    }
    return r;
}

void write_manifest(const std::string& path, const RunManifest& manifest) {
    json j;
    j["tool_version"] = manifest.tool_version;
    j["subcommand"] = manifest.subcommand;
    j["seed"] = manifest.seed;
    j["argv"] = manifest.argv;
    j["resolved"] = manifest.resolved;
    j["outputs"] = manifest.outputs;
    write_file(path, j.dump(2) + "\n");
}

RunManifest read_manifest(const std::string& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw std::runtime_error(path + ": invalid JSON: " + e.what());
    }
    RunManifest m;
    m.tool_version = j.value("tool_version", "");
    m.subcommand = j.value("subcommand", "");
    m.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("argv")) m.argv = j["argv"].get<std::vector<std::string>>();
    if (j.contains("resolved"))
        m.resolved = j["resolved"].get<std::map<std::string, std::string>>();
    if (j.contains("outputs")) m.outputs = j["outputs"].get<std::vector<std::string>>();
    return m;
}

std::string format_figures_table(const device::DeviceParams& params,
                                 const device::FiguresOfMerit& fom) {
    std::ostringstream out;
    auto row = [&out](const char* name, double value, const char* unit) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "  %-22s %.6g %s\n", name, value, unit);
        out << buf;
    };
    out << "Device figures of merit\n";
    row("f_cavity", hz_from_rad(params.omega_c), "Hz");
    row("f_mech", hz_from_rad(params.Omega_m), "Hz");
    row("Q_mechanical", fom.q_mechanical, "");
    row("sideband_ratio", fom.sideband_ratio, "");
    row("cooling_factor", fom.cooling_factor, "");
    row("n_cavity", fom.n_cavity, "");
    row("n_mech", fom.n_mech, "");
    row("gamma_th/2pi", hz_from_rad(fom.gamma_th), "Hz");
    row("group_delay", fom.group_delay, "s");
    row("storage_time", fom.storage_time, "s");
    row("x_zp", fom.x_zp, "m");
    row("g0/2pi", hz_from_rad(fom.g0), "Hz");
    row("g0/pi", 2.0 * hz_from_rad(fom.g0), "Hz");
    return out.str();
}

std::string format_figures_json(const device::DeviceParams& params,
                                const device::FiguresOfMerit& fom) {
    json j;
    j["f_cavity_hz"] = hz_from_rad(params.omega_c);
    j["f_mech_hz"] = hz_from_rad(params.Omega_m);
    j["q_mechanical"] = fom.q_mechanical;
    j["sideband_ratio"] = fom.sideband_ratio;
    j["cooling_factor"] = fom.cooling_factor;
    j["n_cavity"] = fom.n_cavity;
    j["n_mech"] = fom.n_mech;
    j["gamma_th_hz"] = hz_from_rad(fom.gamma_th);
    j["group_delay_s"] = fom.group_delay;
    j["storage_time_s"] = fom.storage_time;
    j["x_zp_m"] = fom.x_zp;
    j["g0_over_2pi_hz"] = hz_from_rad(fom.g0);
    j["g0_over_pi_hz"] = 2.0 * hz_from_rad(fom.g0);
    return j.dump(2) + "\n";
}

} // namespace cavem::io
