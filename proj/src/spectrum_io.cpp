#include "haloscan/spectrum_io.hpp"

#include "haloscan/errors.hpp"

#include <bit>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace haloscan {
namespace {

static_assert(std::endian::native == std::endian::little, "binary spectra assume little-endian hosts");

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(const std::string& key, const std::string& text) {
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (end == text.c_str() || *end != '\0') {
        throw IoError("spectrum header: bad number for '" + key + "': " + text);
    }
    return v;
}

// Header entries, in file order.
std::vector<std::pair<std::string, std::string>> header_fields(const RawSpectrum& s) {
    const SpectrumMeta& m = s.meta;
    return {
        {"step_id", std::to_string(s.step_id)},
        {"label", s.label},
        {"nu_start", fmt(s.nu_start)},
        {"bin_width", fmt(s.bin_width)},
        {"n_averages", std::to_string(s.n_averages)},
        {"n_bins", std::to_string(s.psd.size())},
        {"meta.nu_c", fmt(m.nu_c)},
        {"meta.beta", fmt(m.beta)},
        {"meta.Q_L", fmt(m.Q_L)},
        {"meta.drift_hz", fmt(m.drift_hz)},
        {"meta.probe_power_db", fmt(m.probe_power_db)},
        {"meta.squeezing_db", fmt(m.squeezing_db)},
        {"meta.cavity_offset_hz", fmt(m.cavity_offset_hz)},
        {"meta.load_temperature_k", fmt(m.load_temperature_k)},
        {"meta.acquisition_time_s", fmt(m.acquisition_time_s)},
        {"meta.squeezer_on", std::to_string(m.squeezer_on)},
        {"meta.anomaly", std::to_string(m.anomaly)},
        {"meta.pass", std::to_string(m.pass)},
    };
}

}  // namespace

void write_spectrum(std::ostream& os, const RawSpectrum& s, SpectrumEncoding encoding) {
    os << "haloscan-spectrum " << kSpectrumFormatVersion << '\n';
    os << "encoding " << (encoding == SpectrumEncoding::binary ? "binary" : "text") << '\n';
    for (const auto& [k, v] : header_fields(s)) os << k << ' ' << v << '\n';
    os << "end_header\n";
    if (encoding == SpectrumEncoding::binary) {
        os.write(reinterpret_cast<const char*>(s.psd.data()),
                 static_cast<std::streamsize>(s.psd.size() * sizeof(double)));
    } else {
        for (double v : s.psd) os << fmt(v) << '\n';
    }
    if (!os) throw IoError("write_spectrum: stream failure");
}

RawSpectrum read_spectrum(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw IoError("read_spectrum: empty input");
    {
        std::istringstream magic(line);
        std::string word;
        int version = 0;
        magic >> word >> version;
        if (word != "haloscan-spectrum") throw IoError("read_spectrum: not a spectrum file");
        if (version != kSpectrumFormatVersion) {
            throw IoError("read_spectrum: unsupported format version " + std::to_string(version));
        }
    }
    std::map<std::string, std::string> kv;
    bool terminated = false;
    while (std::getline(is, line)) {
        if (line == "end_header") {
            terminated = true;
            break;
        }
        const auto sp = line.find(' ');
        if (sp == std::string::npos) throw IoError("read_spectrum: malformed header line: " + line);
        kv[line.substr(0, sp)] = line.substr(sp + 1);
    }
    if (!terminated) throw IoError("read_spectrum: header not terminated");
    auto get = [&](const std::string& k) -> const std::string& {
        const auto it = kv.find(k);
        if (it == kv.end()) throw IoError("read_spectrum: missing header key " + k);
        return it->second;
    };
    auto num = [&](const std::string& k) { return parse_double(k, get(k)); };
    auto integer = [&](const std::string& k) { return static_cast<long long>(num(k)); };

    RawSpectrum s;
    s.step_id = static_cast<int>(integer("step_id"));
    s.label = get("label");
    s.nu_start = num("nu_start");
    s.bin_width = num("bin_width");
    s.n_averages = integer("n_averages");
    SpectrumMeta& m = s.meta;
    m.nu_c = num("meta.nu_c");
    m.beta = num("meta.beta");
    m.Q_L = num("meta.Q_L");
    m.drift_hz = num("meta.drift_hz");
    m.probe_power_db = num("meta.probe_power_db");
    m.squeezing_db = num("meta.squeezing_db");
    m.cavity_offset_hz = num("meta.cavity_offset_hz");
    m.load_temperature_k = num("meta.load_temperature_k");
    m.acquisition_time_s = num("meta.acquisition_time_s");
    m.squeezer_on = static_cast<int>(integer("meta.squeezer_on"));
    m.anomaly = static_cast<int>(integer("meta.anomaly"));
    m.pass = static_cast<int>(integer("meta.pass"));

    const auto n = static_cast<std::size_t>(integer("n_bins"));
    s.psd.resize(n);
    const std::string& encoding = get("encoding");
    if (encoding == "binary") {
        is.read(reinterpret_cast<char*>(s.psd.data()), static_cast<std::streamsize>(n * sizeof(double)));
        if (static_cast<std::size_t>(is.gcount()) != n * sizeof(double)) {
            throw IoError("read_spectrum: truncated binary payload");
        }
    } else if (encoding == "text") {
        for (std::size_t j = 0; j < n; ++j) {
            if (!std::getline(is, line)) throw IoError("read_spectrum: truncated text payload");
            s.psd[j] = parse_double("psd", line);
        }
    } else {
        throw IoError("read_spectrum: unknown encoding " + encoding);
    }
    return s;
}

void save_spectrum(const std::filesystem::path& path, const RawSpectrum& s, SpectrumEncoding encoding) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    write_spectrum(os, s, encoding);
}

RawSpectrum load_spectrum(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string());
    return read_spectrum(is);
}

}  // namespace haloscan
