#include "haloscan/config.hpp"

#include "haloscan/errors.hpp"
#include "haloscan/rng.hpp"

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <openssl/evp.h>

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>

namespace haloscan {
namespace {

constexpr std::uint64_t kBaselineLabel = 0xBA5E;

const std::vector<ConfigKey> kSchema = {
    {"campaign", "seed", "20200101", "master seed; every random stream derives from it"},
    {"campaign", "nu_lo_hz", "4.100e9", "first cavity frequency of the tuning plan"},
    {"campaign", "nu_hi_hz", "4.104165e9", "last cavity frequency (inclusive); default gives 50 steps"},
    {"campaign", "step_hz", "85000", "cavity step between acquisitions"},
    {"campaign", "skip", "", "comma-separated lo:hi windows (Hz) with no steps and no analysed bins"},
    {"campaign", "output_dir", "haloscan_out", "artifact directory (overridden by --out)"},

    {"acquisition", "tau_s", "3600", "integration time per step"},
    {"acquisition", "bin_width_hz", "100", "spectral resolution; FFT segments are 1/bin_width long"},
    {"acquisition", "n_bins", "30000", "bins per spectrum"},
    {"acquisition", "literal_segments", "0", ">0 builds spectra from this many FFT'd white-noise segments"},

    {"receiver", "unloaded_q", "47000", "cavity internal Q; kappa_l = nu_c / Q"},
    {"receiver", "beta", "7.1", "measurement-port coupling kappa_m / kappa_l"},
    {"receiver", "N_c0", "0.41", "cavity-internal noise, quanta"},
    {"receiver", "base_temperature_k", "0.061", "sets the input-line noise N_f and the cold load"},
    {"receiver", "eta", "0.63", "squeezer-to-amplifier transmissivity"},
    {"receiver", "G_s", "0.047619047619047616", "squeezer output variance ratio"},
    {"receiver", "N_A", "0.03", "added noise at the amplifier input, quanta"},
    {"receiver", "G_A_db", "28", "amplifier gain"},
    {"receiver", "squeezing", "true", "false forces G_s = 1"},

    {"calibration", "interval", "9", "calibrate every this many steps"},
    {"calibration", "hot_load_k", "0.333", "hot load temperature"},
    {"calibration", "offset_linewidths", "10", "off-resonance detuning of measurement 1, loaded linewidths"},

    {"baseline", "flat", "false", "true disables all baseline structure"},
    {"baseline", "excursion", "0.3", "summed amplitude of the shared IF cosines"},
    {"baseline", "per_step_amplitude", "0.03", "summed amplitude of the per-step slow cosines"},

    {"anomalies", "rate", "0", "probability that a step carries an anomaly"},
    {"anomalies", "drift_hz", "200000", "cavity drift of a drift anomaly"},
    {"anomalies", "sag_G_s", "0.8", "squeezer output during a gain sag"},
    {"anomalies", "probe_offset_db", "-3", "probe power excursion of a power anomaly"},

    {"axion", "snr_ref", "1.98", "matched-filter SNR per g^2 of one reference spectrum (full absorption, vacuum noise)"},
    {"axion", "velocity_dispersion_kms", "270", "lineshape width parameter"},
    {"axion", "span_bins", "512", "lineshape kernel length"},
    {"axion", "inject", "", "comma-separated nu_hz:g injected signals"},

    {"cuts", "max_drift_hz", "20000", "drift above this cuts a spectrum"},
    {"cuts", "min_squeezing_db", "1.0", "measured squeezing below this cuts a spectrum (squeezing runs only)"},
    {"cuts", "probe_window_db", "1.0", "allowed probe power deviation"},

    {"filters", "if_window_hz", "10000", "IF Savitzky-Golay window"},
    {"filters", "if_order", "4", "IF Savitzky-Golay order"},
    {"filters", "rf_window_hz", "100000", "RF Savitzky-Golay window"},
    {"filters", "rf_order", "4", "RF Savitzky-Golay order"},
    {"filters", "if_spike_sigma", "6", "IF bins deviating more than this are masked"},
    {"filters", "edge_trim_hz", "50000", "dropped at both ends of each spectrum"},

    {"rescan", "enabled", "true", "repeat steps around candidates"},
    {"rescan", "threshold_sigma", "3.455", "candidate threshold on x"},
    {"rescan", "halfwidth_hz", "500000", "steps within this distance of a candidate are repeated"},

    {"inference", "g_min", "0.5", "coupling grid start, KSVZ units"},
    {"inference", "g_max", "5", "coupling grid end"},
    {"inference", "n_grid", "200", "log-spaced grid points"},
    {"inference", "target", "0.1", "aggregate update defining g_star"},
    {"inference", "n_windows", "100", "subaggregation windows"},

    {"output", "spectrum_encoding", "binary", "binary or text"},

    {"budget", "span_linewidths", "5", "detuning half-range in loaded linewidths"},
    {"budget", "points", "401", "detuning samples"},
    {"budget", "reference_beta", "2.0", "coupling of the unsqueezed comparison curve"},

    {"enhancement", "eta_projection", "0.9", "transmissivity of the projected improvement"},
};

class Values {
public:
    explicit Values(const std::map<std::string, std::string>& v) : v_(v) {}

    const std::string& str(const std::string& k) const { return v_.at(k); }

    double num(const std::string& k) const {
        const std::string& s = str(k);
        char* end = nullptr;
        errno = 0;
        const double d = std::strtod(s.c_str(), &end);
        if (s.empty() || *end != '\0' || errno == ERANGE || !std::isfinite(d)) {
            throw ConfigError(k + ": expected a number, got '" + s + "'");
        }
        return d;
    }

    int integer(const std::string& k) const {
        const double d = num(k);
        if (d != std::floor(d) || std::abs(d) > 2.0e9) throw ConfigError(k + ": expected an integer");
        return static_cast<int>(d);
    }

    std::uint64_t u64(const std::string& k) const {
        const std::string& s = str(k);
        char* end = nullptr;
        errno = 0;
        const unsigned long long u = std::strtoull(s.c_str(), &end, 10);
        if (s.empty() || s[0] == '-' || *end != '\0' || errno == ERANGE) {
            throw ConfigError(k + ": expected an unsigned integer, got '" + s + "'");
        }
        return u;
    }

    bool flag(const std::string& k) const {
        const std::string s = boost::algorithm::to_lower_copy(str(k));
        if (s == "true" || s == "yes" || s == "1" || s == "on") return true;
        if (s == "false" || s == "no" || s == "0" || s == "off") return false;
        throw ConfigError(k + ": expected a boolean, got '" + str(k) + "'");
    }

    // "a:b, c:d" -> {(a, b), (c, d)}
    std::vector<std::pair<double, double>> pairs(const std::string& k) const {
        std::vector<std::pair<double, double>> out;
        const std::string& s = str(k);
        if (boost::algorithm::trim_copy(s).empty()) return out;
        std::vector<std::string> items;
        boost::algorithm::split(items, s, boost::is_any_of(","));
        for (auto item : items) {
            boost::algorithm::trim(item);
            std::vector<std::string> parts;
            boost::algorithm::split(parts, item, boost::is_any_of(":"));
            if (parts.size() != 2) throw ConfigError(k + ": expected a:b items, got '" + item + "'");
            std::map<std::string, std::string> tmp{{"a", boost::algorithm::trim_copy(parts[0])},
                                                   {"b", boost::algorithm::trim_copy(parts[1])}};
            Values sub(tmp);
            try {
                out.emplace_back(sub.num("a"), sub.num("b"));
            } catch (const ConfigError&) {
                throw ConfigError(k + ": bad number in '" + item + "'");
            }
        }
        return out;
    }

private:
    const std::map<std::string, std::string>& v_;
};

void require(bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
}

void build(CampaignConfig& c) {
    std::map<std::string, std::string> m(c.resolved.begin(), c.resolved.end());
    const Values v(m);

    c.seed = v.u64("campaign.seed");
    c.nu_lo = v.num("campaign.nu_lo_hz");
    c.nu_hi = v.num("campaign.nu_hi_hz");
    c.step_hz = v.num("campaign.step_hz");
    require(c.nu_lo > 0 && c.nu_hi >= c.nu_lo, "campaign: need 0 < nu_lo_hz <= nu_hi_hz");
    require(c.step_hz > 0, "campaign.step_hz must be positive");
    c.skips.clear();
    for (auto [lo, hi] : v.pairs("campaign.skip")) {
        require(lo < hi, "campaign.skip: window with lo >= hi");
        c.skips.push_back({lo, hi});
    }
    c.output_dir = v.str("campaign.output_dir");

    SimulationSetup& s = c.setup;
    s = SimulationSetup{};
    AcquisitionSettings& acq = s.acquisition;
    acq.tau_s = v.num("acquisition.tau_s");
    acq.bin_width = v.num("acquisition.bin_width_hz");
    require(acq.bin_width > 0, "acquisition.bin_width_hz must be positive");
    acq.segment_s = 1.0 / acq.bin_width;
    const int n_bins = v.integer("acquisition.n_bins");
    require(n_bins >= 16, "acquisition.n_bins must be at least 16");
    acq.n_bins = static_cast<std::size_t>(n_bins);
    s.literal_segments = v.integer("acquisition.literal_segments");
    require(s.literal_segments >= 0, "acquisition.literal_segments must be >= 0");

    ReceiverParams& rx = s.receiver;
    s.unloaded_q = v.num("receiver.unloaded_q");
    require(s.unloaded_q > 0, "receiver.unloaded_q must be positive");
    rx.beta = v.num("receiver.beta");
    rx.N_c0 = v.num("receiver.N_c0");
    s.base_temperature_k = v.num("receiver.base_temperature_k");
    require(s.base_temperature_k >= 0, "receiver.base_temperature_k must be >= 0");
    rx.eta = v.num("receiver.eta");
    rx.G_s = v.num("receiver.G_s");
    rx.N_A = v.num("receiver.N_A");
    rx.G_A_db = v.num("receiver.G_A_db");
    s.squeezing = v.flag("receiver.squeezing");
    rx.nu_c = c.nu_lo;
    rx.kappa_l = c.nu_lo / s.unloaded_q;
    rx.N_f = thermal_quanta(c.nu_lo, s.base_temperature_k);
    try {
        rx.validate();
        acq.validate();
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }

    s.calibration_interval = v.integer("calibration.interval");
    require(s.calibration_interval >= 1, "calibration.interval must be >= 1");
    s.hot_load_k = v.num("calibration.hot_load_k");
    require(s.hot_load_k > s.base_temperature_k, "calibration.hot_load_k must exceed the base temperature");
    s.calibration_offset_linewidths = v.num("calibration.offset_linewidths");
    require(s.calibration_offset_linewidths > 0, "calibration.offset_linewidths must be positive");

    c.baseline_flat = v.flag("baseline.flat");
    c.baseline_excursion = v.num("baseline.excursion");
    require(c.baseline_excursion >= 0 && c.baseline_excursion < 1, "baseline.excursion must lie in [0, 1)");
    if (c.baseline_flat) {
        s.baseline = BaselineModel::flat();
    } else {
        s.baseline = BaselineModel::generate(derive_seed(c.seed, {kBaselineLabel}), c.baseline_excursion);
        s.baseline.per_step_amplitude = v.num("baseline.per_step_amplitude");
        require(s.baseline.per_step_amplitude >= 0 && s.baseline.per_step_amplitude < 1,
                "baseline.per_step_amplitude must lie in [0, 1)");
    }

    AnomalySettings& an = s.anomalies;
    an.rate = v.num("anomalies.rate");
    require(an.rate >= 0 && an.rate <= 1, "anomalies.rate must lie in [0, 1]");
    an.drift_hz = v.num("anomalies.drift_hz");
    an.sag_G_s = v.num("anomalies.sag_G_s");
    an.probe_offset_db = v.num("anomalies.probe_offset_db");

    c.snr_ref = v.num("axion.snr_ref");
    require(c.snr_ref > 0, "axion.snr_ref must be positive");
    s.lineshape.velocity_dispersion_kms = v.num("axion.velocity_dispersion_kms");
    s.lineshape.span_bins = v.integer("axion.span_bins");
    s.lineshape.bin_width = acq.bin_width;
    try {
        s.lineshape.validate();
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    s.injections.clear();
    for (auto [nu, g] : v.pairs("axion.inject")) {
        AxionHypothesis h{nu, g, c.snr_ref};
        try {
            h.validate();
        } catch (const DomainError& e) {
            throw ConfigError(std::string("axion.inject: ") + e.what());
        }
        s.injections.push_back(h);
    }

    c.cuts.max_drift_hz = v.num("cuts.max_drift_hz");
    c.cuts.min_squeezing_db = v.num("cuts.min_squeezing_db");
    c.cuts.probe_window_db = v.num("cuts.probe_window_db");
    c.cuts.squeezing_expected = s.squeezing;

    c.filters.if_window_hz = v.num("filters.if_window_hz");
    c.filters.if_order = v.integer("filters.if_order");
    c.filters.rf_window_hz = v.num("filters.rf_window_hz");
    c.filters.rf_order = v.integer("filters.rf_order");
    c.filters.if_spike_sigma = v.num("filters.if_spike_sigma");
    c.filters.edge_trim_hz = v.num("filters.edge_trim_hz");
    try {
        c.filters.validate(acq.bin_width, acq.n_bins);
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }

    c.rescan.enabled = v.flag("rescan.enabled");
    c.rescan.threshold_sigma = v.num("rescan.threshold_sigma");
    c.rescan.halfwidth_hz = v.num("rescan.halfwidth_hz");
    require(c.rescan.halfwidth_hz >= 0, "rescan.halfwidth_hz must be >= 0");

    c.inference.g_min = v.num("inference.g_min");
    c.inference.g_max = v.num("inference.g_max");
    c.inference.n_grid = v.integer("inference.n_grid");
    c.inference.target = v.num("inference.target");
    c.inference.n_windows = v.integer("inference.n_windows");
    try {
        c.inference.validate();
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }

    const std::string enc = v.str("output.spectrum_encoding");
    if (enc == "binary") {
        c.encoding = SpectrumEncoding::binary;
    } else if (enc == "text") {
        c.encoding = SpectrumEncoding::text;
    } else {
        throw ConfigError("output.spectrum_encoding must be binary or text");
    }

    c.budget.span_linewidths = v.num("budget.span_linewidths");
    c.budget.points = v.integer("budget.points");
    c.budget.reference_beta = v.num("budget.reference_beta");
    require(c.budget.span_linewidths > 0 && c.budget.points >= 2 && c.budget.reference_beta > 0,
            "budget: need positive span, >= 2 points and positive reference_beta");

    c.enhancement.eta_projection = v.num("enhancement.eta_projection");
    require(c.enhancement.eta_projection > 0 && c.enhancement.eta_projection <= 1,
            "enhancement.eta_projection must lie in (0, 1]");

    c.canonical.clear();
    for (const auto& [k, val] : c.resolved) c.canonical += k + "=" + val + "\n";
    c.hash = sha256_hex(c.canonical);
}

}  // namespace

const std::vector<ConfigKey>& config_schema() { return kSchema; }

std::string sha256_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw NumericError("sha256 failed");
    }
    std::string hex;
    char buf[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", digest[i]);
        hex += buf;
    }
    return hex;
}

TuningPlan CampaignConfig::plan() const {
    try {
        return make_tuning_plan(nu_lo, nu_hi, step_hz, skips, setup.receiver.beta, seed,
                                setup.acquisition.bin_width);
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
}

CampaignConfig parse_config(std::istream& is) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::ini_parser::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config syntax: ") + e.what());
    }
    std::map<std::string, std::string> given;
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty()) {
            throw ConfigError("config: key '" + section + "' outside any section");
        }
        for (const auto& [key, value] : body) {
            given[section + "." + key] = boost::algorithm::trim_copy(value.data());
        }
    }
    std::set<std::string> known;
    CampaignConfig c;
    for (const auto& k : kSchema) {
        const std::string full = std::string(k.section) + "." + k.key;
        known.insert(full);
        const auto it = given.find(full);
        c.resolved.emplace_back(full, it == given.end() ? std::string(k.default_value) : it->second);
    }
    for (const auto& [k, _] : given) {
        if (!known.count(k)) throw ConfigError("config: unknown key '" + k + "'");
    }
    build(c);
    return c;
}

CampaignConfig load_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot read config file " + path.string());
    return parse_config(is);
}

void override_seed(CampaignConfig& config, std::uint64_t seed) {
    for (auto& [k, v] : config.resolved) {
        if (k == "campaign.seed") v = std::to_string(seed);
    }
    build(config);
}

}  // namespace haloscan
