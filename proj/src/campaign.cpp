#include "haloscan/campaign.hpp"

#include "haloscan/errors.hpp"
#include "haloscan/spectrum_io.hpp"

#include <json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace haloscan {
namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

const char* const kCalibrationLabels[] = {"meas1", "meas2", "meas3", "hot", "cold"};

std::string num17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json provenance(const CampaignConfig& c) {
    return json{{"config_sha256", c.hash}, {"seed", c.seed}};
}

std::string csv_provenance(const CampaignConfig& c) {
    return "# config_sha256=" + c.hash + " seed=" + std::to_string(c.seed) + "\n";
}

std::ofstream open_out(const fs::path& p) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream os(p, std::ios::binary);
    if (!os) throw IoError("cannot open " + p.string() + " for writing");
    return os;
}

void write_text(const fs::path& p, const std::string& text) {
    auto os = open_out(p);
    os << text;
    if (!os) throw IoError("write failed: " + p.string());
}

void write_json(const fs::path& p, const json& j) { write_text(p, j.dump(2) + "\n"); }

json read_json(const fs::path& p) {
    std::ifstream is(p);
    if (!is) throw IoError("missing artifact " + p.string());
    try {
        return json::parse(is);
    } catch (const json::exception& e) {
        throw IoError("malformed JSON in " + p.string() + ": " + e.what());
    }
}

std::string step_name(int step_id) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "step_%05d", step_id);
    return buf;
}

fs::path scan_dir(const fs::path& out, Stage stage) {
    return out / "spectra" / (stage == Stage::initial ? "initial" : "rescan");
}

std::vector<RawSpectrum> load_spectra_dir(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw IoError("missing spectra directory " + dir.string());
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.path().extension() == ".spec") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<RawSpectrum> out;
    out.reserve(files.size());
    for (const auto& f : files) out.push_back(load_spectrum(f));
    return out;
}

void reset_dir(const fs::path& dir) {
    fs::remove_all(dir);
    fs::create_directories(dir);
}

json cutlog_json(const CutLog& log, const CampaignConfig& c) {
    json entries = json::array();
    std::map<std::string, int> by_reason;
    for (const auto& e : log.entries) {
        entries.push_back({{"step_id", e.step_id}, {"pass", e.pass}, {"reason", e.reason}, {"value", e.value}});
        ++by_reason[e.reason];
    }
    return json{{"provenance", provenance(c)},
                {"n_input", log.n_input},
                {"n_kept", log.n_kept},
                {"n_cut", log.entries.size()},
                {"by_reason", by_reason},
                {"entries", entries}};
}

json calibration_json(const CalibrationResult& r) {
    return json{{"step_id", r.step_id},
                {"nu_c", r.nu_c},
                {"beta", r.beta},
                {"kappa_l", r.kappa_l},
                {"N_f", r.N_f},
                {"eta", r.eta},
                {"G_s", r.G_s_hat},
                {"G_s_sigma", r.G_s_sigma},
                {"S", r.S_hat},
                {"S_sigma", r.S_sigma},
                {"squeezing_db", -10.0 * std::log10(std::max(r.S_hat, 1e-300))},
                {"N_c0", r.N_c0_hat},
                {"N_c0_sigma", r.N_c0_sigma},
                {"N_A", r.N_A_hat},
                {"N_A_sigma", r.N_A_sigma},
                {"gain_db", r.gain_hat_db},
                {"gain_sigma_db", r.gain_sigma_db},
                {"squeezing_detected", r.squeezing_detected},
                {"cavity_noise_physical", r.cavity_noise_physical}};
}

CalibrationResult calibration_from_json(const json& j) {
    CalibrationResult r;
    r.step_id = j.at("step_id").get<int>();
    r.nu_c = j.at("nu_c").get<double>();
    r.beta = j.at("beta").get<double>();
    r.kappa_l = j.at("kappa_l").get<double>();
    r.N_f = j.at("N_f").get<double>();
    r.eta = j.at("eta").get<double>();
    r.G_s_hat = j.at("G_s").get<double>();
    r.G_s_sigma = j.at("G_s_sigma").get<double>();
    r.S_hat = j.at("S").get<double>();
    r.S_sigma = j.at("S_sigma").get<double>();
    r.N_c0_hat = j.at("N_c0").get<double>();
    r.N_c0_sigma = j.at("N_c0_sigma").get<double>();
    r.N_A_hat = j.at("N_A").get<double>();
    r.N_A_sigma = j.at("N_A_sigma").get<double>();
    r.gain_hat_db = j.at("gain_db").get<double>();
    r.gain_sigma_db = j.at("gain_sigma_db").get<double>();
    r.squeezing_detected = j.at("squeezing_detected").get<bool>();
    r.cavity_noise_physical = j.at("cavity_noise_physical").get<bool>();
    return r;
}

std::vector<CalibrationResult> load_calibrations(const fs::path& out) {
    const json j = read_json(out / "calibration.json");
    std::vector<CalibrationResult> cals;
    try {
        for (const auto& c : j.at("calibrations")) cals.push_back(calibration_from_json(c));
    } catch (const json::exception& e) {
        throw IoError(std::string("calibration.json: ") + e.what());
    }
    return cals;
}

void save_if_baseline(const fs::path& p, const IfBaseline& b, const CampaignConfig& c) {
    std::string s = csv_provenance(c);
    s += "# n_spectra=" + std::to_string(b.n_spectra) + "\n";
    s += "bin,shape,masked\n";
    for (std::size_t j = 0; j < b.shape.size(); ++j) {
        s += std::to_string(j) + "," + num17(b.shape[j]) + "," + std::to_string(int(b.masked[j])) + "\n";
    }
    write_text(p, s);
}

IfBaseline load_if_baseline(const fs::path& p) {
    std::ifstream is(p);
    if (!is) throw IoError("missing artifact " + p.string());
    IfBaseline b;
    std::string line;
    while (std::getline(is, line)) {
        if (line.rfind("# n_spectra=", 0) == 0) {
            b.n_spectra = std::stoi(line.substr(12));
            continue;
        }
        if (line.empty() || line[0] == '#' || line.rfind("bin,", 0) == 0) continue;
        std::istringstream row(line);
        std::string a, shape, masked;
        std::getline(row, a, ',');
        std::getline(row, shape, ',');
        std::getline(row, masked, ',');
        b.shape.push_back(std::strtod(shape.c_str(), nullptr));
        b.masked.push_back(static_cast<unsigned char>(std::stoi(masked)));
    }
    if (b.shape.empty()) throw IoError("empty IF baseline " + p.string());
    return b;
}

json candidates_json(std::span<const RescanCandidate> cands) {
    json a = json::array();
    for (const auto& c : cands) a.push_back({{"nu_hz", c.nu_hz}, {"x", c.x}, {"bin", c.bin}});
    return a;
}

void write_budget_csv(const fs::path& p, const NoiseBudget& b, const CampaignConfig& c,
                      const std::string& label) {
    std::string s = csv_provenance(c);
    s += "# " + label + "\n";
    s += "delta_hz,N_c,N_r,N_A,S_ax,alpha\n";
    for (std::size_t i = 0; i < b.detunings.size(); ++i) {
        s += num17(b.detunings[i]) + "," + num17(b.N_c[i]) + "," + num17(b.N_r[i]) + "," +
             num17(b.N_A[i]) + "," + num17(b.S_ax[i]) + "," + num17(b.alpha[i]) + "\n";
    }
    write_text(p, s);
}

}  // namespace

double grid_origin(const CampaignConfig& config, const TuningPlan& plan) {
    const auto& acq = config.setup.acquisition;
    double lowest = plan.steps.front().nu_c;
    for (const auto& s : plan.steps) lowest = std::min(lowest, s.nu_c);
    return lowest - static_cast<double>(acq.n_bins / 2) * acq.bin_width;
}

std::vector<double> coadd_kernel(const CampaignConfig& config) {
    LineshapeParams ls = config.setup.lineshape;
    ls.bin_width = config.setup.acquisition.bin_width;
    return lineshape_kernel(0.5 * (config.nu_lo + config.nu_hi), ls);
}

std::vector<CalibrationResult> calibrate_sets(std::span<const CalibrationSet> sets, double eta) {
    std::vector<CalibrationResult> out;
    out.reserve(sets.size());
    for (const auto& s : sets) out.push_back(calibrate(s, eta));
    return out;
}

ScanProducts process_scan(const CampaignConfig& config, std::vector<RawSpectrum> spectra,
                          const std::vector<CalibrationResult>& calibrations, double origin,
                          const IfBaseline* if_baseline) {
    ScanProducts out;
    CutResult cut = apply_cuts(std::move(spectra), config.cuts);
    out.cuts = std::move(cut.log);
    if (cut.kept.empty()) throw DomainError("every spectrum was cut; the campaign is empty");

    StructureRemoval sr = remove_structure(cut.kept, config.filters, if_baseline);
    cut.kept.clear();
    out.if_baseline = std::move(sr.if_baseline);
    for (const auto& p : sr.spectra) out.sigmas.push_back(p.sigma);

    const std::vector<double> kernel = coadd_kernel(config);
    const double bw = config.setup.acquisition.bin_width;
    out.transfer = filter_transfer(kernel, config.filters, bw, out.if_baseline.n_spectra, if_baseline == nullptr);

    const CombinedSpectrum combined = combine_spectra(sr.spectra, calibrations, config.snr_ref,
                                                      config.setup.lineshape, config.skips, origin);
    out.grand = coadd_grand(combined, kernel, out.transfer);
    if (!if_baseline) {
        out.candidates = flag_rescans(out.grand, config.rescan.threshold_sigma, lineshape_extent_bins(kernel));
    }
    return out;
}

std::vector<TuningStep> select_rescan_steps(const TuningPlan& plan,
                                            std::span<const RescanCandidate> candidates,
                                            double halfwidth) {
    std::vector<TuningStep> out;
    for (const auto& s : plan.steps) {
        const bool near = std::any_of(candidates.begin(), candidates.end(), [&](const RescanCandidate& c) {
            return std::abs(s.nu_c - c.nu_hz) <= halfwidth;
        });
        if (near) out.push_back(s);
    }
    return out;
}

ExclusionResult exclude_scans(const CampaignConfig& config, const GrandSpectrum& initial,
                              const GrandSpectrum* rescan) {
    std::vector<GrandSpectrum> rescans;
    if (rescan) rescans.push_back(*rescan);
    const AnalysedBins bins = analysed_bins(initial, rescans, config.analysis_window());
    return exclusion(bins.field, bins.nu, config.inference);
}

CampaignRun run_campaign(const CampaignConfig& config, const RunOptions& options) {
    CampaignRun run;
    run.plan = config.plan();
    const SimulationSetup& setup = config.setup;
    const double eta = setup.squeezing ? setup.receiver.eta : 1.0;
    run.calibrations = calibrate_sets(simulate_calibrations(setup, run.plan), eta);
    const double origin = grid_origin(config, run.plan);

    run.initial = process_scan(config, simulate_scan(setup, run.plan.steps, 0), run.calibrations, origin);

    if (options.rescans && (config.rescan.enabled || options.rescan_all_steps)) {
        run.rescan_steps = options.rescan_all_steps
                               ? run.plan.steps
                               : select_rescan_steps(run.plan, run.initial.candidates, config.rescan.halfwidth_hz);
        if (!run.rescan_steps.empty()) {
            run.rescan = process_scan(config, simulate_scan(setup, run.rescan_steps, 1), run.calibrations,
                                      origin, &run.initial.if_baseline);
        }
    }
    if (options.exclusion) {
        run.exclusion = exclude_scans(config, run.initial.grand, run.rescan ? &run.rescan->grand : nullptr);
    }
    return run;
}

EnhancementReport report_enhancement(double eta, double G_s, double N_c0, double N_f, double N_A,
                                     double eta_projection) {
    EnhancementReport r;
    r.S = delivered_squeezing(eta, G_s);
    const CouplingOptimum sq = optimize_coupling(r.S, N_c0, N_f, N_A);
    const CouplingOptimum un = optimize_coupling(1.0, N_c0, N_f, N_A);
    if (sq.at_boundary || un.at_boundary) {
        throw NumericError("enhancement: optimal coupling sits on the search boundary");
    }
    r.beta_squeezed = sq.beta;
    r.beta_unsqueezed = un.beta;
    r.rate_squeezed = sq.rate;
    r.rate_unsqueezed = un.rate;
    r.ratio = sq.rate / un.rate;
    r.projection_eta = eta_projection;
    r.projection_S = delivered_squeezing(eta_projection, G_s);
    const CouplingOptimum pr = optimize_coupling(r.projection_S, N_c0, N_f, N_A);
    r.projection_beta = pr.beta;
    r.projection_ratio = pr.rate / un.rate;
    return r;
}

EnhancementReport report_enhancement(const CampaignConfig& config) {
    const auto& s = config.setup;
    return report_enhancement(s.receiver.eta, s.receiver.G_s, s.receiver.N_c0,
                              thermal_quanta(config.nu_lo, s.base_temperature_k), s.receiver.N_A,
                              config.enhancement.eta_projection);
}

BudgetCurves budget_curves(const CampaignConfig& config) {
    const TuningStep step{0, config.nu_lo, config.setup.receiver.beta, 0};
    SimulationSetup squeezed = config.setup;
    squeezed.squeezing = true;
    const ReceiverParams sq = step_receiver(squeezed, step);
    ReceiverParams un = sq;
    un.G_s = 1.0;
    un.beta = config.budget.reference_beta;

    const double half = config.budget.span_linewidths * sq.loaded_linewidth();
    std::vector<double> d(static_cast<std::size_t>(config.budget.points));
    for (std::size_t i = 0; i < d.size(); ++i) {
        d[i] = -half + 2.0 * half * static_cast<double>(i) / static_cast<double>(d.size() - 1);
    }
    LineshapeParams ls = config.setup.lineshape;
    ls.bin_width = config.setup.acquisition.bin_width;
    const double peak = signal_peak(AxionHypothesis{config.nu_lo, 1.0, config.snr_ref}, ls);
    return BudgetCurves{noise_budget(sq, d, peak), noise_budget(un, d, peak)};
}

void save_grand(const fs::path& path, const GrandSpectrum& g, const CampaignConfig& config) {
    std::string s = csv_provenance(config);
    s += "# nu_start=" + num17(g.nu_start) + " bin_width=" + num17(g.bin_width) +
         " transfer=" + num17(g.transfer) + " noise_factor=" + num17(g.noise_factor) + "\n";
    s += "nu_hz,x,eta_sens,n_contrib\n";
    for (std::size_t i = 0; i < g.size(); ++i) {
        s += num17(g.nu_at(i)) + "," + (std::isnan(g.x[i]) ? std::string("nan") : num17(g.x[i])) + "," +
             num17(g.eta_sens[i]) + "," + std::to_string(g.n_contrib[i]) + "\n";
    }
    write_text(path, s);
}

GrandSpectrum load_grand(const fs::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("missing artifact " + path.string());
    GrandSpectrum g;
    bool have_grid = false;
    std::string line;
    while (std::getline(is, line)) {
        if (line.rfind("# nu_start=", 0) == 0) {
            std::istringstream hs(line.substr(2));
            std::string item;
            while (hs >> item) {
                const auto eq = item.find('=');
                const std::string k = item.substr(0, eq);
                const double v = std::strtod(item.c_str() + eq + 1, nullptr);
                if (k == "nu_start") g.nu_start = v;
                if (k == "bin_width") g.bin_width = v;
                if (k == "transfer") g.transfer = v;
                if (k == "noise_factor") g.noise_factor = v;
            }
            have_grid = true;
            continue;
        }
        if (line.empty() || line[0] == '#' || line.rfind("nu_hz", 0) == 0) continue;
        std::istringstream row(line);
        std::string nu, x, eta, n;
        std::getline(row, nu, ',');
        std::getline(row, x, ',');
        std::getline(row, eta, ',');
        std::getline(row, n, ',');
        g.x.push_back(std::strtod(x.c_str(), nullptr));
        g.eta_sens.push_back(std::strtod(eta.c_str(), nullptr));
        g.n_contrib.push_back(std::atoi(n.c_str()));
    }
    if (!have_grid || g.x.empty()) throw IoError("malformed grand spectrum " + path.string());
    return g;
}

namespace stages {

void simulate(const CampaignConfig& config, const fs::path& out, Stage stage) {
    const TuningPlan plan = config.plan();
    const SimulationSetup& setup = config.setup;
    if (stage == Stage::initial) {
        json steps = json::array();
        for (const auto& s : plan.steps) steps.push_back({{"step_id", s.step_id}, {"nu_c", s.nu_c}, {"beta", s.beta}});
        write_json(out / "plan.json", json{{"provenance", provenance(config)}, {"steps", steps}});

        const fs::path cal_dir = out / "spectra" / "calibration";
        reset_dir(cal_dir);
        const auto sets = simulate_calibrations(setup, plan);
        for (const auto& set : sets) {
            const RawSpectrum* parts[] = {&set.meas1, &set.meas2, &set.meas3, &set.hot, &set.cold};
            for (int k = 0; k < 5; ++k) {
                save_spectrum(cal_dir / (step_name(set.step_id) + "_" + kCalibrationLabels[k] + ".spec"),
                              *parts[k], config.encoding);
            }
        }
        spdlog::info("simulated {} calibration sets", sets.size());
    }

    std::vector<TuningStep> steps;
    if (stage == Stage::initial) {
        steps = plan.steps;
    } else {
        const json r = read_json(out / "rescans.json");
        std::map<int, TuningStep> by_id;
        for (const auto& s : plan.steps) by_id[s.step_id] = s;
        for (const auto& id : r.at("rescan_steps")) {
            const auto it = by_id.find(id.get<int>());
            if (it == by_id.end()) throw IoError("rescans.json names a step outside the plan");
            steps.push_back(it->second);
        }
    }
    const fs::path dir = scan_dir(out, stage);
    reset_dir(dir);
    const std::vector<RawSpectrum> spectra = simulate_scan(setup, steps, stage == Stage::initial ? 0 : 1);
    for (const auto& s : spectra) save_spectrum(dir / (step_name(s.step_id) + ".spec"), s, config.encoding);
    spdlog::info("simulated {} {} spectra", spectra.size(), stage == Stage::initial ? "initial" : "rescan");
}

void calibrate(const CampaignConfig& config, const fs::path& out) {
    const TuningPlan plan = config.plan();
    const fs::path dir = out / "spectra" / "calibration";
    const auto interval = static_cast<std::size_t>(config.setup.calibration_interval);
    const double eta = config.setup.squeezing ? config.setup.receiver.eta : 1.0;
    json list = json::array();
    for (std::size_t k = 0; k < plan.steps.size(); k += interval) {
        const int id = plan.steps[k].step_id;
        CalibrationSet set;
        set.step_id = id;
        set.meas1 = load_spectrum(dir / (step_name(id) + "_meas1.spec"));
        set.meas2 = load_spectrum(dir / (step_name(id) + "_meas2.spec"));
        set.meas3 = load_spectrum(dir / (step_name(id) + "_meas3.spec"));
        set.hot = load_spectrum(dir / (step_name(id) + "_hot.spec"));
        set.cold = load_spectrum(dir / (step_name(id) + "_cold.spec"));
        set.T_hot = set.hot.meta.load_temperature_k;
        set.T_cold = set.cold.meta.load_temperature_k;
        list.push_back(calibration_json(calibrate(set, eta)));
    }
    write_json(out / "calibration.json", json{{"provenance", provenance(config)}, {"calibrations", list}});
    spdlog::info("wrote {} calibrations", list.size());
}

void process(const CampaignConfig& config, const fs::path& out, Stage stage) {
    const TuningPlan plan = config.plan();
    const auto cals = load_calibrations(out);
    const double origin = grid_origin(config, plan);
    if (stage == Stage::initial) {
        const ScanProducts p = process_scan(config, load_spectra_dir(scan_dir(out, stage)), cals, origin);
        write_json(out / "cutlog.json", cutlog_json(p.cuts, config));
        save_if_baseline(out / "if_baseline.csv", p.if_baseline, config);
        save_grand(out / "grand_spectrum.csv", p.grand, config);
        std::vector<TuningStep> steps;
        if (config.rescan.enabled) steps = select_rescan_steps(plan, p.candidates, config.rescan.halfwidth_hz);
        json ids = json::array();
        for (const auto& s : steps) ids.push_back(s.step_id);
        write_json(out / "rescans.json", json{{"provenance", provenance(config)},
                                             {"threshold_sigma", config.rescan.threshold_sigma},
                                             {"candidates", candidates_json(p.candidates)},
                                             {"rescan_steps", ids}});
        spdlog::info("initial scan: {} kept of {}, {} candidates", p.cuts.n_kept, p.cuts.n_input,
                     p.candidates.size());
        return;
    }
    std::vector<RawSpectrum> spectra = load_spectra_dir(scan_dir(out, stage));
    fs::remove(out / "grand_spectrum_rescan.csv");
    if (spectra.empty()) {
        spdlog::info("no rescan spectra to process");
        return;
    }
    const IfBaseline ifb = load_if_baseline(out / "if_baseline.csv");
    const ScanProducts p = process_scan(config, std::move(spectra), cals, origin, &ifb);
    write_json(out / "cutlog_rescan.json", cutlog_json(p.cuts, config));
    save_grand(out / "grand_spectrum_rescan.csv", p.grand, config);
}

void exclude(const CampaignConfig& config, const fs::path& out) {
    const GrandSpectrum initial = load_grand(out / "grand_spectrum.csv");
    std::optional<GrandSpectrum> rescan;
    if (fs::exists(out / "grand_spectrum_rescan.csv")) rescan = load_grand(out / "grand_spectrum_rescan.csv");
    const ExclusionResult r = exclude_scans(config, initial, rescan ? &*rescan : nullptr);

    json windows = json::array();
    for (const auto& w : r.windows) {
        windows.push_back({{"nu_lo", w.nu_lo},
                           {"nu_hi", w.nu_hi},
                           {"n_bins", w.n_bins},
                           {"g_10pct", w.g_target ? json(*w.g_target) : json(nullptr)}});
    }
    write_json(out / "exclusion.json",
               json{{"provenance", provenance(config)},
                    {"target", r.target},
                    {"g_star", r.g_star ? json(*r.g_star) : json(nullptr)},
                    {"n_bins", r.n_bins},
                    {"rescans_included", rescan.has_value()},
                    {"g_grid", r.g_grid},
                    {"aggregate_U", r.aggregate_U},
                    {"windows", windows}});

    std::string u = csv_provenance(config) + "g,U\n";
    for (std::size_t k = 0; k < r.g_grid.size(); ++k) u += num17(r.g_grid[k]) + "," + num17(r.aggregate_U[k]) + "\n";
    write_text(out / "exclusion_U.csv", u);

    std::string wcsv = csv_provenance(config) + "window_lo,window_hi,g_10pct\n";
    std::string surf = csv_provenance(config) + "window_lo,window_hi";
    for (double g : r.g_grid) surf += "," + num17(g);
    surf += "\n";
    for (const auto& w : r.windows) {
        wcsv += num17(w.nu_lo) + "," + num17(w.nu_hi) + "," + (w.g_target ? num17(*w.g_target) : "nan") + "\n";
        surf += num17(w.nu_lo) + "," + num17(w.nu_hi);
        for (double v : w.U) surf += "," + num17(v);
        surf += "\n";
    }
    write_text(out / "exclusion_windows.csv", wcsv);
    write_text(out / "exclusion_surface.csv", surf);
    if (r.g_star) {
        spdlog::info("g_star = {:.4f}", *r.g_star);
    } else {
        spdlog::warn("aggregate update never crosses {} on the coupling grid", r.target);
    }
}

void budget(const CampaignConfig& config, const fs::path& out) {
    const BudgetCurves b = budget_curves(config);
    write_budget_csv(out / "budget_squeezed.csv", b.squeezed, config, "configured receiver");
    write_budget_csv(out / "budget_unsqueezed.csv", b.unsqueezed, config,
                     "S = 1, beta = " + num17(config.budget.reference_beta));
}

void enhancement(const CampaignConfig& config, const fs::path& out) {
    const EnhancementReport r = report_enhancement(config);
    write_json(out / "enhancement.json",
               json{{"provenance", provenance(config)},
                    {"S", r.S},
                    {"beta_star_squeezed", r.beta_squeezed},
                    {"beta_star_unsqueezed", r.beta_unsqueezed},
                    {"rate_squeezed", r.rate_squeezed},
                    {"rate_unsqueezed", r.rate_unsqueezed},
                    {"ratio", r.ratio},
                    {"projection", {{"eta", r.projection_eta},
                                    {"S", r.projection_S},
                                    {"beta_star", r.projection_beta},
                                    {"ratio", r.projection_ratio}}}});
    spdlog::info("scan-rate enhancement {:.3f} (beta* {:.2f} vs {:.2f})", r.ratio, r.beta_squeezed,
                 r.beta_unsqueezed);
}

void all(const CampaignConfig& config, const fs::path& out) {
    simulate(config, out, Stage::initial);
    calibrate(config, out);
    process(config, out, Stage::initial);
    simulate(config, out, Stage::rescan);
    process(config, out, Stage::rescan);
    exclude(config, out);
    budget(config, out);
    enhancement(config, out);
}

}  // namespace stages
}  // namespace haloscan
