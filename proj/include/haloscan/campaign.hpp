#pragma once

// Stage orchestration: simulate -> calibrate -> process -> (rescan) -> exclude,
// either in memory or through the artifact directory.

#include "haloscan/calibration.hpp"
#include "haloscan/config.hpp"
#include "haloscan/inference.hpp"
#include "haloscan/pipeline.hpp"

#include <filesystem>
#include <optional>
#include <vector>

namespace haloscan {

enum class Stage { initial, rescan };

struct ScanProducts {
    CutLog cuts;
    IfBaseline if_baseline;
    FilterTransfer transfer;
    GrandSpectrum grand;
    std::vector<RescanCandidate> candidates;
    std::vector<double> sigmas;  // per processed spectrum
};

// Lower edge of bin 0 of every combined/grand spectrum of the campaign.
double grid_origin(const CampaignConfig& config, const TuningPlan& plan);

// Coadd kernel, evaluated at the centre of the scanned range.
std::vector<double> coadd_kernel(const CampaignConfig& config);

std::vector<CalibrationResult> calibrate_sets(std::span<const CalibrationSet> sets, double eta);

// Cuts, structure removal, combination and coadd of one scan pass. An initial
// pass estimates the IF baseline and flags candidates; a rescan pass reuses
// if_baseline and leaves the IF stage out of the transfer.
ScanProducts process_scan(const CampaignConfig& config, std::vector<RawSpectrum> spectra,
                          const std::vector<CalibrationResult>& calibrations, double origin,
                          const IfBaseline* if_baseline = nullptr);

// Plan steps whose cavity frequency lies within halfwidth of any candidate.
std::vector<TuningStep> select_rescan_steps(const TuningPlan& plan,
                                            std::span<const RescanCandidate> candidates,
                                            double halfwidth);

ExclusionResult exclude_scans(const CampaignConfig& config, const GrandSpectrum& initial,
                              const GrandSpectrum* rescan);

struct RunOptions {
    bool rescans = true;
    bool rescan_all_steps = false;  // repeat every step instead of the candidate footprint
    bool exclusion = true;
};

struct CampaignRun {
    TuningPlan plan;
    std::vector<CalibrationResult> calibrations;
    ScanProducts initial;
    std::vector<TuningStep> rescan_steps;
    std::optional<ScanProducts> rescan;
    std::optional<ExclusionResult> exclusion;
};

CampaignRun run_campaign(const CampaignConfig& config, const RunOptions& options = {});

struct EnhancementReport {
    double S = 1.0;
    double beta_squeezed = 0.0;
    double beta_unsqueezed = 0.0;
    double rate_squeezed = 0.0;
    double rate_unsqueezed = 0.0;
    double ratio = 1.0;
    double projection_eta = 0.0;
    double projection_S = 1.0;
    double projection_beta = 0.0;
    double projection_ratio = 1.0;
};

// Squeezed branch at S = eta G_s + 1 - eta, unsqueezed at S = 1, each at its
// own optimal coupling; the projection repeats the squeezed branch at
// eta_projection.
EnhancementReport report_enhancement(double eta, double G_s, double N_c0, double N_f, double N_A,
                                     double eta_projection);
EnhancementReport report_enhancement(const CampaignConfig& config);

struct BudgetCurves {
    NoiseBudget squeezed;    // configured receiver
    NoiseBudget unsqueezed;  // S = 1 at the reference coupling
};

BudgetCurves budget_curves(const CampaignConfig& config);

// Disk-backed stages. Each reads what earlier stages persisted under out.
namespace stages {
void simulate(const CampaignConfig& config, const std::filesystem::path& out, Stage stage);
void calibrate(const CampaignConfig& config, const std::filesystem::path& out);
void process(const CampaignConfig& config, const std::filesystem::path& out, Stage stage);
void exclude(const CampaignConfig& config, const std::filesystem::path& out);
void budget(const CampaignConfig& config, const std::filesystem::path& out);
void enhancement(const CampaignConfig& config, const std::filesystem::path& out);
void all(const CampaignConfig& config, const std::filesystem::path& out);
}  // namespace stages

// Grand spectrum CSV (nu_hz, x, eta_sens, n_contrib) with '#' header lines.
void save_grand(const std::filesystem::path& path, const GrandSpectrum& grand,
                const CampaignConfig& config);
GrandSpectrum load_grand(const std::filesystem::path& path);

}  // namespace haloscan
