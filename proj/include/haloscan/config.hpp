#pragma once

// Campaign configuration: an INI file with the sections and keys listed by
// config_schema(). Keys not in the schema are rejected; absent keys take the
// documented default.

#include "haloscan/campaign_sim.hpp"
#include "haloscan/inference.hpp"
#include "haloscan/pipeline.hpp"
#include "haloscan/spectrum_io.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace haloscan {

struct ConfigKey {
    const char* section;
    const char* key;
    const char* default_value;
    const char* doc;
};

const std::vector<ConfigKey>& config_schema();

struct RescanSettings {
    bool enabled = true;
    double threshold_sigma = 3.455;
    double halfwidth_hz = 500.0e3;  // plan steps within this distance of a candidate are repeated
};

struct BudgetSettings {
    double span_linewidths = 5.0;
    int points = 401;
    double reference_beta = 2.0;  // unsqueezed comparison curve
};

struct EnhancementSettings {
    double eta_projection = 0.9;
};

struct CampaignConfig {
    std::uint64_t seed = 0;
    double nu_lo = 0.0;
    double nu_hi = 0.0;
    double step_hz = 0.0;
    std::vector<FrequencyWindow> skips;
    std::filesystem::path output_dir;

    SimulationSetup setup;
    double snr_ref = 1.0;
    double baseline_excursion = 0.3;
    bool baseline_flat = false;

    CutCriteria cuts;
    FilterSettings filters;
    RescanSettings rescan;
    ExclusionSettings inference;
    SpectrumEncoding encoding = SpectrumEncoding::binary;
    BudgetSettings budget;
    EnhancementSettings enhancement;

    // Every key with its resolved value, in schema order.
    std::vector<std::pair<std::string, std::string>> resolved;
    // "section.key=value" lines of resolved; its SHA-256 is the provenance hash.
    std::string canonical;
    std::string hash;

    TuningPlan plan() const;
    FrequencyWindow analysis_window() const { return {nu_lo, nu_hi}; }
};

// Throws ConfigError (missing file, syntax, unknown key, bad value).
CampaignConfig load_config(const std::filesystem::path& path);
CampaignConfig parse_config(std::istream& is);

// Re-seeds and recomputes canonical form and hash.
void override_seed(CampaignConfig& config, std::uint64_t seed);

std::string sha256_hex(const std::string& data);

}  // namespace haloscan
