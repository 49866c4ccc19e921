// haloscan: campaign driver.
//
//   haloscan <simulate|calibrate|process|exclude|budget|enhancement|all>
//            --config FILE [--out DIR] [--seed-override N] [--threads N]
//            [--stage initial|rescan]
//
// Exit codes: 0 ok, 2 config, 3 numeric failure, 4 I/O. Failures print one
// JSON object on stderr and leave status.json marked "partial" in DIR.

#include "haloscan/campaign.hpp"
#include "haloscan/config.hpp"
#include "haloscan/errors.hpp"
#include "haloscan/simd/kernels.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <omp.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

enum Exit { kOk = 0, kConfig = 2, kNumeric = 3, kIo = 4 };

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

void setup_logging() {
    auto logger = spdlog::stderr_color_mt("haloscan");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::info);
    if (const char* env = std::getenv("HALOSCAN_LOG")) {
        spdlog::set_level(spdlog::level::from_str(env));
    }
}

int fail(int code, const std::string& kind, const std::string& message, const std::string& command,
         const fs::path* out) {
    const json err{{"error", kind}, {"message", message}, {"command", command}, {"exit_code", code}};
    std::cerr << err.dump() << "\n";
    if (out && fs::is_directory(*out)) {
        std::ofstream os(*out / "status.json");
        os << json{{"status", "partial"}, {"command", command}, {"error", kind}, {"message", message}}.dump(2)
           << "\n";
    }
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    setup_logging();

    CLI::App app{"Squeezed-state haloscope campaign simulator and analysis chain"};
    app.require_subcommand(1, 1);
    app.fallthrough();
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    int threads = 0;
    std::string stage_name = "initial";
    app.add_option("--config", config_path, "campaign INI file")->required();
    app.add_option("--out", out_dir, "artifact directory (default: campaign.output_dir)");
    auto* seed_opt = app.add_option("--seed-override", seed, "replace campaign.seed");
    app.add_option("--threads", threads, "worker threads (default: OpenMP default)")->check(CLI::PositiveNumber);
    app.add_option("--stage", stage_name, "scan pass for simulate/process")
        ->check(CLI::IsMember({"initial", "rescan"}));
    for (const char* name : {"simulate", "calibrate", "process", "exclude", "budget", "enhancement", "all"}) {
        app.add_subcommand(name);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail(kConfig, "usage", e.what(), "", nullptr);
    }
    const std::string command = app.get_subcommands().front()->get_name();
    const haloscan::Stage stage = stage_name == "rescan" ? haloscan::Stage::rescan : haloscan::Stage::initial;

    haloscan::CampaignConfig config;
    try {
        config = haloscan::load_config(config_path);
        if (*seed_opt) haloscan::override_seed(config, seed);
    } catch (const haloscan::ConfigError& e) {
        return fail(kConfig, "config", e.what(), command, nullptr);
    } catch (const std::exception& e) {
        return fail(kConfig, "config", e.what(), command, nullptr);
    }
    if (threads > 0) omp_set_num_threads(threads);

    const fs::path out = out_dir.empty() ? config.output_dir : fs::path(out_dir);
    const std::string started = utc_now();
    try {
        fs::create_directories(out);
        fs::remove(out / "status.json");
        spdlog::debug("config sha256 {}", config.hash);
        spdlog::debug("simd kernels: {}", haloscan::simd::isa_name(haloscan::simd::kernels().isa));
        namespace st = haloscan::stages;
        if (command == "simulate") st::simulate(config, out, stage);
        if (command == "calibrate") st::calibrate(config, out);
        if (command == "process") st::process(config, out, stage);
        if (command == "exclude") st::exclude(config, out);
        if (command == "budget") st::budget(config, out);
        if (command == "enhancement") st::enhancement(config, out);
        if (command == "all") st::all(config, out);
    } catch (const haloscan::ConfigError& e) {
        return fail(kConfig, "config", e.what(), command, &out);
    } catch (const haloscan::IoError& e) {
        return fail(kIo, "io", e.what(), command, &out);
    } catch (const fs::filesystem_error& e) {
        return fail(kIo, "io", e.what(), command, &out);
    } catch (const haloscan::NumericError& e) {
        return fail(kNumeric, "numeric", e.what(), command, &out);
    } catch (const std::exception& e) {
        return fail(kNumeric, "stage", e.what(), command, &out);
    }

    {
        std::ofstream os(out / "status.json");
        os << json{{"status", "complete"}, {"command", command}, {"config_sha256", config.hash}, {"seed", config.seed}}
                  .dump(2)
           << "\n";
    }
    {
        // Wall-clock data lives only here so the other artifacts stay reproducible.
        std::ofstream os(out / "run_info.json");
        os << json{{"command", command},
                   {"started_utc", started},
                   {"finished_utc", utc_now()},
                   {"threads", omp_get_max_threads()},
                   {"simd", std::string(haloscan::simd::isa_name(haloscan::simd::kernels().isa))}}
                  .dump(2)
           << "\n";
    }
    return kOk;
}
