#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "persona/errors.hpp"
#include "persona/pipeline.hpp"
#include "persona/text.hpp"
#include "persona/version.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitProvider = 4;

struct GlobalOptions {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string seed;
    std::string mode;
    std::string workers;
};

persona::pipeline::PipelineConfig load(const GlobalOptions& opts) {
    if (opts.config_path.empty()) throw persona::ConfigError("--config is required");
    std::vector<std::string> overrides = opts.overrides;
    // Convenience flags are sugar for --set.
    if (!opts.seed.empty()) overrides.push_back("seed=" + opts.seed);
    if (!opts.mode.empty()) overrides.push_back("providers.mode=" + opts.mode);
    if (!opts.workers.empty()) overrides.push_back("workers=" + opts.workers);
    return persona::pipeline::load_config(opts.config_path, overrides);
}

int exit_code_for(const persona::Error& e) {
    switch (e.kind()) {
        case persona::Error::Kind::config: return kExitUsage;
        case persona::Error::Kind::data: return kExitData;
        case persona::Error::Kind::structural: return kExitData;
        case persona::Error::Kind::provider: return kExitProvider;
    }
    return kExitData;
}

} // namespace

int main(int argc, char** argv) {
    using namespace persona;

    CLI::App app{"Cross-platform persona profiling toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kToolVersion));
    app.fallthrough(false);

    GlobalOptions opts;
    app.add_option("--config", opts.config_path, "Path to the run config JSON")
        ->envname("PERSONA_CONFIG");
    app.add_option("--set", opts.overrides, "Override a config value, e.g. inference.runs=5");
    app.add_option("--seed", opts.seed, "Override the global seed");
    app.add_option("--mode", opts.mode, "Provider mode: mock, replay, record, live");
    app.add_option("--workers", opts.workers, "Worker pool size for per-user fan-out");

    auto* match = app.add_subcommand("match", "Select linked users and verify platform activity");
    auto* profile = app.add_subcommand("profile", "Infer personality, interests, offensiveness");
    auto* integrate =
        app.add_subcommand("integrate", "Synthesize cross-platform profiles and trait changes");
    auto* cluster = app.add_subcommand("cluster", "k-means with silhouette-selected k");
    std::vector<std::string> features;
    cluster->add_option("--features", features,
                        "Feature sets: traits:<platform> or trait_change (repeatable; default all)");
    auto* stats = app.add_subcommand("stats", "Trait means, KS tests, correlations, frequencies");
    auto* validate = app.add_subcommand("validate", "Score inference against labeled users");
    std::string filter_mode = "both";
    std::string reference_rmse;
    validate->add_option("--filter-mode", filter_mode, "none, stddev, posts, or both")
        ->check(CLI::IsMember({"none", "stddev", "posts", "both"}));
    validate->add_option("--reference-rmse", reference_rmse,
                         "CSV (trait,rmse) to compare the report against");
    auto* report = app.add_subcommand("report", "Summarize the outputs of previous stages");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help / --version
        app.exit(e);
        return kExitUsage;
    }

    try {
        const auto cfg = load(opts);
        if (match->parsed()) {
            const auto summary = pipeline::cmd_match(cfg);
            std::cout << "match: " << summary.selected << " of " << summary.matched
                      << " matched users selected (universe " << summary.universe << ")\n";
        } else if (profile->parsed()) {
            const auto summary = pipeline::cmd_profile(cfg);
            std::cout << "profile: " << summary.profiles_written << " profiles, personality kept "
                      << summary.personality_kept << " / dropped " << summary.personality_dropped
                      << ", skipped platforms " << summary.platforms_skipped
                      << ", network requests " << summary.network_requests << "\n";
        } else if (integrate->parsed()) {
            const auto summary = pipeline::cmd_integrate(cfg);
            std::cout << "integrate: " << summary.users << " users, " << summary.change_users
                      << " in change analysis (" << summary.change_skipped << " skipped)\n";
        } else if (cluster->parsed()) {
            std::vector<std::string> selected = features;
            if (selected.empty()) {
                for (const auto& platform : cfg.platforms)
                    selected.push_back("traits:" + platform.name);
                selected.push_back("trait_change");
            }
            for (const auto& f : selected) {
                const auto summary = pipeline::cmd_cluster(cfg, f);
                std::cout << "cluster " << f << ": best_k=" << summary.best_k
                          << " mean_silhouette=" << text::format_sig6(summary.best_silhouette)
                          << " rows=" << summary.rows
                          << (summary.weak_structure ? " (weak structure)" : "") << "\n";
            }
        } else if (stats->parsed()) {
            const auto summary = pipeline::cmd_stats(cfg);
            std::cout << "stats: " << summary.ks_rows << " ks rows, " << summary.correlation_rows
                      << " correlation rows, " << summary.frequency_tables
                      << " frequency tables\n";
        } else if (validate->parsed()) {
            const auto report_values = pipeline::cmd_validate(
                cfg, personality::parse_filter_mode(filter_mode),
                reference_rmse.empty() ? std::filesystem::path{}
                                       : std::filesystem::path(reference_rmse));
            std::cout << "validate: n_users=" << report_values.n_users << " rmse=";
            for (int i = 0; i < kTraitCount; ++i)
                std::cout << (i ? "," : "")
                          << text::format_sig6(report_values.rmse[static_cast<std::size_t>(i)]);
            std::cout << "\n";
            if (!reference_rmse.empty())
                std::cout << "note: deviations from the reference band are expected; the "
                             "scoring prompt is a documented stand-in\n";
        } else if (report->parsed()) {
            pipeline::cmd_report(cfg);
            std::cout << "report: wrote " << (cfg.out_dir / "report.txt").string() << "\n";
        }
        return kExitOk;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
}
