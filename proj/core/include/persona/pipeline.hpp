#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "persona/clustering.hpp"
#include "persona/domain.hpp"
#include "persona/interests.hpp"
#include "persona/matching.hpp"
#include "persona/offense.hpp"
#include "persona/personality.hpp"
#include "persona/providers.hpp"

namespace persona::pipeline {

enum class ProviderMode { mock, replay, record, live };
ProviderMode parse_mode(std::string_view name);
std::string_view mode_name(ProviderMode mode);

struct ProviderSettings {
    ProviderMode mode = ProviderMode::mock;
    std::filesystem::path cache_dir;
    std::filesystem::path lexicon_path;  // mock classifier keyword lexicon
    std::filesystem::path triggers_path; // mock offense trigger lexicon
    providers::RemoteEndpoint personality_endpoint;
    providers::RemoteEndpoint classifier_endpoint;
    providers::RemoteEndpoint offense_endpoint;
};

struct ClusterSettings {
    int k_min = 2;
    int k_max = 20;
    int repeats = 10;
};

struct PipelineConfig {
    std::vector<PlatformId> platforms;
    bool require_all = false;
    std::optional<std::size_t> sample_size;

    personality::InferenceConfig inference;
    interests::InterestTaxonomy taxonomy;
    std::filesystem::path taxonomy_path;
    offense::OffenseConfig offense;
    ClusterSettings cluster;
    ProviderSettings providers;

    std::filesystem::path identities_path;
    std::filesystem::path corpora_path;
    std::filesystem::path labeled_path;
    std::filesystem::path out_dir;

    PlatformId change_from; // trait changes run change_from -> change_to
    PlatformId change_to;

    std::uint64_t seed = 0;
    int workers = 1;

    std::string config_json; // canonical snapshot written into manifests

    void validate() const;
};

// Parses the config document, applying "a.b.c=value" overrides first.
// Relative paths inside the document resolve against the document's directory.
PipelineConfig load_config(const std::filesystem::path& path,
                           const std::vector<std::string>& overrides = {});
PipelineConfig config_from_json_text(const std::string& text,
                                     const std::filesystem::path& base_dir = {},
                                     const std::vector<std::string>& overrides = {});

struct ProviderBundle {
    std::shared_ptr<providers::PersonalityProvider> personality;
    std::shared_ptr<providers::ContentClassifier> classifier;
    std::shared_ptr<providers::OffensivenessScorer> offense;
    std::shared_ptr<providers::TransportStats> transport; // network call counter
};

ProviderBundle make_providers(const PipelineConfig& cfg);

// --- stage entry points; each writes its outputs plus a run manifest. -------

struct MatchSummary {
    std::size_t universe = 0;
    std::size_t matched = 0;
    std::size_t selected = 0;
};
MatchSummary cmd_match(const PipelineConfig& cfg);

struct ProfileSummary {
    std::size_t profiles_written = 0;
    std::size_t personality_kept = 0;
    std::size_t personality_dropped = 0;
    std::size_t platforms_skipped = 0;  // unverified or missing corpus
    std::size_t provider_failures = 0; // user-platforms lost to provider errors
    long network_requests = 0;
};
ProfileSummary cmd_profile(const PipelineConfig& cfg);

struct IntegrateSummary {
    std::size_t users = 0;
    std::size_t change_users = 0;
    std::size_t change_skipped = 0;
};
IntegrateSummary cmd_integrate(const PipelineConfig& cfg);

struct ClusterSummary {
    std::string features;
    std::size_t rows = 0;
    int best_k = 0;
    double best_silhouette = 0.0;
    bool weak_structure = false; // best silhouette below the warning floor
};
// features: "traits:<platform>" or "trait_change"
ClusterSummary cmd_cluster(const PipelineConfig& cfg, const std::string& features);

struct StatsSummary {
    std::size_t ks_rows = 0;
    std::size_t correlation_rows = 0;
    std::size_t frequency_tables = 0;
};
StatsSummary cmd_stats(const PipelineConfig& cfg);

personality::ErrorReport cmd_validate(const PipelineConfig& cfg, personality::FilterMode mode,
                                      const std::filesystem::path& reference_rmse = {});

void cmd_report(const PipelineConfig& cfg);

} // namespace persona::pipeline
