#include "persona/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <iostream>
#include <map>
#include <mutex>
#include <semaphore>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "persona/errors.hpp"
#include "persona/rng.hpp"
#include "persona/stats.hpp"
#include "persona/storage.hpp"
#include "persona/text.hpp"

using nlohmann::json;

namespace persona::pipeline {

ProviderMode parse_mode(std::string_view name) {
    if (name == "mock") return ProviderMode::mock;
    if (name == "replay") return ProviderMode::replay;
    if (name == "record") return ProviderMode::record;
    if (name == "live") return ProviderMode::live;
    throw ConfigError("unknown provider mode: '" + std::string(name) + "'");
}

std::string_view mode_name(ProviderMode mode) {
    switch (mode) {
        case ProviderMode::mock: return "mock";
        case ProviderMode::replay: return "replay";
        case ProviderMode::record: return "record";
        case ProviderMode::live: return "live";
    }
    throw StructuralError("unknown provider mode");
}

// ---------------------------------------------------------------------------
// Config loading

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    if (p.empty()) return {};
    std::filesystem::path path(p);
    if (path.is_absolute() || base.empty()) return path;
    return base / path;
}

providers::RemoteEndpoint endpoint_from_json(const json& j) {
    providers::RemoteEndpoint e;
    e.url = j.value("url", "");
    if (j.contains("headers"))
        for (const auto& [name, value] : j["headers"].items())
            e.headers.emplace_back(name, value.get<std::string>());
    e.body_template = j.value("body_template", "");
    e.response_path = j.value("response_path", "");
    e.attribute_path = j.value("attribute_path", "");
    if (j.contains("attribute_wire_names"))
        e.attribute_wire_names =
            j["attribute_wire_names"].get<std::map<std::string, std::string>>();
    e.requests_per_second = j.value("requests_per_second", 0.0);
    e.max_in_flight = j.value("max_in_flight", 4);
    e.timeout_seconds = j.value("timeout_seconds", 30);
    return e;
}

void apply_override(json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError("--set expects key.path=value, got '" + assignment + "'");
    const std::string dotted = assignment.substr(0, eq);
    const std::string raw_value = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(raw_value);
    } catch (const json::exception&) {
        value = raw_value; // plain string
    }
    std::string pointer;
    std::istringstream parts(dotted);
    std::string part;
    while (std::getline(parts, part, '.')) pointer += "/" + part;
    doc[json::json_pointer(pointer)] = value;
}

} // namespace

void PipelineConfig::validate() const {
    if (platforms.empty()) throw ConfigError("config needs a nonempty platforms list");
    std::set<PlatformId> unique(platforms.begin(), platforms.end());
    if (unique.size() != platforms.size()) throw ConfigError("platforms list contains duplicates");
    inference.validate();
    offense.validate();
    if (cluster.k_min < 2) throw ConfigError("cluster.k_min must be at least 2");
    if (cluster.k_max < cluster.k_min) throw ConfigError("cluster.k_max must be >= cluster.k_min");
    if (cluster.repeats < 1) throw ConfigError("cluster.repeats must be at least 1");
    if (workers < 1) throw ConfigError("workers must be at least 1");
    if (providers.mode == ProviderMode::replay &&
        !std::filesystem::is_directory(providers.cache_dir))
        throw ConfigError("replay mode requires an existing cache directory: " +
                          providers.cache_dir.string());
    if (out_dir.empty()) throw ConfigError("config needs an out_dir");
}

PipelineConfig config_from_json_text(const std::string& text,
                                     const std::filesystem::path& base_dir,
                                     const std::vector<std::string>& overrides) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    for (const auto& assignment : overrides) apply_override(doc, assignment);

    PipelineConfig cfg;
    try {
        for (const auto& p : doc.at("platforms"))
            cfg.platforms.push_back(PlatformId::parse(p.get<std::string>()));
        cfg.seed = doc.value("seed", std::uint64_t{0});
        cfg.workers = doc.value("workers", 1);
        cfg.out_dir = resolve(base_dir, doc.value("out_dir", "out"));

        if (doc.contains("inputs")) {
            const json& in = doc["inputs"];
            cfg.identities_path = resolve(base_dir, in.value("identities", ""));
            cfg.corpora_path = resolve(base_dir, in.value("corpora", ""));
            cfg.labeled_path = resolve(base_dir, in.value("labeled", ""));
        }

        if (doc.contains("match")) {
            const json& m = doc["match"];
            cfg.require_all = m.value("require_all", false);
            if (m.contains("sample_size") && !m["sample_size"].is_null())
                cfg.sample_size = m["sample_size"].get<std::size_t>();
        }

        if (doc.contains("inference")) {
            const json& inf = doc["inference"];
            cfg.inference.runs = inf.value("runs", 10);
            cfg.inference.stddev_threshold = inf.value("stddev_threshold", 0.6);
            cfg.inference.min_posts = inf.value("min_posts", 2);
            cfg.inference.max_posts = inf.value("max_posts", 200);
            cfg.inference.retry.attempts = inf.value("retries", 3);
            cfg.inference.retry.base_backoff =
                std::chrono::milliseconds(inf.value("retry_backoff_ms", 250));
        }
        cfg.inference.rng_seed = derive_seed(cfg.seed, "providers.personality");

        if (doc.contains("interests")) {
            const json& i = doc["interests"];
            cfg.taxonomy_path = resolve(base_dir, i.value("taxonomy", ""));
            if (i.contains("professional_roots"))
                cfg.taxonomy.professional_roots =
                    i["professional_roots"].get<std::vector<std::string>>();
            cfg.taxonomy.confidence_floor = i.value("confidence_floor", 0.0);
        }

        if (doc.contains("offense")) cfg.offense.threshold = doc["offense"].value("threshold", 0.8);

        if (doc.contains("cluster")) {
            const json& c = doc["cluster"];
            cfg.cluster.k_min = c.value("k_min", 2);
            cfg.cluster.k_max = c.value("k_max", 20);
            cfg.cluster.repeats = c.value("repeats", 10);
        }

        if (doc.contains("integrate")) {
            const json& i = doc["integrate"];
            if (i.contains("from")) cfg.change_from = PlatformId::parse(i["from"].get<std::string>());
            if (i.contains("to")) cfg.change_to = PlatformId::parse(i["to"].get<std::string>());
        }
        if (cfg.change_from.name.empty() && cfg.platforms.size() >= 2) {
            cfg.change_from = cfg.platforms[0];
            cfg.change_to = cfg.platforms[1];
        }

        if (doc.contains("providers")) {
            const json& p = doc["providers"];
            cfg.providers.mode = parse_mode(p.value("mode", "mock"));
            cfg.providers.cache_dir = resolve(base_dir, p.value("cache_dir", ""));
            cfg.providers.lexicon_path = resolve(base_dir, p.value("lexicon", ""));
            cfg.providers.triggers_path = resolve(base_dir, p.value("triggers", ""));
            if (p.contains("personality_endpoint"))
                cfg.providers.personality_endpoint = endpoint_from_json(p["personality_endpoint"]);
            if (p.contains("classifier_endpoint"))
                cfg.providers.classifier_endpoint = endpoint_from_json(p["classifier_endpoint"]);
            if (p.contains("offense_endpoint"))
                cfg.providers.offense_endpoint = endpoint_from_json(p["offense_endpoint"]);
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config field error: ") + e.what());
    }

    cfg.config_json = doc.dump();
    cfg.validate();
    return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path,
                           const std::vector<std::string>& overrides) {
    std::string text;
    try {
        text = storage::read_text_file(path);
    } catch (const DataError& e) {
        throw ConfigError(e.what());
    }
    return config_from_json_text(text, path.parent_path(), overrides);
}

// ---------------------------------------------------------------------------
// Provider construction

namespace {

// Enforces a provider's declared max-in-flight bound whatever the worker pool
// does above it.
class Gate {
public:
    explicit Gate(int limit) : limit_(limit), sem_(std::clamp(limit, 1, 256)) {}

    template <typename F>
    auto run(F&& fn) -> decltype(fn()) {
        if (limit_ <= 0) return fn();
        sem_.acquire();
        try {
            auto result = fn();
            sem_.release();
            return result;
        } catch (...) {
            sem_.release();
            throw;
        }
    }

private:
    int limit_;
    std::counting_semaphore<256> sem_;
};

class GatedPersonalityProvider final : public providers::PersonalityProvider {
public:
    explicit GatedPersonalityProvider(std::shared_ptr<providers::PersonalityProvider> inner)
        : inner_(std::move(inner)), gate_(inner_->max_in_flight()) {}
    double score_personality(const std::string& text, int trait, int run) override {
        return gate_.run([&] { return inner_->score_personality(text, trait, run); });
    }
    int max_in_flight() const override { return inner_->max_in_flight(); }

private:
    std::shared_ptr<providers::PersonalityProvider> inner_;
    Gate gate_;
};

class GatedContentClassifier final : public providers::ContentClassifier {
public:
    explicit GatedContentClassifier(std::shared_ptr<providers::ContentClassifier> inner)
        : inner_(std::move(inner)), gate_(inner_->max_in_flight()) {}
    CategorySet classify(const std::string& text) override {
        return gate_.run([&] { return inner_->classify(text); });
    }
    int max_in_flight() const override { return inner_->max_in_flight(); }

private:
    std::shared_ptr<providers::ContentClassifier> inner_;
    Gate gate_;
};

class GatedOffensivenessScorer final : public providers::OffensivenessScorer {
public:
    explicit GatedOffensivenessScorer(std::shared_ptr<providers::OffensivenessScorer> inner)
        : inner_(std::move(inner)), gate_(inner_->max_in_flight()) {}
    std::map<std::string, double> score_offense(const std::string& text) override {
        return gate_.run([&] { return inner_->score_offense(text); });
    }
    std::size_t request_text_limit() const override { return inner_->request_text_limit(); }
    int max_in_flight() const override { return inner_->max_in_flight(); }

private:
    std::shared_ptr<providers::OffensivenessScorer> inner_;
    Gate gate_;
};

} // namespace

ProviderBundle make_providers(const PipelineConfig& cfg) {
    using namespace providers;
    ProviderBundle bundle;
    bundle.transport = std::make_shared<TransportStats>();
    const auto& settings = cfg.providers;

    auto make_mocks = [&] {
        bundle.personality = std::make_shared<MockPersonalityProvider>(cfg.inference.rng_seed);
        if (settings.lexicon_path.empty())
            throw ConfigError("mock mode needs providers.lexicon (keyword lexicon file)");
        bundle.classifier =
            std::make_shared<LexiconClassifier>(LexiconClassifier::from_file(settings.lexicon_path));
        if (settings.triggers_path.empty())
            throw ConfigError("mock mode needs providers.triggers (trigger lexicon file)");
        bundle.offense = std::make_shared<MockOffensivenessScorer>(MockOffensivenessScorer::from_file(
            derive_seed(cfg.seed, "providers.offense"), settings.triggers_path));
    };
    auto make_remote = [&] {
        bundle.personality = std::make_shared<HttpPersonalityProvider>(
            settings.personality_endpoint, bundle.transport);
        bundle.classifier = std::make_shared<HttpContentClassifier>(settings.classifier_endpoint,
                                                                    bundle.transport);
        bundle.offense =
            std::make_shared<HttpOffensivenessScorer>(settings.offense_endpoint, bundle.transport);
    };

    switch (settings.mode) {
        case ProviderMode::mock:
            make_mocks();
            break;
        case ProviderMode::live:
            make_remote();
            break;
        case ProviderMode::replay: {
            auto cache = std::make_shared<ReplayCache>(settings.cache_dir, CacheMode::replay);
            bundle.personality = std::make_shared<CachedPersonalityProvider>(cache, nullptr);
            bundle.classifier = std::make_shared<CachedContentClassifier>(cache, nullptr);
            bundle.offense = std::make_shared<CachedOffensivenessScorer>(cache, nullptr);
            break;
        }
        case ProviderMode::record: {
            make_remote();
            auto cache = std::make_shared<ReplayCache>(settings.cache_dir, CacheMode::record);
            bundle.personality =
                std::make_shared<CachedPersonalityProvider>(cache, bundle.personality);
            bundle.classifier = std::make_shared<CachedContentClassifier>(cache, bundle.classifier);
            bundle.offense = std::make_shared<CachedOffensivenessScorer>(cache, bundle.offense);
            break;
        }
    }

    bundle.personality = std::make_shared<GatedPersonalityProvider>(bundle.personality);
    bundle.classifier = std::make_shared<GatedContentClassifier>(bundle.classifier);
    bundle.offense = std::make_shared<GatedOffensivenessScorer>(bundle.offense);
    return bundle;
}

// ---------------------------------------------------------------------------
// Helpers shared by the commands

namespace {

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn) {
    const int n_threads = std::max(1, std::min<int>(workers, static_cast<int>(count)));
    if (n_threads == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) {
        threads.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (const char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

std::string csv_row(const std::vector<std::string>& fields) {
    std::string row;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i > 0) row += ',';
        row += csv_escape(fields[i]);
    }
    row += '\n';
    return row;
}

void write_manifest_for(const PipelineConfig& cfg, const std::string& command,
                        const std::vector<std::filesystem::path>& inputs) {
    std::vector<std::filesystem::path> existing;
    for (const auto& p : inputs)
        if (!p.empty() && std::filesystem::exists(p)) existing.push_back(p);
    const auto manifest = storage::make_manifest(command, cfg.config_json, existing);
    storage::write_manifest(cfg.out_dir / ("manifest_" + command + ".json"), manifest);
}

std::filesystem::path selected_identities_path(const PipelineConfig& cfg) {
    return cfg.out_dir / "identities_selected.jsonl";
}
std::filesystem::path platform_profiles_path(const PipelineConfig& cfg) {
    return cfg.out_dir / "profiles.jsonl";
}
std::filesystem::path cross_profiles_path(const PipelineConfig& cfg) {
    return cfg.out_dir / "cross_profiles.jsonl";
}
std::filesystem::path trait_changes_path(const PipelineConfig& cfg) {
    return cfg.out_dir / "trait_changes.jsonl";
}

std::vector<stats::TraitChange> load_trait_changes(const std::filesystem::path& path) {
    std::vector<stats::TraitChange> changes;
    std::istringstream in(storage::read_text_file(path));
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (text::trim(line).empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw DataError("trait changes line " + std::to_string(line_number) + ": " + e.what());
        }
        stats::TraitChange change;
        change.user_key = j.at("user_key").get<std::string>();
        change.signed_delta = j.at("signed_delta").get<TraitVector>();
        change.abs_delta = j.at("abs_delta").get<TraitVector>();
        changes.push_back(std::move(change));
    }
    return changes;
}

} // namespace

// ---------------------------------------------------------------------------
// match

MatchSummary cmd_match(const PipelineConfig& cfg) {
    if (cfg.identities_path.empty()) throw ConfigError("config needs inputs.identities");
    if (cfg.corpora_path.empty()) throw ConfigError("config needs inputs.corpora");

    const auto universe = storage::load_identities(cfg.identities_path);
    const auto corpora = storage::load_corpora(cfg.corpora_path);

    matching::MatchConfig match_cfg;
    match_cfg.target_platforms = cfg.platforms;
    match_cfg.require_all = cfg.require_all;
    match_cfg.sample_size = cfg.sample_size;
    match_cfg.rng_seed = derive_seed(cfg.seed, "match.sample");

    // Count the pre-sample matches for the summary.
    matching::MatchConfig unsampled = match_cfg;
    unsampled.sample_size.reset();
    const std::size_t matched = matching::select_linked_users(universe, unsampled).size();

    auto selected = matching::select_linked_users(universe, match_cfg);
    for (auto& identity : selected)
        identity = matching::apply_manual_overrides(matching::verify_activity(identity, corpora));

    storage::save_identities(selected_identities_path(cfg), selected);
    write_manifest_for(cfg, "match", {cfg.identities_path, cfg.corpora_path});

    MatchSummary summary;
    summary.universe = universe.size();
    summary.matched = matched;
    summary.selected = selected.size();
    return summary;
}

// ---------------------------------------------------------------------------
// profile

namespace {

struct UserStageOutput {
    std::vector<PlatformProfile> profiles;
    std::vector<json> personality_audits;
    std::vector<offense::AuditEntry> offense_audits;
    std::vector<json> filtered;
    std::size_t skipped = 0;
    std::size_t kept = 0;
    std::size_t dropped = 0;
    std::size_t provider_failures = 0;
    std::string first_provider_error;
};

json filtered_record(const std::string& user, const PlatformId& platform, std::string_view rule,
                     const std::string& reason) {
    json j;
    j["user"] = user;
    j["platform"] = platform.name;
    j["rule"] = std::string(rule);
    j["reason"] = reason;
    return j;
}

void profile_one_platform(const std::string& user_key, const PlatformId& platform,
                          const PostCorpus& corpus, const PipelineConfig& cfg,
                          const ProviderBundle& providers, UserStageOutput& out) {
    std::optional<PersonalityVector> vector;
    {
        const auto inference =
            personality::infer_personality(corpus, *providers.personality, cfg.inference);
        const auto verdict =
            personality::apply_stability_filter(inference.vector, corpus, cfg.inference);
        json audit;
        audit["user"] = user_key;
        audit["platform"] = platform.name;
        json runs = json::object();
        for (int i = 1; i <= kTraitCount; ++i)
            runs[std::string(trait_name(i))] =
                inference.audit.run_scores[static_cast<std::size_t>(i - 1)];
        audit["runs"] = runs;
        audit["clamps"] = inference.audit.clamp_notes;
        audit["posts_submitted"] = inference.audit.posts_submitted;
        audit["verdict"] = verdict.keep ? "keep" : "drop";
        if (!verdict.keep) {
            audit["rule"] = std::string(personality::filter_rule_name(verdict.rule));
            audit["reason"] = verdict.reason;
            out.filtered.push_back(filtered_record(
                user_key, platform, personality::filter_rule_name(verdict.rule), verdict.reason));
            ++out.dropped;
        } else {
            vector = inference.vector;
            ++out.kept;
        }
        out.personality_audits.push_back(std::move(audit));
    }

    const CategorySet categories =
        interests::classify_interests(corpus, *providers.classifier, cfg.taxonomy);
    auto [professional, personal] = interests::split_interests(categories, cfg.taxonomy);

    auto offense_outcome =
        offense::score_offensiveness(corpus, *providers.offense, cfg.inference.retry);
    const bool offensive = offense::classify_offensive(offense_outcome.scores, cfg.offense);
    out.offense_audits.insert(out.offense_audits.end(), offense_outcome.audit.begin(),
                              offense_outcome.audit.end());

    out.profiles.push_back(build_profile(user_key, platform, vector, std::move(professional),
                                         std::move(personal), std::move(offense_outcome.scores),
                                         offensive));
}

} // namespace

ProfileSummary cmd_profile(const PipelineConfig& cfg) {
    if (cfg.corpora_path.empty()) throw ConfigError("config needs inputs.corpora");
    const auto selected_path = selected_identities_path(cfg);
    if (!std::filesystem::exists(selected_path))
        throw DataError("no selected identities at " + selected_path.string() +
                        "; run the match stage first");

    auto identities = storage::load_identities(selected_path);
    std::sort(identities.begin(), identities.end(),
              [](const auto& a, const auto& b) { return a.user_key < b.user_key; });
    const auto corpora = storage::load_corpora(cfg.corpora_path);
    if (!cfg.taxonomy_path.empty()) {
        const auto taxonomy = storage::load_taxonomy(cfg.taxonomy_path);
        for (const auto& root : cfg.taxonomy.professional_roots)
            if (!taxonomy.has_root(root))
                std::cerr << "warning: professional root '" << root
                          << "' is not a top-level taxonomy category\n";
    }
    cfg.taxonomy.validate();

    const ProviderBundle providers = make_providers(cfg);

    std::vector<UserStageOutput> outputs(identities.size());
    parallel_for(identities.size(), cfg.workers, [&](std::size_t idx) {
        const auto& identity = identities[idx];
        UserStageOutput& out = outputs[idx];
        for (const auto& platform : cfg.platforms) {
            const auto link = identity.links.find(platform);
            if (link == identity.links.end()) continue;
            const auto verified = identity.verified.find(platform);
            if (verified == identity.verified.end() || !verified->second) {
                ++out.skipped;
                continue;
            }
            const auto corpus_it = corpora.find({identity.user_key, platform});
            if (corpus_it == corpora.end() || corpus_it->second.nonempty_count() == 0) {
                ++out.skipped;
                out.filtered.push_back(filtered_record(identity.user_key, platform, "no_content",
                                                       "no nonempty posts in corpus"));
                continue;
            }
            const PostCorpus& corpus = corpus_it->second;

            // A user-platform whose scoring still fails after retries is
            // recorded and skipped; the stage finishes the rest, writes
            // partial output, and reports the failure at the end. Completed
            // requests sit in the response cache, so a rerun resumes.
            try {
                profile_one_platform(identity.user_key, platform, corpus, cfg, providers, out);
            } catch (const ProviderError& e) {
                ++out.provider_failures;
                if (out.first_provider_error.empty()) out.first_provider_error = e.what();
                out.filtered.push_back(
                    filtered_record(identity.user_key, platform, "provider_error", e.what()));
            }
        }
    });

    // Deterministic merge: identities are sorted, per-user outputs are ordered.
    std::vector<PlatformProfile> profiles;
    std::string personality_audit_lines;
    std::string offense_audit_lines;
    std::string filtered_lines;
    ProfileSummary summary;
    for (const auto& out : outputs) {
        profiles.insert(profiles.end(), out.profiles.begin(), out.profiles.end());
        for (const auto& a : out.personality_audits) {
            personality_audit_lines += a.dump();
            personality_audit_lines += '\n';
        }
        for (const auto& entry : out.offense_audits) {
            json j;
            j["user"] = entry.user;
            j["platform"] = entry.platform.name;
            j["post_index"] = entry.post_index;
            j["attribute"] = entry.attribute;
            j["score"] = entry.score;
            offense_audit_lines += j.dump();
            offense_audit_lines += '\n';
        }
        for (const auto& f : out.filtered) {
            filtered_lines += f.dump();
            filtered_lines += '\n';
        }
        summary.platforms_skipped += out.skipped;
        summary.personality_kept += out.kept;
        summary.personality_dropped += out.dropped;
        summary.provider_failures += out.provider_failures;
    }
    summary.profiles_written = profiles.size();
    summary.network_requests = providers.transport->requests.load();

    storage::persist_platform_profiles(platform_profiles_path(cfg), profiles);
    storage::write_text_file(cfg.out_dir / "audit_personality.jsonl", personality_audit_lines);
    storage::write_text_file(cfg.out_dir / "audit_offense.jsonl", offense_audit_lines);
    storage::write_text_file(cfg.out_dir / "filtered_users.jsonl", filtered_lines);
    write_manifest_for(cfg, "profile",
                       {selected_path, cfg.corpora_path, cfg.taxonomy_path,
                        cfg.providers.lexicon_path, cfg.providers.triggers_path});

    if (summary.provider_failures > 0) {
        std::string first;
        for (const auto& out : outputs)
            if (!out.first_provider_error.empty()) {
                first = out.first_provider_error;
                break;
            }
        throw ProviderError(std::to_string(summary.provider_failures) +
                            " user-platform scorings failed after retries (first: " + first +
                            "); partial outputs written to " + cfg.out_dir.string() +
                            ", a rerun resumes from the response cache");
    }
    return summary;
}

// ---------------------------------------------------------------------------
// integrate

IntegrateSummary cmd_integrate(const PipelineConfig& cfg) {
    const auto profiles = storage::load_platform_profiles(platform_profiles_path(cfg));
    if (profiles.empty()) throw DataError("no platform profiles to integrate");

    std::map<std::string, std::vector<PlatformProfile>> by_user;
    for (const auto& p : profiles) by_user[p.user].push_back(p);

    std::vector<CrossPlatformProfile> cross;
    cross.reserve(by_user.size());
    for (const auto& [user, group] : by_user) cross.push_back(synthesize_cross_platform(group));
    storage::persist_profiles(cross_profiles_path(cfg), cross);

    IntegrateSummary summary;
    summary.users = cross.size();

    std::size_t skipped = 0;
    const auto changes = stats::trait_changes(cross, cfg.change_from, cfg.change_to, &skipped);
    summary.change_users = changes.size();
    summary.change_skipped = skipped;

    std::string change_lines;
    for (const auto& change : changes) {
        json j;
        j["user_key"] = change.user_key;
        j["signed_delta"] = change.signed_delta;
        j["abs_delta"] = change.abs_delta;
        change_lines += j.dump();
        change_lines += '\n';
    }
    storage::write_text_file(trait_changes_path(cfg), change_lines);

    const auto table = stats::change_magnitude_table(changes);
    std::string csv;
    {
        std::vector<std::string> header{"n_traits"};
        for (const double m : table.magnitudes)
            header.push_back("pct_changed_ge_" + text::format_sig6(m));
        csv += csv_row(header);
        for (int n = 1; n <= kTraitCount; ++n) {
            std::vector<std::string> row{std::to_string(n)};
            for (std::size_t m = 0; m < table.magnitudes.size(); ++m)
                row.push_back(text::format_sig6(
                    100.0 * table.share[static_cast<std::size_t>(n - 1)][m]));
            csv += csv_row(row);
        }
    }
    storage::write_text_file(cfg.out_dir / "change_magnitude.csv", csv);

    for (int trait = 1; trait <= kTraitCount; ++trait) {
        std::vector<double> deltas;
        deltas.reserve(changes.size());
        for (const auto& change : changes)
            deltas.push_back(change.abs_delta[static_cast<std::size_t>(trait - 1)]);
        const auto points = stats::ccdf(std::move(deltas));
        std::string ccdf_csv = csv_row({"abs_change", "ccdf"});
        for (const auto& [x, fraction] : points)
            ccdf_csv += csv_row({text::format_sig6(x), text::format_sig6(fraction)});
        storage::write_text_file(
            cfg.out_dir / ("ccdf_" + std::string(trait_name(trait)) + ".csv"), ccdf_csv);
    }

    write_manifest_for(cfg, "integrate", {platform_profiles_path(cfg)});
    return summary;
}

// ---------------------------------------------------------------------------
// cluster

namespace {

clustering::FeatureMatrix features_from_traits(const std::vector<PlatformProfile>& profiles,
                                               const PlatformId& platform) {
    clustering::FeatureMatrix data;
    for (const auto& p : profiles) {
        if (p.platform != platform || !p.personality) continue;
        data.add(p.user, std::vector<double>(p.personality->traits.begin(),
                                             p.personality->traits.end()));
    }
    return data;
}

clustering::FeatureMatrix features_from_changes(const std::vector<stats::TraitChange>& changes) {
    clustering::FeatureMatrix data;
    for (const auto& change : changes)
        data.add(change.user_key,
                 std::vector<double>(change.abs_delta.begin(), change.abs_delta.end()));
    return data;
}

constexpr double kWeakSilhouetteFloor = 0.1;

} // namespace

ClusterSummary cmd_cluster(const PipelineConfig& cfg, const std::string& features) {
    clustering::FeatureMatrix data;
    if (features == "trait_change") {
        data = features_from_changes(load_trait_changes(trait_changes_path(cfg)));
    } else if (features.starts_with("traits:")) {
        const PlatformId platform = PlatformId::parse(features.substr(7));
        data = features_from_traits(storage::load_platform_profiles(platform_profiles_path(cfg)),
                                    platform);
    } else {
        throw ConfigError("unknown cluster features '" + features +
                          "'; expected traits:<platform> or trait_change");
    }
    if (data.size() < 3)
        throw DataError("clustering over '" + features + "' has only " +
                        std::to_string(data.size()) + " rows; need at least 3");

    const std::uint64_t seed = derive_seed(cfg.seed, "cluster." + features);
    const auto selection =
        clustering::select_k(data, cfg.cluster.k_min, cfg.cluster.k_max, cfg.cluster.repeats, seed);

    const std::string tag = features == "trait_change" ? "trait_change"
                                                       : "traits_" + features.substr(7);

    json kselect;
    kselect["features"] = features;
    kselect["best_k"] = selection.best_k;
    kselect["repeats"] = selection.repeats;
    kselect["base_seed"] = selection.base_seed;
    json per_k = json::object();
    for (const auto& [k, sil] : selection.per_k) per_k[std::to_string(k)] = sil;
    kselect["per_k_mean_silhouette"] = per_k;
    json per_k_seed = json::object();
    for (const auto& [k, s] : selection.per_k_seed) per_k_seed[std::to_string(k)] = s;
    kselect["per_k_seed"] = per_k_seed;
    const bool weak = selection.per_k.at(selection.best_k) < kWeakSilhouetteFloor;
    kselect["weak_structure"] = weak;
    storage::write_text_file(cfg.out_dir / ("kselect_" + tag + ".json"), kselect.dump(2) + "\n");

    const auto& best = selection.best;
    json clusters;
    clusters["features"] = features;
    clusters["k"] = best.k;
    clusters["rng_seed"] = best.rng_seed;
    clusters["iterations_run"] = best.iterations_run;
    clusters["mean_silhouette"] = best.mean_silhouette;
    clusters["objective_trace"] = best.objective_trace;
    clusters["centroids"] = best.centroids;
    json rows = json::array();
    for (std::size_t i = 0; i < data.size(); ++i) {
        json row;
        row["user_key"] = data.keys[i];
        row["cluster"] = best.assignments[i];
        row["silhouette"] = best.per_point_silhouette[i];
        rows.push_back(std::move(row));
    }
    clusters["rows"] = rows;
    storage::write_text_file(cfg.out_dir / ("clusters_" + tag + ".json"), clusters.dump(2) + "\n");

    // Cluster means table (Tables 7-8 shape): one row per cluster.
    std::string csv;
    {
        std::vector<std::string> header{"cluster", "size"};
        for (int i = 1; i <= kTraitCount; ++i) header.push_back(std::string(trait_name(i)));
        csv += csv_row(header);
        std::vector<std::size_t> sizes(static_cast<std::size_t>(best.k), 0);
        std::vector<TraitVector> sums(static_cast<std::size_t>(best.k), TraitVector{});
        for (std::size_t i = 0; i < data.size(); ++i) {
            const auto c = static_cast<std::size_t>(best.assignments[i]);
            ++sizes[c];
            for (int d = 0; d < kTraitCount; ++d)
                sums[c][static_cast<std::size_t>(d)] += data.rows[i][static_cast<std::size_t>(d)];
        }
        for (int c = 0; c < best.k; ++c) {
            const auto ci = static_cast<std::size_t>(c);
            std::vector<std::string> row{std::to_string(c + 1), std::to_string(sizes[ci])};
            for (int d = 0; d < kTraitCount; ++d)
                row.push_back(text::format_sig6(
                    sizes[ci] > 0 ? sums[ci][static_cast<std::size_t>(d)] / sizes[ci] : 0.0));
            csv += csv_row(row);
        }
    }
    storage::write_text_file(cfg.out_dir / ("cluster_means_" + tag + ".csv"), csv);

    const auto input = features == "trait_change" ? trait_changes_path(cfg)
                                                  : platform_profiles_path(cfg);
    write_manifest_for(cfg, "cluster_" + tag, {input});

    ClusterSummary summary;
    summary.features = features;
    summary.rows = data.size();
    summary.best_k = selection.best_k;
    summary.best_silhouette = selection.per_k.at(selection.best_k);
    summary.weak_structure = weak;
    if (weak)
        std::cerr << "warning: weak cluster structure over '" << features
                  << "' (best mean silhouette " << text::format_sig6(summary.best_silhouette)
                  << ")\n";
    return summary;
}

// ---------------------------------------------------------------------------
// stats

StatsSummary cmd_stats(const PipelineConfig& cfg) {
    const auto profiles = storage::load_platform_profiles(platform_profiles_path(cfg));
    if (profiles.empty()) throw DataError("no platform profiles; run the profile stage first");

    StatsSummary summary;

    // Per-platform trait means (Table 3 shape).
    {
        std::string csv = csv_row({"platform", "trait", "mean", "n"});
        for (const auto& platform : cfg.platforms) {
            TraitVector sums{};
            std::size_t n = 0;
            for (const auto& p : profiles) {
                if (p.platform != platform || !p.personality) continue;
                ++n;
                for (int i = 0; i < kTraitCount; ++i)
                    sums[static_cast<std::size_t>(i)] +=
                        p.personality->traits[static_cast<std::size_t>(i)];
            }
            if (n == 0) continue;
            for (int i = 1; i <= kTraitCount; ++i)
                csv += csv_row({platform.name, std::string(trait_name(i)),
                                text::format_sig6(sums[static_cast<std::size_t>(i - 1)] /
                                                  static_cast<double>(n)),
                                std::to_string(n)});
        }
        storage::write_text_file(cfg.out_dir / "trait_means.csv", csv);
    }

    // KS tests per trait between the configured platform pair.
    {
        std::string csv = csv_row({"test", "groups", "statistic", "p", "n", "detail"});
        for (int trait = 1; trait <= kTraitCount; ++trait) {
            std::vector<double> a, b;
            for (const auto& p : profiles) {
                if (!p.personality) continue;
                const double value = p.personality->traits[static_cast<std::size_t>(trait - 1)];
                if (p.platform == cfg.change_from) a.push_back(value);
                else if (p.platform == cfg.change_to) b.push_back(value);
            }
            const std::string groups = cfg.change_from.name + "-vs-" + cfg.change_to.name + ":" +
                                       std::string(trait_name(trait));
            if (a.empty() || b.empty()) {
                csv += csv_row({"ks_two_sample", groups, "", "", std::to_string(a.size() + b.size()),
                                "degenerate: a platform has no personality vectors"});
                continue;
            }
            const auto result = stats::ks_two_sample(a, b);
            csv += csv_row({"ks_two_sample", groups, text::format_sig6(result.d_statistic),
                            text::format_sig6(result.p_value),
                            std::to_string(result.n1 + result.n2),
                            "n1=" + std::to_string(result.n1) + ";n2=" + std::to_string(result.n2)});
            ++summary.ks_rows;
        }
        storage::write_text_file(cfg.out_dir / "ks_tests.csv", csv);
    }

    // Point-biserial correlation of each trait with the offensive flag.
    {
        std::string csv = csv_row({"test", "groups", "statistic", "p", "n", "detail"});
        for (const auto& platform : cfg.platforms) {
            for (int trait = 1; trait <= kTraitCount; ++trait) {
                std::vector<int> offensive;
                std::vector<double> values;
                for (const auto& p : profiles) {
                    if (p.platform != platform || !p.personality) continue;
                    offensive.push_back(p.offensive ? 1 : 0);
                    values.push_back(p.personality->traits[static_cast<std::size_t>(trait - 1)]);
                }
                const std::string groups =
                    platform.name + ":offensive-vs-" + std::string(trait_name(trait));
                try {
                    const auto result = stats::point_biserial(offensive, values);
                    csv += csv_row({"point_biserial", groups, text::format_sig6(result.r),
                                    text::format_sig6(result.p_value), std::to_string(result.n), ""});
                    ++summary.correlation_rows;
                } catch (const DataError& e) {
                    csv += csv_row({"point_biserial", groups, "", "",
                                    std::to_string(offensive.size()),
                                    std::string("degenerate: ") + e.what()});
                }
            }
        }
        storage::write_text_file(cfg.out_dir / "point_biserial.csv", csv);
    }

    // Interest frequency tables per platform.
    for (const auto& platform : cfg.platforms) {
        std::vector<PlatformProfile> platform_profiles;
        for (const auto& p : profiles)
            if (p.platform == platform) platform_profiles.push_back(p);
        if (platform_profiles.empty()) continue;
        std::string csv = csv_row({"level", "kind", "category", "count", "rfreq"});
        for (const auto level : {interests::Level::top, interests::Level::leaf}) {
            for (const auto kind :
                 {interests::InterestKind::professional, interests::InterestKind::personal}) {
                const auto rows = interests::interest_frequencies(platform_profiles, level, kind);
                for (const auto& row : rows)
                    csv += csv_row({std::string(interests::level_name(level)),
                                    std::string(interests::kind_name(kind)), row.category,
                                    std::to_string(row.count), text::format_sig6(row.rfreq)});
            }
        }
        storage::write_text_file(cfg.out_dir / ("interests_" + platform.name + ".csv"), csv);
        ++summary.frequency_tables;
    }

    write_manifest_for(cfg, "stats", {platform_profiles_path(cfg)});
    return summary;
}

// ---------------------------------------------------------------------------
// validate

namespace {

std::vector<personality::LabeledUser> load_labeled(const std::filesystem::path& path) {
    std::vector<personality::LabeledUser> users;
    std::istringstream in(storage::read_text_file(path));
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (text::trim(line).empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw DataError("labeled users line " + std::to_string(line_number) + ": " + e.what());
        }
        personality::LabeledUser user;
        user.user_key = j.at("user_key").get<std::string>();
        user.true_traits = j.at("true_traits").get<TraitVector>();
        for (int i = 0; i < kTraitCount; ++i) {
            const double t = user.true_traits[static_cast<std::size_t>(i)];
            if (t < 1.0 || t > 5.0)
                throw DataError("labeled users line " + std::to_string(line_number) +
                                ": true trait outside [1,5]");
        }
        user.posts.user = user.user_key;
        user.posts.platform = PlatformId("labeled");
        for (const auto& post_json : j.at("posts")) {
            Post post;
            post.platform = user.posts.platform;
            post.author_key = user.user_key;
            post.text = post_json.at("text").get<std::string>();
            if (post_json.contains("posted_at")) {
                const auto ts = text::parse_iso8601(post_json["posted_at"].get<std::string>());
                if (!ts)
                    throw DataError("labeled users line " + std::to_string(line_number) +
                                    ": unparseable posted_at");
                post.posted_at = *ts;
            }
            user.posts.posts.push_back(std::move(post));
        }
        users.push_back(std::move(user));
    }
    if (users.empty()) throw DataError("labeled users file is empty: " + path.string());
    return users;
}

TraitVector load_reference_rmse(const std::filesystem::path& path) {
    TraitVector reference{};
    std::array<bool, kTraitCount> seen{};
    std::istringstream in(storage::read_text_file(path));
    std::string line;
    while (std::getline(in, line)) {
        line = text::trim(line);
        if (line.empty() || line.starts_with("trait,")) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw DataError("reference rmse rows must be trait,value: '" + line + "'");
        const int trait = trait_index_of(text::trim(line.substr(0, comma)));
        reference[static_cast<std::size_t>(trait - 1)] = std::stod(line.substr(comma + 1));
        seen[static_cast<std::size_t>(trait - 1)] = true;
    }
    for (int i = 0; i < kTraitCount; ++i)
        if (!seen[static_cast<std::size_t>(i)])
            throw DataError("reference rmse file misses trait " + std::string(trait_name(i + 1)));
    return reference;
}

} // namespace

personality::ErrorReport cmd_validate(const PipelineConfig& cfg, personality::FilterMode mode,
                                      const std::filesystem::path& reference_rmse) {
    if (cfg.labeled_path.empty()) throw ConfigError("config needs inputs.labeled for validate");
    const auto labeled = load_labeled(cfg.labeled_path);
    const ProviderBundle providers = make_providers(cfg);
    const auto report =
        personality::validate_against_labels(labeled, *providers.personality, cfg.inference, mode);

    std::string csv = csv_row(
        {"metric", "openness", "conscientiousness", "extraversion", "agreeableness", "neuroticism"});
    const auto emit = [&](const std::string& metric, const TraitVector& values) {
        std::vector<std::string> row{metric};
        for (const double v : values) row.push_back(text::format_sig6(v));
        csv += csv_row(row);
    };
    emit("rmse", report.rmse);
    emit("mse", report.mse);
    emit("mae", report.mae);
    if (!reference_rmse.empty()) {
        const TraitVector reference = load_reference_rmse(reference_rmse);
        emit("rmse_reference", reference);
        TraitVector delta{};
        for (int i = 0; i < kTraitCount; ++i)
            delta[static_cast<std::size_t>(i)] = report.rmse[static_cast<std::size_t>(i)] -
                                                 reference[static_cast<std::size_t>(i)];
        emit("rmse_delta", delta);
    }
    storage::write_text_file(cfg.out_dir / "validation_report.csv", csv);
    write_manifest_for(cfg, "validate", {cfg.labeled_path});
    return report;
}

// ---------------------------------------------------------------------------
// report

void cmd_report(const PipelineConfig& cfg) {
    std::ostringstream out;
    out << "cross-platform profiling run report\n";
    out << "====================================\n\n";

    const auto selected_path = selected_identities_path(cfg);
    if (std::filesystem::exists(selected_path)) {
        const auto selected = storage::load_identities(selected_path);
        out << "selected users: " << selected.size() << "\n";
        std::map<std::string, std::size_t> verified_counts;
        for (const auto& id : selected)
            for (const auto& [platform, flag] : id.verified)
                if (flag) ++verified_counts[platform.name];
        for (const auto& [platform, count] : verified_counts)
            out << "  active on " << platform << ": " << count << "\n";
        out << "\n";
    }

    const auto profiles_path = platform_profiles_path(cfg);
    if (std::filesystem::exists(profiles_path)) {
        const auto profiles = storage::load_platform_profiles(profiles_path);
        std::map<std::string, std::size_t> per_platform, with_vector, offensive;
        for (const auto& p : profiles) {
            ++per_platform[p.platform.name];
            if (p.personality) ++with_vector[p.platform.name];
            if (p.offensive) ++offensive[p.platform.name];
        }
        out << "platform profiles: " << profiles.size() << "\n";
        for (const auto& [platform, count] : per_platform)
            out << "  " << platform << ": " << count << " profiles, " << with_vector[platform]
                << " with personality, " << offensive[platform] << " offensive\n";
        out << "\n";
    }

    const auto filtered_path = cfg.out_dir / "filtered_users.jsonl";
    if (std::filesystem::exists(filtered_path)) {
        std::map<std::string, std::size_t> by_rule;
        std::istringstream in(storage::read_text_file(filtered_path));
        std::string line;
        while (std::getline(in, line)) {
            if (text::trim(line).empty()) continue;
            const json j = json::parse(line);
            ++by_rule[j.value("rule", "unknown")];
        }
        if (!by_rule.empty()) {
            out << "filtered user-platforms by rule:\n";
            for (const auto& [rule, count] : by_rule) out << "  " << rule << ": " << count << "\n";
            out << "\n";
        }
    }

    for (const auto& name :
         {"trait_means.csv", "change_magnitude.csv", "ks_tests.csv", "point_biserial.csv"}) {
        const auto path = cfg.out_dir / name;
        if (!std::filesystem::exists(path)) continue;
        out << name << ":\n" << storage::read_text_file(path) << "\n";
    }

    out << "notes\n";
    out << "-----\n";
    out << "- interest frequencies count one occurrence per user per category at the\n"
           "  reported level, so prolific posters do not dominate the tables.\n";
    out << "- run dispersion uses the population standard deviation over the runs.\n";
    out << "- the offensiveness rule compares attribute maxima with >= against the\n"
           "  threshold (" << text::format_sig6(cfg.offense.threshold) << ").\n";
    out << "- averaged traits cover only platforms whose personality inference\n"
           "  survived filtering; fully filtered users carry no averaged traits.\n";

    storage::write_text_file(cfg.out_dir / "report.txt", out.str());
}

} // namespace persona::pipeline
