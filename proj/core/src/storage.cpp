#include "persona/storage.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "persona/errors.hpp"
#include "persona/providers.hpp"
#include "persona/text.hpp"
#include "persona/version.hpp"

using nlohmann::json;

namespace persona::storage {

namespace {

json parse_line(const std::string& line, const std::string& context, std::size_t line_number) {
    try {
        return json::parse(line);
    } catch (const json::exception& e) {
        throw DataError(context + " line " + std::to_string(line_number) +
                        " is not valid JSON: " + e.what());
    }
}

// Applies fn to every nonempty line; line numbers are 1-based.
template <typename F>
void for_each_line(const std::string& text, F&& fn) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (text::trim(line).empty()) continue;
        fn(line, line_number);
    }
}

json identity_to_json(const matching::LinkedIdentity& id) {
    json j;
    j["user_key"] = id.user_key;
    json links = json::object();
    for (const auto& [platform, handle] : id.links) links[platform.name] = handle;
    j["links"] = links;
    if (!id.verified.empty()) {
        json verified = json::object();
        for (const auto& [platform, flag] : id.verified) verified[platform.name] = flag;
        j["verified"] = verified;
    }
    if (!id.manual_verified.empty()) {
        json manual = json::object();
        for (const auto& [platform, flag] : id.manual_verified) manual[platform.name] = flag;
        j["manual_verified"] = manual;
    }
    return j;
}

matching::LinkedIdentity identity_from_json(const json& j, const std::string& context,
                                            std::size_t line_number) {
    const std::string where = context + " line " + std::to_string(line_number);
    if (!j.contains("user_key") || !j["user_key"].is_string() ||
        j["user_key"].get<std::string>().empty())
        throw DataError(where + ": missing or empty user_key");
    matching::LinkedIdentity id;
    id.user_key = j["user_key"].get<std::string>();
    if (!j.contains("links") || !j["links"].is_object() || j["links"].empty())
        throw DataError(where + ": identity needs a nonempty links object");
    for (const auto& [platform, handle] : j["links"].items())
        id.links[PlatformId::parse(platform)] = handle.get<std::string>();
    if (j.contains("verified"))
        for (const auto& [platform, flag] : j["verified"].items()) {
            const PlatformId p = PlatformId::parse(platform);
            if (!id.links.contains(p))
                throw DataError(where + ": verified platform '" + p.name + "' not in links");
            id.verified[p] = flag.get<bool>();
        }
    if (j.contains("manual_verified"))
        for (const auto& [platform, flag] : j["manual_verified"].items())
            id.manual_verified[PlatformId::parse(platform)] = flag.get<bool>();
    return id;
}

// Segments go out as an array: category names are data, not syntax, so a
// slash inside a name must survive the trip.
json category_to_json(const CategoryPath& path) {
    return json{{"segments", path.segments}, {"confidence", path.confidence}};
}

CategoryPath category_from_json(const json& j) {
    CategoryPath path;
    path.segments = j.at("segments").get<std::vector<std::string>>();
    if (path.segments.empty()) throw DataError("category record has no segments");
    path.confidence = j.at("confidence").get<double>();
    return path;
}

json personality_to_json(const PersonalityVector& v) {
    json j;
    j["traits"] = v.traits;
    j["run_stddev"] = v.run_stddev;
    j["runs"] = v.runs;
    return j;
}

PersonalityVector personality_from_json(const json& j) {
    PersonalityVector v;
    v.traits = j.at("traits").get<TraitVector>();
    v.run_stddev = j.at("run_stddev").get<TraitVector>();
    v.runs = j.at("runs").get<int>();
    return v;
}

json platform_profile_to_json(const PlatformProfile& profile) {
    json j;
    j["user"] = profile.user;
    j["platform"] = profile.platform.name;
    if (profile.personality) j["personality"] = personality_to_json(*profile.personality);
    j["professional_interests"] = json::array();
    for (const auto& c : profile.professional_interests)
        j["professional_interests"].push_back(category_to_json(c));
    j["personal_interests"] = json::array();
    for (const auto& c : profile.personal_interests)
        j["personal_interests"].push_back(category_to_json(c));
    j["offensive"] = profile.offensive;
    j["offense"] = json{{"attribute_max", profile.offense.attribute_max},
                        {"n_posts_scored", profile.offense.n_posts_scored},
                        {"n_posts_failed", profile.offense.n_posts_failed}};
    return j;
}

PlatformProfile platform_profile_from_json(const json& j) {
    PlatformProfile profile;
    profile.user = j.at("user").get<std::string>();
    profile.platform = PlatformId::parse(j.at("platform").get<std::string>());
    if (j.contains("personality")) profile.personality = personality_from_json(j["personality"]);
    for (const auto& c : j.at("professional_interests"))
        profile.professional_interests.push_back(category_from_json(c));
    for (const auto& c : j.at("personal_interests"))
        profile.personal_interests.push_back(category_from_json(c));
    profile.offensive = j.at("offensive").get<bool>();
    const json& off = j.at("offense");
    profile.offense.attribute_max =
        off.at("attribute_max").get<std::map<std::string, double>>();
    profile.offense.n_posts_scored = off.at("n_posts_scored").get<int>();
    profile.offense.n_posts_failed = off.at("n_posts_failed").get<int>();
    return profile;
}

json cross_profile_to_json(const CrossPlatformProfile& profile) {
    json j;
    j["user"] = profile.user;
    if (profile.averaged_traits) j["averaged_traits"] = *profile.averaged_traits;
    json platforms = json::object();
    for (const auto& [platform, p] : profile.per_platform)
        platforms[platform.name] = platform_profile_to_json(p);
    j["platforms"] = platforms;
    return j;
}

CrossPlatformProfile cross_profile_from_json(const json& j) {
    CrossPlatformProfile profile;
    profile.user = j.at("user").get<std::string>();
    if (j.contains("averaged_traits")) profile.averaged_traits = j["averaged_traits"].get<TraitVector>();
    for (const auto& [platform, p] : j.at("platforms").items())
        profile.per_platform[PlatformId::parse(platform)] = platform_profile_from_json(p);
    return profile;
}

std::string header_line(const std::string& kind) {
    json header;
    header["schema_version"] = kSchemaVersion;
    header["kind"] = kind;
    return header.dump();
}

void check_header(const json& header, const std::string& kind, const std::string& context) {
    if (!header.contains("schema_version"))
        throw DataError(context + ": missing schema_version header");
    const int version = header["schema_version"].get<int>();
    if (version != kSchemaVersion)
        throw DataError(context + ": schema_version " + std::to_string(version) +
                        " unsupported, this build reads version " + std::to_string(kSchemaVersion));
    if (header.contains("kind") && header["kind"].get<std::string>() != kind)
        throw DataError(context + ": expected kind '" + kind + "', found '" +
                        header["kind"].get<std::string>() + "'");
}

} // namespace

std::string identities_to_jsonl(const std::vector<matching::LinkedIdentity>& identities) {
    std::string out;
    for (const auto& id : identities) {
        out += identity_to_json(id).dump();
        out += '\n';
    }
    return out;
}

std::vector<matching::LinkedIdentity> identities_from_jsonl(const std::string& text) {
    std::vector<matching::LinkedIdentity> identities;
    std::map<std::string, std::size_t> seen;
    for_each_line(text, [&](const std::string& line, std::size_t line_number) {
        const json j = parse_line(line, "identities", line_number);
        matching::LinkedIdentity id = identity_from_json(j, "identities", line_number);
        const auto [it, inserted] = seen.emplace(id.user_key, line_number);
        if (!inserted)
            throw DataError("identities line " + std::to_string(line_number) +
                            ": duplicate user_key '" + id.user_key + "' (first seen on line " +
                            std::to_string(it->second) + ")");
        identities.push_back(std::move(id));
    });
    return identities;
}

std::vector<matching::LinkedIdentity> load_identities(const std::filesystem::path& path) {
    return identities_from_jsonl(read_text_file(path));
}

void save_identities(const std::filesystem::path& path,
                     const std::vector<matching::LinkedIdentity>& identities) {
    write_text_file(path, identities_to_jsonl(identities));
}

CorpusMap corpora_from_jsonl(const std::string& text) {
    struct Pending {
        std::vector<Post> posts;
    };
    std::map<CorpusKey, Pending> groups;
    for_each_line(text, [&](const std::string& line, std::size_t line_number) {
        const json j = parse_line(line, "corpora", line_number);
        const std::string where = "corpora line " + std::to_string(line_number);
        if (!j.contains("user_key") || !j["user_key"].is_string() ||
            j["user_key"].get<std::string>().empty())
            throw DataError(where + ": missing or empty user_key");
        if (!j.contains("platform")) throw DataError(where + ": missing platform");
        if (!j.contains("text") || !j["text"].is_string())
            throw DataError(where + ": missing text field");
        Post post;
        post.author_key = j["user_key"].get<std::string>();
        post.platform = PlatformId::parse(j["platform"].get<std::string>());
        post.text = j["text"].get<std::string>();
        post.is_bio = j.contains("kind") && j["kind"].get<std::string>() == "bio";
        if (post.text.empty() && !post.is_bio)
            throw DataError(where + ": empty text is only allowed for bio records");
        if (j.contains("posted_at") && !j["posted_at"].is_null()) {
            const auto ts = text::parse_iso8601(j["posted_at"].get<std::string>());
            if (!ts) throw DataError(where + ": unparseable posted_at timestamp");
            post.posted_at = *ts;
        }
        groups[{post.author_key, post.platform}].posts.push_back(std::move(post));
    });

    CorpusMap corpora;
    for (auto& [key, pending] : groups) {
        PostCorpus corpus;
        corpus.user = key.first;
        corpus.platform = key.second;
        corpus.posts = std::move(pending.posts);
        // Most recent first; posts without timestamps sink to the end in file
        // order.
        std::stable_sort(corpus.posts.begin(), corpus.posts.end(),
                         [](const Post& a, const Post& b) {
                             const auto ta = a.posted_at.value_or(
                                 std::numeric_limits<std::int64_t>::min());
                             const auto tb = b.posted_at.value_or(
                                 std::numeric_limits<std::int64_t>::min());
                             return ta > tb;
                         });
        corpora.emplace(key, std::move(corpus));
    }
    return corpora;
}

std::string corpora_to_jsonl(const CorpusMap& corpora) {
    std::string out;
    for (const auto& [key, corpus] : corpora) {
        for (const auto& post : corpus.posts) {
            json j;
            j["user_key"] = corpus.user;
            j["platform"] = corpus.platform.name;
            if (post.posted_at) j["posted_at"] = text::format_iso8601(*post.posted_at);
            j["text"] = post.text;
            if (post.is_bio) j["kind"] = "bio";
            out += j.dump();
            out += '\n';
        }
    }
    return out;
}

CorpusMap load_corpora(const std::filesystem::path& path) {
    return corpora_from_jsonl(read_text_file(path));
}

void save_corpora(const std::filesystem::path& path, const CorpusMap& corpora) {
    write_text_file(path, corpora_to_jsonl(corpora));
}

std::string profiles_to_string(const std::vector<CrossPlatformProfile>& profiles) {
    std::vector<const CrossPlatformProfile*> sorted;
    sorted.reserve(profiles.size());
    for (const auto& p : profiles) sorted.push_back(&p);
    std::sort(sorted.begin(), sorted.end(),
              [](const auto* a, const auto* b) { return a->user < b->user; });
    std::string out = header_line("cross_platform_profiles") + "\n";
    for (const auto* p : sorted) {
        out += cross_profile_to_json(*p).dump();
        out += '\n';
    }
    return out;
}

std::vector<CrossPlatformProfile> profiles_from_string(const std::string& text) {
    std::vector<CrossPlatformProfile> profiles;
    bool header_seen = false;
    for_each_line(text, [&](const std::string& line, std::size_t line_number) {
        const json j = parse_line(line, "profiles", line_number);
        if (!header_seen) {
            check_header(j, "cross_platform_profiles", "profiles");
            header_seen = true;
            return;
        }
        profiles.push_back(cross_profile_from_json(j));
    });
    if (!header_seen) throw DataError("profiles: missing schema header line");
    return profiles;
}

void persist_profiles(const std::filesystem::path& path,
                      const std::vector<CrossPlatformProfile>& profiles) {
    write_text_file(path, profiles_to_string(profiles));
}

std::vector<CrossPlatformProfile> load_profiles(const std::filesystem::path& path) {
    return profiles_from_string(read_text_file(path));
}

std::string platform_profiles_to_string(const std::vector<PlatformProfile>& profiles) {
    std::vector<const PlatformProfile*> sorted;
    sorted.reserve(profiles.size());
    for (const auto& p : profiles) sorted.push_back(&p);
    std::sort(sorted.begin(), sorted.end(), [](const auto* a, const auto* b) {
        if (a->user != b->user) return a->user < b->user;
        return a->platform < b->platform;
    });
    std::string out = header_line("platform_profiles") + "\n";
    for (const auto* p : sorted) {
        out += platform_profile_to_json(*p).dump();
        out += '\n';
    }
    return out;
}

std::vector<PlatformProfile> platform_profiles_from_string(const std::string& text) {
    std::vector<PlatformProfile> profiles;
    bool header_seen = false;
    for_each_line(text, [&](const std::string& line, std::size_t line_number) {
        const json j = parse_line(line, "platform profiles", line_number);
        if (!header_seen) {
            check_header(j, "platform_profiles", "platform profiles");
            header_seen = true;
            return;
        }
        profiles.push_back(platform_profile_from_json(j));
    });
    if (!header_seen) throw DataError("platform profiles: missing schema header line");
    return profiles;
}

void persist_platform_profiles(const std::filesystem::path& path,
                               const std::vector<PlatformProfile>& profiles) {
    write_text_file(path, platform_profiles_to_string(profiles));
}

std::vector<PlatformProfile> load_platform_profiles(const std::filesystem::path& path) {
    return platform_profiles_from_string(read_text_file(path));
}

std::size_t Taxonomy::leaf_count() const {
    std::size_t n = 0;
    for (const auto& [root, leaves] : tree) n += leaves.size();
    return n;
}

Taxonomy load_taxonomy(const std::filesystem::path& path) {
    json doc;
    try {
        doc = json::parse(read_text_file(path));
    } catch (const json::exception& e) {
        throw DataError("malformed taxonomy file " + path.string() + ": " + e.what());
    }
    if (!doc.contains("categories") || !doc["categories"].is_object())
        throw DataError("taxonomy file " + path.string() + " needs a categories object");
    Taxonomy tax;
    for (const auto& [root, leaves] : doc["categories"].items()) {
        std::vector<std::string> paths;
        for (const auto& leaf : leaves) paths.push_back(leaf.get<std::string>());
        tax.tree[root] = std::move(paths);
    }
    return tax;
}

RunManifest make_manifest(const std::string& command, const std::string& config_json,
                          const std::vector<std::filesystem::path>& inputs) {
    RunManifest manifest;
    manifest.command = command;
    manifest.tool_version = kToolVersion;
    manifest.config_json = config_json;
    for (const auto& input : inputs)
        manifest.input_digests[input.string()] = file_sha256(input);
    std::string preimage = command;
    preimage += '\x1f';
    preimage += config_json;
    for (const auto& [file, digest] : manifest.input_digests) {
        preimage += '\x1f';
        preimage += file;
        preimage += '=';
        preimage += digest;
    }
    manifest.run_id = providers::sha256_hex(preimage).substr(0, 16);
    return manifest;
}

void write_manifest(const std::filesystem::path& path, const RunManifest& manifest) {
    json j;
    j["run_id"] = manifest.run_id;
    j["command"] = manifest.command;
    j["tool_version"] = manifest.tool_version;
    j["config"] = json::parse(manifest.config_json);
    j["input_digests"] = manifest.input_digests;
    write_text_file(path, j.dump(2) + "\n");
}

std::string file_sha256(const std::filesystem::path& path) {
    return providers::sha256_hex(read_text_file(path));
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    if (!out) throw DataError("cannot open for writing: " + path.string());
    out << content;
    if (!out) throw DataError("write failed: " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

} // namespace persona::storage
