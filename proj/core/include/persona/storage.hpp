#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "persona/domain.hpp"
#include "persona/matching.hpp"

namespace persona::storage {

inline constexpr int kSchemaVersion = 1;

// --- identities -------------------------------------------------------------
// JSONL, one identity per line:
//   {"user_key": "...", "links": {"platform": "handle"},
//    "manual_verified": {"platform": true}, "verified": {"platform": true}}
// manual_verified and verified are optional.
std::vector<matching::LinkedIdentity> load_identities(const std::filesystem::path& path);
void save_identities(const std::filesystem::path& path,
                     const std::vector<matching::LinkedIdentity>& identities);
std::string identities_to_jsonl(const std::vector<matching::LinkedIdentity>& identities);
std::vector<matching::LinkedIdentity> identities_from_jsonl(const std::string& text);

// --- corpora ----------------------------------------------------------------
// JSONL, one post per line:
//   {"user_key": "...", "platform": "...", "posted_at": "2024-01-02T03:04:05Z",
//    "text": "...", "kind": "bio"}
// posted_at and kind are optional. Posts are grouped per (user, platform) and
// sorted most recent first; posts without timestamps keep file order at the end.
CorpusMap load_corpora(const std::filesystem::path& path);
CorpusMap corpora_from_jsonl(const std::string& text);
std::string corpora_to_jsonl(const CorpusMap& corpora);
void save_corpora(const std::filesystem::path& path, const CorpusMap& corpora);

// --- profiles ---------------------------------------------------------------
// JSONL with a header record {"schema_version": 1, "kind": ...}; loading a
// file with a different schema_version is an error naming both versions.
void persist_profiles(const std::filesystem::path& path,
                      const std::vector<CrossPlatformProfile>& profiles);
std::vector<CrossPlatformProfile> load_profiles(const std::filesystem::path& path);
std::string profiles_to_string(const std::vector<CrossPlatformProfile>& profiles);
std::vector<CrossPlatformProfile> profiles_from_string(const std::string& text);

void persist_platform_profiles(const std::filesystem::path& path,
                               const std::vector<PlatformProfile>& profiles);
std::vector<PlatformProfile> load_platform_profiles(const std::filesystem::path& path);
std::string platform_profiles_to_string(const std::vector<PlatformProfile>& profiles);
std::vector<PlatformProfile> platform_profiles_from_string(const std::string& text);

// --- taxonomy ---------------------------------------------------------------
// {"version": 1, "categories": {"Root": ["Leaf", "Mid/Leaf", ...], ...}}
struct Taxonomy {
    std::map<std::string, std::vector<std::string>> tree; // root -> leaf paths
    bool has_root(const std::string& root) const { return tree.contains(root); }
    std::size_t root_count() const { return tree.size(); }
    std::size_t leaf_count() const;
};
Taxonomy load_taxonomy(const std::filesystem::path& path);

// --- run manifests ----------------------------------------------------------
struct RunManifest {
    std::string run_id; // digest of command, config, and input digests
    std::string command;
    std::string tool_version;
    std::string config_json; // canonical snapshot
    std::map<std::string, std::string> input_digests;
};

RunManifest make_manifest(const std::string& command, const std::string& config_json,
                          const std::vector<std::filesystem::path>& inputs);
void write_manifest(const std::filesystem::path& path, const RunManifest& manifest);

std::string file_sha256(const std::filesystem::path& path);

// --- misc -------------------------------------------------------------------
void write_text_file(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

} // namespace persona::storage
