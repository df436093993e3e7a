#pragma once

#include <string>
#include <vector>

#include "persona/domain.hpp"
#include "persona/providers.hpp"

namespace persona::offense {

struct OffenseConfig {
    double threshold = 0.8; // a user is offensive when any attribute max >= this

    void validate() const;
};

struct AuditEntry {
    std::string user;
    PlatformId platform;
    int post_index = 0;
    std::string attribute;
    double score = 0.0;
};

struct ScoreOutcome {
    OffenseScores scores;
    std::vector<AuditEntry> audit; // per post and attribute, for correlation work
};

// Sentence-boundary chunks no longer than limit (single oversized sentences
// fall back to a hard split).
std::vector<std::string> split_into_chunks(const std::string& text, std::size_t limit);

// Per-attribute maximum over every scored post. Posts that still fail after
// retries are excluded and counted; all posts failing is an error.
ScoreOutcome score_offensiveness(const PostCorpus& corpus, providers::OffensivenessScorer& scorer,
                                 const providers::RetryPolicy& retry = {});

// Offensive iff any attribute maximum is at or above the threshold.
bool classify_offensive(const OffenseScores& scores, const OffenseConfig& cfg);

} // namespace persona::offense
