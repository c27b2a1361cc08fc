#pragma once

#include <chrono>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "weave/document.hpp"
#include "weave/scorer.hpp"

namespace weave {

struct NodePrediction {
    LidResult top3;  // at most 3 entries, probabilities non-increasing
    std::size_t char_count = 0;
};

struct LangVerdict {
    std::string winner;
    std::map<std::string, double> table;
};

/// table[L] = sum over nodes of p(L) * char_count; the winner is the argmax,
/// ties going to the lexicographically smallest code. Throws weave::Error
/// ("no_text") for an empty prediction list.
LangVerdict aggregate(const std::vector<NodePrediction>& predictions);

struct LidOptions {
    std::size_t top_k = 3;
    int retries = 2;
    std::chrono::milliseconds backoff{50};
};

struct ClassifyResult {
    bool ok = false;
    std::string reason;  // "lid_unavailable" or "no_text" on failure
};

/// Runs the scorer's `lid` op over every text node and stores the verdict in
/// doc.lang / doc.lang_scores (scores sorted by descending value, then code).
ClassifyResult classify_document(Document& doc, Scorer& scorer, const LidOptions& options = {});

}  // namespace weave
