#include "weave/lang_id.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "weave/error.hpp"
#include "weave/utf8.hpp"

namespace weave {

LangVerdict aggregate(const std::vector<NodePrediction>& predictions) {
    if (predictions.empty()) throw Error("no_text");
    LangVerdict v;
    for (const auto& pred : predictions) {
        for (const auto& [code, p] : pred.top3) v.table[code] += p * static_cast<double>(pred.char_count);
    }
    if (v.table.empty()) throw Error("no_text");
    // std::map iterates codes in ascending order, so a strict win keeps the
    // smallest code on ties. Scores within a relative 1e-9 count as tied, so
    // summation order and scaling cannot split an exact tie.
    double best = -1.0;
    for (const auto& [code, score] : v.table) {
        if (score > best + 1e-9 * std::max(std::abs(best), std::abs(score))) {
            best = score;
            v.winner = code;
        }
    }
    return v;
}

ClassifyResult classify_document(Document& doc, Scorer& scorer, const LidOptions& options) {
    std::vector<std::string> texts;
    std::vector<std::size_t> chars;
    for (const auto& node : doc.nodes) {
        if (const auto* t = std::get_if<TextNode>(&node)) {
            if (t->text.empty()) continue;
            texts.push_back(t->text);
            chars.push_back(utf8::length(t->text));
        }
    }
    if (texts.empty()) return {false, "no_text"};

    std::vector<std::optional<LidResult>> results(texts.size());
    std::vector<std::size_t> todo(texts.size());
    for (std::size_t i = 0; i < todo.size(); ++i) todo[i] = i;

    auto delay = options.backoff;
    for (int attempt = 0; attempt <= options.retries && !todo.empty(); ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(delay);
            delay *= 2;
        }
        std::vector<std::string> batch;
        batch.reserve(todo.size());
        for (auto i : todo) batch.push_back(texts[i]);
        const auto scored = scorer.lid(batch);
        std::vector<std::size_t> still;
        for (std::size_t k = 0; k < todo.size(); ++k) {
            if (k < scored.size() && scored[k].ok()) {
                results[todo[k]] = *scored[k].value;
            } else {
                still.push_back(todo[k]);
            }
        }
        todo = std::move(still);
    }
    if (!todo.empty()) return {false, "lid_unavailable"};

    std::vector<NodePrediction> preds;
    preds.reserve(texts.size());
    for (std::size_t i = 0; i < texts.size(); ++i) {
        NodePrediction p;
        p.top3 = std::move(*results[i]);
        if (p.top3.size() > options.top_k) p.top3.resize(options.top_k);
        p.char_count = chars[i];
        preds.push_back(std::move(p));
    }
    const LangVerdict verdict = aggregate(preds);

    doc.lang = verdict.winner;
    doc.lang_scores.assign(verdict.table.begin(), verdict.table.end());
    std::stable_sort(doc.lang_scores.begin(), doc.lang_scores.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    doc.stage_flags.insert("lang_id");
    return {true, {}};
}

}  // namespace weave
