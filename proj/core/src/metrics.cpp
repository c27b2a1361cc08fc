#include "weave/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <unordered_set>

#include <Eigen/Dense>

#include "weave/error.hpp"
#include "weave/unicode.hpp"
#include "weave/utf8.hpp"

namespace weave {

namespace {

Eigen::MatrixXd normalized_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) throw Error("vendi score needs at least one row");
    const std::size_t d = rows.front().size();
    if (d == 0) throw Error("empty embedding");
    Eigen::MatrixXd x(rows.size(), d);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != d) throw Error("ragged embedding batch");
        double sq = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            if (!std::isfinite(rows[i][j])) throw Error("non-finite embedding");
            sq += rows[i][j] * rows[i][j];
        }
        if (sq == 0.0) throw Error("zero embedding");
        const double inv = 1.0 / std::sqrt(sq);
        for (std::size_t j = 0; j < d; ++j) x(i, j) = rows[i][j] * inv;
    }
    return x;
}

}  // namespace

std::vector<double> vendi_spectrum(const std::vector<std::vector<double>>& rows) {
    const Eigen::MatrixXd x = normalized_rows(rows);
    const auto n = static_cast<double>(x.rows());
    Eigen::MatrixXd k = (x * x.transpose()) / n;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(k, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw Error("eigendecomposition failed");
    const auto& ev = solver.eigenvalues();
    return {ev.data(), ev.data() + ev.size()};
}

double entropy_exp(const std::vector<double>& eigenvalues) {
    double h = 0.0;
    for (double l : eigenvalues) {
        if (l > 0.0) h -= l * std::log(l);
    }
    return std::exp(h);
}

double vendi_score(const std::vector<std::vector<double>>& rows) { return entropy_exp(vendi_spectrum(rows)); }

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    const std::string lowered = unicode::lower(text);
    std::string cur;
    std::size_t pos = 0;
    while (pos < lowered.size()) {
        const std::size_t start = pos;
        const char32_t cp = utf8::next(lowered, pos);
        if (unicode::is_whitespace(cp)) {
            if (!cur.empty()) out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.append(lowered, start, pos - start);
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

NgramRatios distinct_ngram_ratio(const std::vector<std::string>& texts, int max_n) {
    if (texts.empty()) throw Error("empty sample");
    if (max_n < 1) throw Error("max_n must be >= 1");
    std::vector<std::vector<std::string>> docs;
    docs.reserve(texts.size());
    for (const auto& t : texts) docs.push_back(tokenize(t));

    NgramRatios out;
    double sum = 0.0;
    int defined = 0;
    for (int n = 1; n <= max_n; ++n) {
        std::unordered_set<std::string> unique;
        std::uint64_t total = 0;
        for (const auto& toks : docs) {
            if (toks.size() < static_cast<std::size_t>(n)) continue;
            for (std::size_t i = 0; i + n <= toks.size(); ++i) {
                std::string key;
                for (int j = 0; j < n; ++j) {
                    if (j) key.push_back('\x1f');
                    key += toks[i + j];
                }
                unique.insert(std::move(key));
                ++total;
            }
        }
        if (total == 0) {
            out.ratio.push_back(std::nullopt);
            continue;
        }
        const double r = static_cast<double>(unique.size()) / static_cast<double>(total);
        out.ratio.push_back(r);
        sum += r;
        ++defined;
    }
    if (defined) out.mean = sum / defined;
    return out;
}

std::uint64_t Histogram::total() const {
    std::uint64_t t = 0;
    for (const auto& [bin, c] : counts) t += c;
    return t;
}

std::string Histogram::to_csv() const {
    std::ostringstream os;
    os << "bin_start,bin_end,count\n";
    for (const auto& [bin, c] : counts) os << bin << ',' << bin + bin_width << ',' << c << '\n';
    return os.str();
}

Histogram make_histogram(const std::vector<std::uint64_t>& values, std::uint64_t bin_width) {
    if (bin_width == 0) throw Error("bin width must be positive");
    Histogram h;
    h.bin_width = bin_width;
    if (values.empty()) return h;
    std::vector<std::uint64_t> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    Summary s;
    double sum = 0.0;
    for (auto v : sorted) {
        ++h.counts[v / bin_width * bin_width];
        sum += static_cast<double>(v);
    }
    s.mean = sum / static_cast<double>(sorted.size());
    const std::size_t mid = sorted.size() / 2;
    s.median = sorted.size() % 2 ? static_cast<double>(sorted[mid])
                                 : (static_cast<double>(sorted[mid - 1]) + static_cast<double>(sorted[mid])) / 2.0;
    s.min = sorted.front();
    s.max = sorted.back();
    h.summary = s;
    return h;
}

DistRecord dist_record(const Document& doc) {
    DistRecord r;
    r.id = doc.id;
    r.lang = doc.lang.value_or("");
    for (const auto& node : doc.nodes) {
        if (const auto* t = std::get_if<TextNode>(&node)) {
            r.tokens += tokenize(t->text).size();
        } else {
            ++r.images;
        }
    }
    return r;
}

std::string Distributions::joint_csv() const {
    std::ostringstream os;
    os << "token_bin_start,image_bin_start,count\n";
    for (const auto& [key, c] : joint) os << key.first << ',' << key.second << ',' << c << '\n';
    return os.str();
}

Distributions distributions(const std::vector<DistRecord>& records, std::uint64_t token_bin, std::uint64_t image_bin) {
    std::vector<std::uint64_t> tokens;
    std::vector<std::uint64_t> images;
    Distributions d;
    for (const auto& r : records) {
        tokens.push_back(r.tokens);
        images.push_back(r.images);
        ++d.joint[{r.tokens / token_bin * token_bin, r.images / image_bin * image_bin}];
        ++d.docs_per_lang[r.lang];
    }
    d.tokens = make_histogram(tokens, token_bin);
    d.images = make_histogram(images, image_bin);
    return d;
}

double OffsetHistogram::share_within(long radius) const {
    if (total == 0) return 0.0;
    std::uint64_t in = 0;
    for (const auto& [off, c] : counts) {
        if (off >= -radius && off <= radius) in += c;
    }
    return static_cast<double>(in) / static_cast<double>(total);
}

OffsetHistogram node_offset_histogram(const std::vector<PairDecision>& decisions) {
    OffsetHistogram h;
    for (const auto& d : decisions) {
        ++h.counts[static_cast<long>(d.partner_index) - static_cast<long>(d.node_index)];
        ++h.total;
    }
    return h;
}

}  // namespace weave
