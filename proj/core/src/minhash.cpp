#include "weave/minhash.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>

#include "weave/error.hpp"
#include "weave/hashing.hpp"
#include "weave/unicode.hpp"
#include "weave/utf8.hpp"

namespace weave {

std::vector<std::string> char_wb_ngrams(std::string_view text, std::size_t min_n, std::size_t max_n) {
    std::vector<std::string> out;
    const std::u32string cps = utf8::decode(unicode::lower(text));
    std::size_t i = 0;
    while (i < cps.size()) {
        while (i < cps.size() && unicode::is_whitespace(cps[i])) ++i;
        if (i == cps.size()) break;
        std::size_t j = i;
        while (j < cps.size() && !unicode::is_whitespace(cps[j])) ++j;
        std::u32string w = U" ";
        w.append(cps, i, j - i);
        w.push_back(U' ');
        i = j;

        for (std::size_t n = min_n; n <= max_n; ++n) {
            std::size_t offset = 0;
            out.push_back(utf8::encode(std::u32string_view(w).substr(offset, n)));
            while (offset + n < w.size()) {
                ++offset;
                out.push_back(utf8::encode(std::u32string_view(w).substr(offset, n)));
            }
            // A word shorter than n yields itself once, for the smallest n only.
            if (offset == 0) break;
        }
    }
    return out;
}

std::vector<std::uint64_t> feature_set(std::string_view text, const FeatureOptions& opt) {
    if (opt.num_features == 0) throw Error("num_features must be positive");
    std::vector<std::uint64_t> out;
    for (const auto& g : char_wb_ngrams(text, opt.min_n, opt.max_n)) out.push_back(fnv1a64(g) % opt.num_features);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

namespace {

std::uint64_t mod_mersenne61(unsigned __int128 x) {
    std::uint64_t r = static_cast<std::uint64_t>(x & kMersenne61) + static_cast<std::uint64_t>(x >> 61);
    r = (r & kMersenne61) + (r >> 61);
    return r >= kMersenne61 ? r - kMersenne61 : r;
}

}  // namespace

MinHasher::MinHasher(std::size_t num_perm, std::uint64_t seed) : seed_(seed) {
    if (num_perm == 0) throw Error("num_perm must be positive");
    std::mt19937_64 rng(seed);
    a_.resize(num_perm);
    b_.resize(num_perm);
    for (std::size_t i = 0; i < num_perm; ++i) {
        a_[i] = 1 + rng() % (kMersenne61 - 1);
        b_[i] = rng() % kMersenne61;
    }
}

Signature MinHasher::operator()(const std::vector<std::uint64_t>& features) const {
    Signature sig(a_.size(), kEmptySlot);
    for (std::uint64_t f : features) {
        const std::uint64_t x = f % kMersenne61;
        for (std::size_t i = 0; i < a_.size(); ++i) {
            const std::uint64_t h = mod_mersenne61(static_cast<unsigned __int128>(a_[i]) * x + b_[i]);
            if (h < sig[i]) sig[i] = h;
        }
    }
    return sig;
}

double estimate_jaccard(const Signature& x, const Signature& y) {
    if (x.size() != y.size() || x.empty()) throw Error("signature size mismatch");
    std::size_t same = 0;
    for (std::size_t i = 0; i < x.size(); ++i) same += x[i] == y[i];
    return static_cast<double>(same) / static_cast<double>(x.size());
}

double lsh_collision_probability(double j, LshParams p) {
    return 1.0 - std::pow(1.0 - std::pow(j, static_cast<double>(p.rows)), static_cast<double>(p.bands));
}

namespace {

// Composite Simpson's rule; the integrands are smooth polynomials.
template <class F>
double integrate(F f, double a, double b, int intervals = 2000) {
    if (b <= a) return 0.0;
    const double h = (b - a) / intervals;
    double sum = f(a) + f(b);
    for (int k = 1; k < intervals; ++k) sum += f(a + k * h) * (k % 2 ? 4.0 : 2.0);
    return sum * h / 3.0;
}

}  // namespace

LshParams optimal_lsh_params(double threshold, std::size_t num_perm, double fp_weight, double fn_weight) {
    if (threshold <= 0.0 || threshold >= 1.0) throw Error("LSH threshold must be in (0,1)");
    double best = std::numeric_limits<double>::infinity();
    LshParams out{1, 1};
    for (std::size_t b = 1; b <= num_perm; ++b) {
        for (std::size_t r = 1; b * r <= num_perm; ++r) {
            const LshParams p{b, r};
            const double fp = integrate([&](double s) { return lsh_collision_probability(s, p); }, 0.0, threshold);
            const double fn = integrate([&](double s) { return 1.0 - lsh_collision_probability(s, p); }, threshold, 1.0);
            const double err = fp_weight * fp + fn_weight * fn;
            if (err < best) {
                best = err;
                out = p;
            }
        }
    }
    return out;
}

LshIndex::LshIndex(LshParams params, std::size_t num_perm) : params_(params), num_perm_(num_perm) {
    if (params.bands == 0 || params.rows == 0 || params.bands * params.rows > num_perm) {
        throw Error("invalid LSH parameters");
    }
    tables_.resize(params.bands);
}

std::string LshIndex::band_key(const Signature& sig, std::size_t band) const {
    std::string key(params_.rows * sizeof(std::uint64_t), '\0');
    std::memcpy(key.data(), sig.data() + band * params_.rows, key.size());
    return key;
}

std::optional<DocId> LshIndex::query(const Signature& sig) const {
    if (sig.size() != num_perm_) throw Error("signature size mismatch");
    for (std::size_t band = 0; band < params_.bands; ++band) {
        const auto it = tables_[band].find(band_key(sig, band));
        if (it != tables_[band].end()) return it->second;
    }
    return std::nullopt;
}

void LshIndex::insert(const DocId& id, const Signature& sig) {
    if (sig.size() != num_perm_) throw Error("signature size mismatch");
    for (std::size_t band = 0; band < params_.bands; ++band) tables_[band].try_emplace(band_key(sig, band), id);
    ++size_;
}

bool LshIndex::insert_if_new(const DocId& id, const Signature& sig) {
    if (query(sig)) return false;
    insert(id, sig);
    return true;
}

}  // namespace weave
