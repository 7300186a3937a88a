#include "ciris/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

#include <json.hpp>

namespace ciris {

namespace {

void cap_pairs(std::vector<SamplePair>& pairs, std::size_t cap, std::mt19937_64& rng) {
    if (cap == 0 || pairs.size() <= cap) return;
    std::vector<std::size_t> idx(pairs.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    // Partial Fisher-Yates: the first cap slots become a uniform subset.
    for (std::size_t i = 0; i < cap; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
        std::swap(idx[i], idx[pick(rng)]);
    }
    idx.resize(cap);
    std::sort(idx.begin(), idx.end());
    std::vector<SamplePair> kept;
    kept.reserve(cap);
    for (auto i : idx) kept.push_back(pairs[i]);
    pairs = std::move(kept);
}

void require_scores(const ScoreSet& s) {
    if (s.genuine.empty() || s.impostor.empty())
        throw std::invalid_argument("metrics need both genuine and impostor scores");
}

struct Curve {
    std::vector<double> far, frr;  // with the virtual (0, 1) start
};

Curve curve_with_start(const ScoreSet& s) {
    Curve c{{0.0}, {1.0}};
    for (const auto& p : roc(s)) {
        c.far.push_back(p.far);
        c.frr.push_back(p.frr);
    }
    return c;
}

}  // namespace

PairSet enumerate_pairs(const std::vector<int>& identities, std::size_t cap, std::uint64_t seed) {
    PairSet set;
    for (std::size_t i = 0; i < identities.size(); ++i)
        for (std::size_t j = i + 1; j < identities.size(); ++j)
            (identities[i] == identities[j] ? set.genuine : set.impostor).push_back({i, j});
    if (set.genuine.empty()) set.warnings.push_back("no genuine pairs: every identity has a single sample");
    if (set.impostor.empty()) set.warnings.push_back("no impostor pairs: fewer than two identities");
    std::mt19937_64 rng(seed);
    cap_pairs(set.genuine, cap, rng);
    cap_pairs(set.impostor, cap, rng);
    return set;
}

std::vector<RocPoint> roc(const ScoreSet& scores) {
    require_scores(scores);
    std::vector<double> g = scores.genuine, im = scores.impostor, t;
    std::sort(g.begin(), g.end());
    std::sort(im.begin(), im.end());
    t.reserve(g.size() + im.size());
    std::merge(g.begin(), g.end(), im.begin(), im.end(), std::back_inserter(t));
    t.erase(std::unique(t.begin(), t.end()), t.end());
    std::vector<RocPoint> out;
    out.reserve(t.size());
    std::size_t gi = 0, ii = 0;
    for (double th : t) {
        while (gi < g.size() && g[gi] <= th) ++gi;
        while (ii < im.size() && im[ii] <= th) ++ii;
        out.push_back({th, double(ii) / double(im.size()), double(g.size() - gi) / double(g.size())});
    }
    return out;
}

double eer(const ScoreSet& scores) {
    const Curve c = curve_with_start(scores);
    for (std::size_t k = 1; k < c.far.size(); ++k) {
        const double d0 = c.far[k - 1] - c.frr[k - 1], d1 = c.far[k] - c.frr[k];
        if (d1 == 0) return c.far[k];
        if (d0 < 0 && d1 > 0) {
            const double a = d0 / (d0 - d1);
            return c.far[k - 1] + a * (c.far[k] - c.far[k - 1]);
        }
    }
    // Unreachable: the last point has FAR 1 and FRR 0.
    return c.far.back();
}

double frr_at_far(const ScoreSet& scores, double far) {
    if (!(far >= 0 && far <= 1)) throw std::invalid_argument("FAR must lie in [0, 1]");
    const Curve c = curve_with_start(scores);
    std::size_t k = 0;
    while (k + 1 < c.far.size() && c.far[k + 1] <= far) ++k;
    if (k + 1 == c.far.size() || c.far[k] == far) return c.frr[k];
    const double a = (far - c.far[k]) / (c.far[k + 1] - c.far[k]);
    return c.frr[k] + a * (c.frr[k + 1] - c.frr[k]);
}

Separation separation(const ScoreSet& scores) {
    require_scores(scores);
    auto stats = [](const std::vector<double>& v) {
        double m = 0, s = 0;
        for (double x : v) m += x;
        m /= double(v.size());
        for (double x : v) s += (x - m) * (x - m);
        return std::pair{m, v.size() > 1 ? s / double(v.size() - 1) : 0.0};
    };
    const auto [mg, vg] = stats(scores.genuine);
    const auto [mi, vi] = stats(scores.impostor);
    Separation s{mg, mi, std::sqrt(vg / double(scores.genuine.size()) +
                                   vi / double(scores.impostor.size())), 0};
    s.gap_in_se = s.standard_error > 0 ? (mi - mg) / s.standard_error
                                       : (mi > mg ? INFINITY : 0.0);
    return s;
}

EvalSummary summarize(const ScoreSet& scores, double far) {
    EvalSummary s;
    s.eer = eer(scores);
    s.far = far;
    s.frr_at_far = frr_at_far(scores, far);
    s.genuine_pairs = scores.genuine.size();
    s.impostor_pairs = scores.impostor.size();
    s.separation = separation(scores);
    return s;
}

std::string format_number(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

void write_scores_csv(const std::string& path, const std::vector<ScoredPair>& pairs) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << "pair_id,label,score\n";
    for (const auto& p : pairs)
        out << p.id << ',' << (p.genuine ? "genuine" : "impostor") << ',' << format_number(p.score)
            << '\n';
    if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

void write_roc_csv(const std::string& path, const std::vector<RocPoint>& curve) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << "threshold,far,frr\n";
    for (const auto& p : curve)
        out << format_number(p.threshold) << ',' << format_number(p.far) << ','
            << format_number(p.frr) << '\n';
    if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

std::string summary_json(const EvalSummary& s) {
    nlohmann::ordered_json j;
    j["eer"] = s.eer;
    j["frr_at_far_" + format_number(s.far)] = s.frr_at_far;
    j["genuine_pairs"] = s.genuine_pairs;
    j["impostor_pairs"] = s.impostor_pairs;
    j["genuine_mean"] = s.separation.genuine_mean;
    j["impostor_mean"] = s.separation.impostor_mean;
    if (std::isfinite(s.separation.gap_in_se))
        j["gap_in_standard_errors"] = s.separation.gap_in_se;
    else
        j["gap_in_standard_errors"] = nullptr;
    return j.dump(2) + "\n";
}

void write_summary(const std::string& path, const EvalSummary& summary) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << summary_json(summary);
    if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

}  // namespace ciris
