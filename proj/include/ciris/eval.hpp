#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace ciris {

struct SamplePair {
    std::size_t a = 0, b = 0;  ///< a < b
    friend bool operator==(const SamplePair&, const SamplePair&) = default;
};

struct PairSet {
    std::vector<SamplePair> genuine, impostor;
    std::vector<std::string> warnings;
};

/// All unordered same-identity (genuine) and cross-identity (impostor)
/// pairs in index order. With cap > 0 each list longer than cap is reduced
/// to a seeded random subset of cap pairs (still in index order).
PairSet enumerate_pairs(const std::vector<int>& identities, std::size_t cap = 0,
                        std::uint64_t seed = 0);

/// Distances: lower means more similar.
struct ScoreSet {
    std::vector<double> genuine, impostor;
};

struct RocPoint {
    double threshold = 0;
    double far = 0;  ///< fraction of impostor scores <= threshold
    double frr = 0;  ///< fraction of genuine scores > threshold
};

/// One point per distinct score, thresholds ascending.
std::vector<RocPoint> roc(const ScoreSet& scores);

/// Crossing of FAR and FRR, linearly interpolated between the bracketing
/// thresholds. A virtual threshold below every score (FAR 0, FRR 1) opens
/// the curve.
double eer(const ScoreSet& scores);

/// FRR at the requested FAR, interpolated linearly between the last point
/// with FAR <= far and the next one.
double frr_at_far(const ScoreSet& scores, double far);

struct Separation {
    double genuine_mean = 0, impostor_mean = 0;
    double standard_error = 0;  ///< sqrt(var_g / n_g + var_i / n_i)
    double gap_in_se = 0;       ///< (impostor_mean - genuine_mean) / standard_error
};

Separation separation(const ScoreSet& scores);

struct ScoredPair {
    std::string id;
    bool genuine = false;
    double score = 0;
};

struct EvalSummary {
    double eer = 0;
    double far = 0.001;
    double frr_at_far = 0;
    std::size_t genuine_pairs = 0, impostor_pairs = 0;
    Separation separation;
};

EvalSummary summarize(const ScoreSet& scores, double far);

/// Shortest round-trip decimal form.
std::string format_number(double v);

/// `pair_id,label,score`
void write_scores_csv(const std::string& path, const std::vector<ScoredPair>& pairs);
/// `threshold,far,frr`
void write_roc_csv(const std::string& path, const std::vector<RocPoint>& curve);
/// JSON object with eer and frr_at_far_<far> keys plus pair counts.
std::string summary_json(const EvalSummary& summary);
void write_summary(const std::string& path, const EvalSummary& summary);

}  // namespace ciris
