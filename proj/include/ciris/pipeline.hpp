#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ciris/eval.hpp"
#include "ciris/loss.hpp"
#include "ciris/model.hpp"
#include "ciris/optim.hpp"
#include "ciris/preprocess.hpp"
#include "ciris/synthdata.hpp"

namespace ciris {

/// Raised when training or checking produces non-finite or failing numbers.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Normalized strips with identity labels, in manifest order.
struct StripSet {
    std::vector<NormalizedIris> strips;
    std::vector<int> labels;
    std::vector<std::string> stems;  ///< file name of the strip without ".norm.pgm"

    std::size_t size() const { return strips.size(); }
};

/// Loads the entries of one split ("" keeps every entry).
StripSet load_strips(const Manifest& manifest, const std::string& split = "");

/// (N, H, W, 1) real batch of the selected strips.
template <typename T>
ComplexTensor<T> strip_batch(const StripSet& set, const std::vector<std::size_t>& indices);

struct TrainConfig {
    int epochs = 30;
    std::size_t batch_ids = 4;      ///< identities per batch
    std::size_t batch_samples = 4;  ///< samples per identity per batch
    std::size_t triplets = 16;      ///< mined per batch
    double alpha = 0.2;
    int max_shift = 4;
    MiningStrategy mining = MiningStrategy::semi_hard;
    LrSchedule schedule = LrSchedule::desk();
    double momentum = 0.9;
    double clip_norm = 1.0;
    std::uint64_t seed = 7;

    void validate() const;
};

struct EpochStats {
    int epoch = 0;
    double mean_loss = 0;  ///< mean triplet loss over the epoch's batches
    double learning_rate = 0;
    std::size_t batches = 0;
    double max_grad_norm = 0;
};

/// Splits sample indices into identity-grouped batches so each sample is
/// seen once per epoch. Every batch holds at least two identities and one
/// identity with two samples.
std::vector<std::vector<std::size_t>> plan_batches(const std::vector<int>& labels,
                                                   const TrainConfig& config, int epoch);

template <typename T>
class Trainer {
public:
    Trainer(Model<T>& model, TrainConfig config);

    /// One pass over the training strips (0-based epoch).
    EpochStats run_epoch(const StripSet& train, int epoch);
    /// Runs every epoch, calling `on_epoch` after each.
    std::vector<EpochStats> fit(const StripSet& train,
                                const std::function<void(const EpochStats&)>& on_epoch = {});

    const TrainConfig& config() const { return config_; }

private:
    Model<T>& model_;
    TrainConfig config_;
    OptimState<T> optim_;
};

/// Eval-mode features, each with its strip mask reduced to the feature grid.
template <typename T>
std::vector<FeatureMap<T>> encode_features(Model<T>& model, const StripSet& set,
                                           std::size_t chunk = 8);

/// Shift distances over all genuine and impostor pairs.
template <typename T>
ScoreSet score_features(const std::vector<FeatureMap<T>>& features, const std::vector<int>& labels,
                        int max_shift, const PairSet* pairs = nullptr);

/// "CFEA" feature file: version, precision, (h, w, c), planes, mask.
template <typename T>
void write_features(const std::string& path, const FeatureMap<T>& f);
FeatureMap<double> read_features(const std::string& path);

/// `epoch,mean_etl` lines.
void write_loss_csv(const std::string& path, const std::vector<EpochStats>& log);

}  // namespace ciris
