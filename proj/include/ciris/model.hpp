#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "ciris/autograd.hpp"
#include "ciris/layers.hpp"

namespace ciris {

struct DenseBlockConfig {
    int layers = 3;
    int growth = 8;
};

/// Architecture hyperparameters. Channel counts are complex channels.
struct ModelConfig {
    std::size_t input_h = 64, input_w = 256;
    int gabor_kh = 7, gabor_kw = 7, gabor_m = 16;
    bool gabor_trainable = true;
    std::vector<DenseBlockConfig> dense_blocks;
    std::vector<int> transitions;  ///< output channels, one per dense block
    int bottleneck = 4;            ///< 1x1 width = bottleneck * growth
    bool real_valued = false;      ///< pure real network: no Gabor lift, single plane
    double pool_jitter = 0.0;      ///< train-mode probability of a +-1 pool size jitter
    std::string backbone = "dense";

    /// 16 Gabor kernels, 2 blocks of 3 layers (growth 8), transitions to 12 and 8.
    static ModelConfig tiny();
    /// 64 Gabor kernels, 3 blocks of 6 layers (growth 12), transitions to 68, 70, 20.
    static ModelConfig paper();
    static ModelConfig preset(const std::string& name);

    void validate() const;
    /// (h, w, c) of the feature map produced for one input.
    Shape output_shape() const;

    /// Flat key=value lines; round-trips through from_text.
    std::string to_text() const;
    static ModelConfig from_text(const std::string& text);
};

template <typename T>
struct BNLayer {
    Parameter<T> gamma;  ///< (C, 2)
    Parameter<T> beta;   ///< (C)
    BNRunning<T> running;

    static BNLayer make(const std::string& name, std::size_t channels);
    Var<T> apply(Tape<T>& tape, const Var<T>& x, BNMode mode, bool zrelu = false);
};

/// BN - zReLU - 1x1 conv - BN - zReLU - 3x3 conv; output has `growth` channels.
template <typename T>
struct CompositeLayer {
    BNLayer<T> bn1;
    Parameter<T> conv1;
    BNLayer<T> bn2;
    Parameter<T> conv2;

    Var<T> forward(Tape<T>& tape, const Var<T>& x, BNMode mode);
};

/// BN - 1x1 conv - zReLU, followed by spectral pooling to (out_h, out_w).
template <typename T>
struct TransitionLayer {
    BNLayer<T> bn;
    Parameter<T> conv;

    /// Result before pooling (tapped for inspection) and after.
    Var<T> forward(Tape<T>& tape, const Var<T>& x, BNMode mode, std::size_t out_h,
                   std::size_t out_w, Var<T>* pre_pool = nullptr);
};

/// Random complex weights, Re and Im uniform in (-a, a) with
/// a = sqrt(3 / (2 fan_in)); real weights use a = sqrt(3 / fan_in).
template <typename T>
ComplexTensor<T> init_kernel(Shape shape, bool real, std::mt19937_64& rng);

template <typename T>
CompositeLayer<T> make_composite(const std::string& name, std::size_t in_channels, int growth,
                                 int bottleneck, bool real, std::mt19937_64& rng);
template <typename T>
TransitionLayer<T> make_transition(const std::string& name, std::size_t in_channels,
                                   std::size_t out_channels, bool real, std::mt19937_64& rng);

/// Intermediate values recorded by a forward pass, keyed by layer name.
template <typename T>
using Taps = std::map<std::string, ComplexTensor<T>>;

/// Per-call state shared with the backbone.
template <typename T>
struct ForwardContext {
    Tape<T>& tape;
    BNMode mode;
    Taps<T>* taps = nullptr;
    std::mt19937_64* jitter_rng = nullptr;
};

/// Stack between the Gabor block and the output. Only the dense backbone
/// ships; others plug in through make_backbone.
template <typename T>
class Backbone {
public:
    virtual ~Backbone() = default;
    virtual Var<T> forward(const Var<T>& x, ForwardContext<T>& ctx) = 0;
    virtual void parameters(std::vector<Parameter<T>*>& out) = 0;
    virtual void batchnorms(std::vector<std::pair<std::string, BNRunning<T>*>>& out) = 0;
};

template <typename T>
std::unique_ptr<Backbone<T>> make_backbone(const ModelConfig& config, std::mt19937_64& rng);

/// Named tensor stored in a checkpoint.
template <typename T>
struct TensorRecord {
    std::string name;
    ComplexTensor<T> value;
};

struct CheckpointHeader {
    static constexpr char magic[4] = {'C', 'I', 'R', 'N'};
    static constexpr std::uint32_t version = 1;
};

template <typename T>
class Model {
public:
    static Model build(const ModelConfig& config, std::uint64_t seed);

    const ModelConfig& config() const { return config_; }

    /// Batch is (N, H, W, 1) or (H, W, 1); real inputs are lifted with zero
    /// imaginary part. Returns (N, h, w, c) features.
    Var<T> forward(Tape<T>& tape, const ComplexTensor<T>& batch, BNMode mode,
                   Taps<T>* taps = nullptr);
    /// Eval-mode features without recording gradients.
    ComplexTensor<T> infer(const ComplexTensor<T>& batch);

    std::vector<Parameter<T>*> parameters();
    Parameter<T>& gabor() { return gabor_; }
    /// Number of real scalars over all parameters (complex weights count twice).
    std::size_t parameter_count();

    /// Parameters followed by running statistics, in a fixed order.
    std::vector<TensorRecord<T>> records();
    void assign(const std::vector<TensorRecord<T>>& records);

    void save(const std::string& path);
    static Model load(const std::string& path);

private:
    ModelConfig config_;
    Parameter<T> gabor_;
    std::unique_ptr<Backbone<T>> backbone_;
    std::mt19937_64 jitter_rng_;
};

/// Raw checkpoint access: config text plus records at their stored precision
/// (converted to T).
template <typename T>
struct Checkpoint {
    std::string config_text;
    std::vector<TensorRecord<T>> records;
};

template <typename T>
void write_checkpoint(const std::string& path, const std::string& config_text,
                      const std::vector<TensorRecord<T>>& records);
template <typename T>
Checkpoint<T> read_checkpoint(const std::string& path);

/// Size in bytes of a checkpoint with the given content.
template <typename T>
std::size_t checkpoint_size(const std::string& config_text,
                            const std::vector<TensorRecord<T>>& records);

}  // namespace ciris
