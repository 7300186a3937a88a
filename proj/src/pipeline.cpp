#include "ciris/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>

#include "ciris/ops.hpp"

namespace ciris {

namespace fs = std::filesystem;

StripSet load_strips(const Manifest& manifest, const std::string& split) {
    StripSet s;
    for (const auto& e : manifest) {
        if (!split.empty() && e.split != split) continue;
        s.strips.push_back(read_normalized(e.strip_path, e.mask_path));
        s.labels.push_back(e.identity);
        std::string stem = fs::path(e.strip_path).filename().string();
        if (const auto p = stem.find(".norm.pgm"); p != std::string::npos) stem.resize(p);
        s.stems.push_back(std::move(stem));
    }
    return s;
}

template <typename T>
ComplexTensor<T> strip_batch(const StripSet& set, const std::vector<std::size_t>& indices) {
    if (indices.empty()) throw std::invalid_argument("strip batch: no samples");
    const std::size_t h = set.strips.at(indices[0]).strip.rows, w = set.strips[indices[0]].strip.cols;
    ComplexTensor<T> out(Shape{indices.size(), h, w, 1});
    for (std::size_t k = 0; k < indices.size(); ++k) {
        const auto& g = set.strips.at(indices[k]).strip;
        if (g.rows != h || g.cols != w) throw std::invalid_argument("strip batch: strips differ in size");
        std::transform(g.values.begin(), g.values.end(), out.re().begin() + std::ptrdiff_t(k * h * w),
                       [](double v) { return T(v); });
    }
    return out;
}

void TrainConfig::validate() const {
    auto fail = [](const std::string& m) { throw std::invalid_argument("train config: " + m); };
    if (epochs < 1) fail("epochs must be at least 1");
    if (batch_ids < 2) fail("a batch needs at least 2 identities");
    if (batch_samples < 2) fail("a batch needs at least 2 samples per identity");
    if (triplets < 1) fail("triplets per batch must be at least 1");
    if (!(alpha > 0)) fail("alpha must be positive");
    if (max_shift < 0) fail("max_shift must be non-negative");
    if (!(momentum >= 0 && momentum < 1)) fail("momentum must lie in [0, 1)");
    if (!(clip_norm > 0)) fail("clip norm must be positive");
}

std::vector<std::vector<std::size_t>> plan_batches(const std::vector<int>& labels,
                                                   const TrainConfig& config, int epoch) {
    std::seed_seq seq{std::uint32_t(config.seed), std::uint32_t(config.seed >> 32),
                      std::uint32_t(epoch), 0x6261u};
    std::mt19937_64 rng(seq);
    std::map<int, std::vector<std::size_t>> queues;
    for (std::size_t i = 0; i < labels.size(); ++i) queues[labels[i]].push_back(i);
    for (auto& [id, q] : queues) std::shuffle(q.begin(), q.end(), rng);

    std::vector<std::vector<std::size_t>> batches;
    for (;;) {
        std::vector<int> active;
        for (const auto& [id, q] : queues)
            if (!q.empty()) active.push_back(id);
        if (active.empty()) break;
        std::shuffle(active.begin(), active.end(), rng);
        if (active.size() > config.batch_ids) active.resize(config.batch_ids);
        std::vector<std::size_t> batch;
        for (int id : active) {
            auto& q = queues[id];
            std::size_t take = std::min(config.batch_samples, q.size());
            if (q.size() - take == 1) ++take;  // never strand a single sample
            batch.insert(batch.end(), q.end() - std::ptrdiff_t(take), q.end());
            q.resize(q.size() - take);
        }
        batches.push_back(std::move(batch));
    }

    auto usable = [&](const std::vector<std::size_t>& b) {
        std::map<int, int> count;
        for (auto i : b) ++count[labels[i]];
        bool pair = false;
        for (const auto& [id, n] : count) pair = pair || n >= 2;
        return count.size() >= 2 && pair;
    };
    std::vector<std::vector<std::size_t>> merged;
    for (auto& b : batches) {
        if (!usable(b) && !merged.empty())
            merged.back().insert(merged.back().end(), b.begin(), b.end());
        else
            merged.push_back(std::move(b));
    }
    if (merged.size() > 1 && !usable(merged.front())) {
        merged[1].insert(merged[1].end(), merged[0].begin(), merged[0].end());
        merged.erase(merged.begin());
    }
    if (merged.empty() || !usable(merged.front()))
        throw std::invalid_argument("training set needs at least 2 identities and one with 2 samples");
    return merged;
}

template <typename T>
Trainer<T>::Trainer(Model<T>& model, TrainConfig config) : model_(model), config_(std::move(config)) {
    config_.validate();
    optim_.momentum = config_.momentum;
    optim_.clip_norm = config_.clip_norm;
    optim_.schedule = config_.schedule;
}

template <typename T>
EpochStats Trainer<T>::run_epoch(const StripSet& train, int epoch) {
    const auto batches = plan_batches(train.labels, config_, epoch);
    const Shape fs = model_.config().output_shape();
    const auto params = model_.parameters();
    EpochStats st;
    st.epoch = epoch;
    st.learning_rate = config_.schedule.rate(epoch);
    double total = 0;
    for (std::size_t b = 0; b < batches.size(); ++b) {
        const auto& idx = batches[b];
        Tape<T> tape;
        auto feats = model_.forward(tape, strip_batch<T>(train, idx), BNMode::train);
        std::vector<Var<T>> per;
        std::vector<BinaryGrid> masks;
        std::vector<FeatureMap<T>> values;
        std::vector<int> labels;
        for (std::size_t k = 0; k < idx.size(); ++k) {
            per.push_back(ops::select(feats, k));
            masks.push_back(train.strips[idx[k]].mask.downsampled(fs[0], fs[1]));
            values.push_back({per.back().value(), masks.back()});
            labels.push_back(train.labels[idx[k]]);
        }
        const std::uint64_t mine_seed = config_.seed * 1000003ULL + std::uint64_t(epoch) * 4099ULL + b;
        const auto triplets = mine_triplets(values, labels, config_.mining, config_.triplets, mine_seed,
                                            config_.alpha, config_.max_shift);
        auto loss = ops::extended_triplet_loss(per, masks, triplets, T(config_.alpha), config_.max_shift);
        const double lv = loss.value().re()[0];
        if (!std::isfinite(lv))
            throw NumericalError("non-finite triplet loss at epoch " + std::to_string(epoch) +
                                 ", batch " + std::to_string(b));
        for (auto* p : params) p->zero_grad();
        tape.backward(loss);
        try {
            const auto rep = sgd_step<T>(params, optim_, epoch);
            st.max_grad_norm = std::max(st.max_grad_norm, rep.grad_norm);
        } catch (const std::domain_error& e) {
            throw NumericalError(e.what());
        }
        total += lv;
    }
    st.batches = batches.size();
    st.mean_loss = total / double(batches.size());
    return st;
}

template <typename T>
std::vector<EpochStats> Trainer<T>::fit(const StripSet& train,
                                        const std::function<void(const EpochStats&)>& on_epoch) {
    std::vector<EpochStats> log;
    for (int e = 0; e < config_.epochs; ++e) {
        log.push_back(run_epoch(train, e));
        if (on_epoch) on_epoch(log.back());
    }
    return log;
}

template <typename T>
std::vector<FeatureMap<T>> encode_features(Model<T>& model, const StripSet& set, std::size_t chunk) {
    const Shape fs = model.config().output_shape();
    std::vector<FeatureMap<T>> out;
    out.reserve(set.size());
    for (std::size_t s = 0; s < set.size(); s += chunk) {
        std::vector<std::size_t> idx;
        for (std::size_t k = s; k < std::min(set.size(), s + chunk); ++k) idx.push_back(k);
        const ComplexTensor<T> f = model.infer(strip_batch<T>(set, idx));
        const std::size_t n = fs.numel();
        for (std::size_t k = 0; k < idx.size(); ++k) {
            ComplexTensor<T> v(fs, std::vector<T>(f.re().begin() + std::ptrdiff_t(k * n),
                                                  f.re().begin() + std::ptrdiff_t((k + 1) * n)),
                               std::vector<T>(f.im().begin() + std::ptrdiff_t(k * n),
                                              f.im().begin() + std::ptrdiff_t((k + 1) * n)));
            out.push_back({std::move(v), set.strips[idx[k]].mask.downsampled(fs[0], fs[1])});
        }
    }
    return out;
}

template <typename T>
ScoreSet score_features(const std::vector<FeatureMap<T>>& features, const std::vector<int>& labels,
                        int max_shift, const PairSet* pairs) {
    if (features.size() != labels.size()) throw std::invalid_argument("score: label count mismatch");
    PairSet local;
    if (!pairs) {
        local = enumerate_pairs(labels);
        pairs = &local;
    }
    ScoreSet s;
    for (const auto& p : pairs->genuine)
        s.genuine.push_back(shift_distance(features[p.a], features[p.b], max_shift).distance);
    for (const auto& p : pairs->impostor)
        s.impostor.push_back(shift_distance(features[p.a], features[p.b], max_shift).distance);
    return s;
}

namespace {

void put(std::ostream& out, const void* p, std::size_t n) {
    out.write(static_cast<const char*>(p), std::streamsize(n));
}

template <typename U>
void put_le(std::ostream& out, U v) {
    unsigned char b[sizeof(U)];
    for (std::size_t i = 0; i < sizeof(U); ++i) b[i] = std::uint8_t(std::uint64_t(v) >> (8 * i));
    put(out, b, sizeof(U));
}

std::uint32_t get_u32(std::istream& in, const std::string& path) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) throw std::runtime_error("features '" + path + "': truncated file");
    return std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 | std::uint32_t(b[2]) << 16 |
           std::uint32_t(b[3]) << 24;
}

template <typename F>
void put_plane(std::ostream& out, std::span<const F> v) {
    for (F x : v) {
        unsigned char b[sizeof(F)];
        std::memcpy(b, &x, sizeof(F));  // little-endian host
        put(out, b, sizeof(F));
    }
}

}  // namespace

template <typename T>
void write_features(const std::string& path, const FeatureMap<T>& f) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    put(out, "CFEA", 4);
    put_le<std::uint32_t>(out, 1);
    put_le<std::uint8_t>(out, std::uint8_t(sizeof(T)));
    put_le<std::uint32_t>(out, std::uint32_t(f.height()));
    put_le<std::uint32_t>(out, std::uint32_t(f.width()));
    put_le<std::uint32_t>(out, std::uint32_t(f.channels()));
    put_plane<T>(out, f.values.re());
    put_plane<T>(out, f.values.im());
    put(out, f.mask.cells().data(), f.mask.size());
    if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

FeatureMap<double> read_features(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open features '" + path + "'");
    char magic[4];
    if (!in.read(magic, 4) || std::string(magic, 4) != "CFEA")
        throw std::runtime_error("features '" + path + "': bad magic");
    if (const auto v = get_u32(in, path); v != 1)
        throw std::runtime_error("features '" + path + "': unsupported version " + std::to_string(v));
    const int prec = in.get();
    if (prec != 4 && prec != 8) throw std::runtime_error("features '" + path + "': bad precision");
    const std::size_t h = get_u32(in, path), w = get_u32(in, path), c = get_u32(in, path);
    if (h * w * c > (std::size_t(1) << 30)) throw std::runtime_error("features '" + path + "': dimension overflow");
    ComplexTensor<double> v(Shape{h, w, c});
    auto read_plane = [&](std::span<double> dst) {
        std::vector<char> buf(dst.size() * std::size_t(prec));
        if (!in.read(buf.data(), std::streamsize(buf.size())))
            throw std::runtime_error("features '" + path + "': truncated file");
        for (std::size_t i = 0; i < dst.size(); ++i) {
            if (prec == 4) {
                float x;
                std::memcpy(&x, buf.data() + 4 * i, 4);
                dst[i] = x;
            } else {
                std::memcpy(&dst[i], buf.data() + 8 * i, 8);
            }
        }
    };
    read_plane(v.re());
    read_plane(v.im());
    std::vector<char> m(h * w);
    if (!in.read(m.data(), std::streamsize(m.size())))
        throw std::runtime_error("features '" + path + "': truncated file");
    if (in.peek() != EOF) throw std::runtime_error("features '" + path + "': trailing bytes");
    BinaryGrid mask(h, w, 0);
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) mask.set(y, x, m[y * w + x] != 0);
    return {std::move(v), std::move(mask)};
}

void write_loss_csv(const std::string& path, const std::vector<EpochStats>& log) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << "epoch,mean_etl\n";
    for (const auto& e : log) out << e.epoch << ',' << format_number(e.mean_loss) << '\n';
    if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

#define CIRIS_INSTANTIATE_PIPELINE(T)                                                             \
    template ComplexTensor<T> strip_batch<T>(const StripSet&, const std::vector<std::size_t>&);   \
    template class Trainer<T>;                                                                    \
    template std::vector<FeatureMap<T>> encode_features(Model<T>&, const StripSet&, std::size_t); \
    template ScoreSet score_features(const std::vector<FeatureMap<T>>&, const std::vector<int>&,  \
                                     int, const PairSet*);                                        \
    template void write_features(const std::string&, const FeatureMap<T>&);

CIRIS_INSTANTIATE_PIPELINE(float)
CIRIS_INSTANTIATE_PIPELINE(double)

}  // namespace ciris
