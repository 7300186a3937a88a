#include "ciris/model.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <stdexcept>

#include "ciris/ops.hpp"

namespace ciris {

// ---------------------------------------------------------------------------
// Configuration

ModelConfig ModelConfig::tiny() {
    ModelConfig c;
    c.gabor_m = 16;
    c.dense_blocks = {{3, 8}, {3, 8}};
    c.transitions = {12, 8};
    return c;
}

ModelConfig ModelConfig::paper() {
    ModelConfig c;
    c.gabor_m = 64;
    c.dense_blocks = {{6, 12}, {6, 12}, {6, 12}};
    c.transitions = {68, 70, 20};
    return c;
}

ModelConfig ModelConfig::preset(const std::string& name) {
    if (name == "tiny") return tiny();
    if (name == "paper") return paper();
    throw std::invalid_argument("unknown model preset '" + name + "' (expected tiny or paper)");
}

void ModelConfig::validate() const {
    auto fail = [](const std::string& m) { throw std::invalid_argument("model config: " + m); };
    if (dense_blocks.empty()) fail("at least one dense block is required");
    if (transitions.size() != dense_blocks.size())
        fail("need one transition per dense block (" + std::to_string(dense_blocks.size()) +
             " blocks, " + std::to_string(transitions.size()) + " transitions)");
    if (gabor_kh <= 0 || gabor_kw <= 0 || gabor_kh % 2 == 0 || gabor_kw % 2 == 0)
        fail("Gabor kernel extents must be odd and positive");
    if (gabor_m <= 0) fail("Gabor kernel count must be positive");
    (void)GaborGrid::for_count(gabor_m);
    for (const auto& b : dense_blocks)
        if (b.layers <= 0 || b.growth <= 0) fail("dense blocks need positive layers and growth");
    for (int t : transitions)
        if (t <= 0) fail("transition channel counts must be positive");
    if (bottleneck <= 0) fail("bottleneck factor must be positive");
    const std::size_t f = std::size_t(1) << transitions.size();
    if (input_h == 0 || input_w == 0 || input_h % f || input_w % f)
        fail("input " + std::to_string(input_h) + "x" + std::to_string(input_w) +
             " is not divisible by " + std::to_string(f));
    if (!(pool_jitter >= 0 && pool_jitter <= 1)) fail("pool_jitter must lie in [0, 1]");
    if (backbone != "dense") fail("unknown backbone '" + backbone + "'");
}

Shape ModelConfig::output_shape() const {
    const std::size_t f = std::size_t(1) << transitions.size();
    return Shape{input_h / f, input_w / f, std::size_t(transitions.back())};
}

std::string ModelConfig::to_text() const {
    std::ostringstream os;
    os << "input_h=" << input_h << '\n' << "input_w=" << input_w << '\n';
    os << "gabor=" << gabor_kh << 'x' << gabor_kw << 'x' << gabor_m << '\n';
    os << "gabor_trainable=" << (gabor_trainable ? 1 : 0) << '\n';
    os << "dense=";
    for (std::size_t i = 0; i < dense_blocks.size(); ++i)
        os << (i ? "," : "") << dense_blocks[i].layers << ':' << dense_blocks[i].growth;
    os << '\n' << "transitions=";
    for (std::size_t i = 0; i < transitions.size(); ++i) os << (i ? "," : "") << transitions[i];
    os << '\n' << "bottleneck=" << bottleneck << '\n';
    os << "real_valued=" << (real_valued ? 1 : 0) << '\n';
    os.precision(17);
    os << "pool_jitter=" << pool_jitter << '\n';
    os << "backbone=" << backbone << '\n';
    return os.str();
}

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(item);
    return out;
}

}  // namespace

ModelConfig ModelConfig::from_text(const std::string& text) {
    ModelConfig c;
    c.dense_blocks.clear();
    c.transitions.clear();
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("model config: bad line '" + line + "'");
        const std::string key = line.substr(0, eq), val = line.substr(eq + 1);
        try {
            if (key == "input_h") {
                c.input_h = std::stoul(val);
            } else if (key == "input_w") {
                c.input_w = std::stoul(val);
            } else if (key == "gabor") {
                const auto p = split(val, 'x');
                if (p.size() != 3) throw std::invalid_argument(val);
                c.gabor_kh = std::stoi(p[0]);
                c.gabor_kw = std::stoi(p[1]);
                c.gabor_m = std::stoi(p[2]);
            } else if (key == "gabor_trainable") {
                c.gabor_trainable = std::stoi(val) != 0;
            } else if (key == "dense") {
                for (const auto& b : split(val, ',')) {
                    const auto p = split(b, ':');
                    if (p.size() != 2) throw std::invalid_argument(b);
                    c.dense_blocks.push_back({std::stoi(p[0]), std::stoi(p[1])});
                }
            } else if (key == "transitions") {
                for (const auto& t : split(val, ',')) c.transitions.push_back(std::stoi(t));
            } else if (key == "bottleneck") {
                c.bottleneck = std::stoi(val);
            } else if (key == "real_valued") {
                c.real_valued = std::stoi(val) != 0;
            } else if (key == "pool_jitter") {
                c.pool_jitter = std::stod(val);
            } else if (key == "backbone") {
                c.backbone = val;
            } else {
                throw std::invalid_argument("model config: unknown key '" + key + "'");
            }
        } catch (const std::logic_error& e) {
            if (std::string(e.what()).rfind("model config", 0) == 0) throw;
            throw std::invalid_argument("model config: bad value for '" + key + "': " + val);
        }
    }
    c.validate();
    return c;
}

// ---------------------------------------------------------------------------
// Layers

template <typename T>
ComplexTensor<T> init_kernel(Shape shape, bool real, std::mt19937_64& rng) {
    const double fan_in = double(shape[0] * shape[1] * shape[2]);
    const double a = real ? std::sqrt(3.0 / fan_in) : std::sqrt(3.0 / (2.0 * fan_in));
    std::uniform_real_distribution<double> u(-a, a);
    ComplexTensor<T> k(std::move(shape));
    for (std::size_t i = 0; i < k.size(); ++i) {
        k.re()[i] = T(u(rng));
        if (!real) k.im()[i] = T(u(rng));
    }
    return k;
}

template <typename T>
BNLayer<T> BNLayer<T>::make(const std::string& name, std::size_t channels) {
    // gamma = I / sqrt(2): unit complex variance split evenly over Re and Im.
    auto st = BNState<T>::identity(channels, 1.0 / std::sqrt(2.0));
    BNLayer l;
    l.gamma = {name + ".gamma", st.gamma, {}, true};
    l.beta = {name + ".beta", st.beta, {}, true};
    l.running = st.running;
    return l;
}

template <typename T>
Var<T> BNLayer<T>::apply(Tape<T>& tape, const Var<T>& x, BNMode mode, bool zrelu) {
    auto y = ops::batchnorm(x, tape.parameter(gamma), tape.parameter(beta), running, mode, zrelu);
    return gamma.real_only ? ops::real_part(y) : y;
}

template <typename T>
Var<T> CompositeLayer<T>::forward(Tape<T>& tape, const Var<T>& x, BNMode mode) {
    auto h = bn1.apply(tape, x, mode, true);
    h = ops::conv2d(h, tape.parameter(conv1), ConvGeometry{});
    h = bn2.apply(tape, h, mode, true);
    return ops::conv2d(h, tape.parameter(conv2), ConvGeometry{1, 1, 1, 1});
}

template <typename T>
Var<T> TransitionLayer<T>::forward(Tape<T>& tape, const Var<T>& x, BNMode mode,
                                   std::size_t out_h, std::size_t out_w, Var<T>* pre_pool) {
    auto h = bn.apply(tape, x, mode);
    h = ops::zrelu(ops::conv2d(h, tape.parameter(conv), ConvGeometry{}));
    if (pre_pool) *pre_pool = h;
    h = ops::spectral_pool(h, out_h, out_w);
    return conv.real_only ? ops::real_part(h) : h;
}

namespace {

template <typename T>
void mark_real(std::initializer_list<Parameter<T>*> ps, bool real) {
    for (auto* p : ps) p->real_only = real;
}

}  // namespace

template <typename T>
CompositeLayer<T> make_composite(const std::string& name, std::size_t in_channels, int growth,
                                 int bottleneck, bool real, std::mt19937_64& rng) {
    const std::size_t mid = std::size_t(bottleneck) * std::size_t(growth);
    CompositeLayer<T> l;
    l.bn1 = BNLayer<T>::make(name + ".bn1", in_channels);
    l.conv1 = {name + ".conv1.kernel", init_kernel<T>(Shape{1, 1, in_channels, mid}, real, rng), {}, true};
    l.bn2 = BNLayer<T>::make(name + ".bn2", mid);
    l.conv2 = {name + ".conv2.kernel",
               init_kernel<T>(Shape{3, 3, mid, std::size_t(growth)}, real, rng), {}, true};
    mark_real<T>({&l.bn1.gamma, &l.bn1.beta, &l.conv1, &l.bn2.gamma, &l.bn2.beta, &l.conv2}, real);
    return l;
}

template <typename T>
TransitionLayer<T> make_transition(const std::string& name, std::size_t in_channels,
                                   std::size_t out_channels, bool real, std::mt19937_64& rng) {
    TransitionLayer<T> l;
    l.bn = BNLayer<T>::make(name + ".bn", in_channels);
    l.conv = {name + ".conv.kernel", init_kernel<T>(Shape{1, 1, in_channels, out_channels}, real, rng),
              {}, true};
    mark_real<T>({&l.bn.gamma, &l.bn.beta, &l.conv}, real);
    return l;
}

// ---------------------------------------------------------------------------
// Dense backbone

namespace {

template <typename T>
class DenseBackbone final : public Backbone<T> {
public:
    DenseBackbone(const ModelConfig& config, std::mt19937_64& rng) : config_(config) {
        std::size_t channels = std::size_t(config.gabor_m);
        for (std::size_t b = 0; b < config.dense_blocks.size(); ++b) {
            const auto& bc = config.dense_blocks[b];
            Block block;
            for (int l = 0; l < bc.layers; ++l) {
                block.layers.push_back(make_composite<T>(
                    "dense" + std::to_string(b) + ".layer" + std::to_string(l), channels, bc.growth,
                    config.bottleneck, config.real_valued, rng));
                channels += std::size_t(bc.growth);
            }
            block.transition = make_transition<T>("transition" + std::to_string(b), channels,
                                                  std::size_t(config.transitions[b]),
                                                  config.real_valued, rng);
            channels = std::size_t(config.transitions[b]);
            blocks_.push_back(std::move(block));
        }
    }

    Var<T> forward(const Var<T>& input, ForwardContext<T>& ctx) override {
        Var<T> x = input;
        std::size_t h = config_.input_h, w = config_.input_w;
        for (std::size_t b = 0; b < blocks_.size(); ++b) {
            auto& block = blocks_[b];
            for (auto& layer : block.layers)
                x = ops::concat_channels<T>({x, layer.forward(ctx.tape, x, ctx.mode)});
            const std::string tag = std::to_string(b);
            if (ctx.taps) (*ctx.taps)["dense" + tag] = x.value();
            h /= 2;
            w /= 2;
            std::size_t oh = h, ow = w;
            const bool last = b + 1 == blocks_.size();
            if (!last && ctx.mode == BNMode::train && config_.pool_jitter > 0 && ctx.jitter_rng) {
                std::uniform_real_distribution<double> u(0.0, 1.0);
                if (u(*ctx.jitter_rng) < config_.pool_jitter) {
                    const bool up = u(*ctx.jitter_rng) < 0.5;
                    oh = up ? h + 1 : h - 1;
                    ow = up ? w + 1 : w - 1;
                }
            }
            Var<T> pre;
            x = block.transition.forward(ctx.tape, x, ctx.mode, oh, ow, &pre);
            if (ctx.taps) {
                (*ctx.taps)["transition" + tag + ".pre_pool"] = pre.value();
                (*ctx.taps)["transition" + tag] = x.value();
            }
        }
        return x;
    }

    void parameters(std::vector<Parameter<T>*>& out) override {
        for (auto& block : blocks_) {
            for (auto& l : block.layers)
                for (auto* p : {&l.bn1.gamma, &l.bn1.beta, &l.conv1, &l.bn2.gamma, &l.bn2.beta, &l.conv2})
                    out.push_back(p);
            auto& t = block.transition;
            for (auto* p : {&t.bn.gamma, &t.bn.beta, &t.conv}) out.push_back(p);
        }
    }

    void batchnorms(std::vector<std::pair<std::string, BNRunning<T>*>>& out) override {
        auto stem = [](const Parameter<T>& gamma) {
            return gamma.name.substr(0, gamma.name.size() - std::string(".gamma").size());
        };
        for (auto& block : blocks_) {
            for (auto& l : block.layers) {
                out.emplace_back(stem(l.bn1.gamma), &l.bn1.running);
                out.emplace_back(stem(l.bn2.gamma), &l.bn2.running);
            }
            out.emplace_back(stem(block.transition.bn.gamma), &block.transition.bn.running);
        }
    }

private:
    struct Block {
        std::vector<CompositeLayer<T>> layers;
        TransitionLayer<T> transition;
    };
    ModelConfig config_;
    std::vector<Block> blocks_;
};

}  // namespace

template <typename T>
std::unique_ptr<Backbone<T>> make_backbone(const ModelConfig& config, std::mt19937_64& rng) {
    if (config.backbone == "dense") return std::make_unique<DenseBackbone<T>>(config, rng);
    throw std::invalid_argument("unknown backbone '" + config.backbone + "'");
}

// ---------------------------------------------------------------------------
// Model

template <typename T>
Model<T> Model<T>::build(const ModelConfig& config, std::uint64_t seed) {
    config.validate();
    Model m;
    m.config_ = config;
    std::mt19937_64 rng(seed);
    const Shape ks{std::size_t(config.gabor_kh), std::size_t(config.gabor_kw), 1,
                   std::size_t(config.gabor_m)};
    m.gabor_.name = "gabor.kernel";
    m.gabor_.value = config.real_valued ? init_kernel<T>(ks, true, rng)
                                        : gabor_bank<T>(config.gabor_kh, config.gabor_kw, config.gabor_m);
    m.gabor_.trainable = config.gabor_trainable;
    m.gabor_.real_only = config.real_valued;
    m.backbone_ = make_backbone<T>(config, rng);
    m.jitter_rng_.seed(seed ^ 0x9e3779b97f4a7c15ULL);
    return m;
}

template <typename T>
Var<T> Model<T>::forward(Tape<T>& tape, const ComplexTensor<T>& batch, BNMode mode, Taps<T>* taps) {
    const Shape& s = batch.shape();
    ComplexTensor<T> input = s.rank() == 3 ? batch.reshaped(Shape{1, s[0], s[1], s[2]}) : batch;
    const Shape& is = input.shape();
    if (is.rank() != 4 || is[1] != config_.input_h || is[2] != config_.input_w || is[3] != 1)
        throw std::invalid_argument("model expects input (N," + std::to_string(config_.input_h) +
                                    "," + std::to_string(config_.input_w) + ",1), got " +
                                    s.to_string());
    if (config_.real_valued) input = real_part(input);
    auto x = tape.constant(std::move(input));
    const ConvGeometry g{1, 1, std::size_t(config_.gabor_kh / 2), std::size_t(config_.gabor_kw / 2)};
    auto y = ops::conv2d(x, tape.parameter(gabor_), g);
    if (taps) (*taps)["gabor"] = y.value();
    ForwardContext<T> ctx{tape, mode, taps, &jitter_rng_};
    return backbone_->forward(y, ctx);
}

template <typename T>
ComplexTensor<T> Model<T>::infer(const ComplexTensor<T>& batch) {
    Tape<T> tape(false);
    return forward(tape, batch, BNMode::eval).value();
}

template <typename T>
std::vector<Parameter<T>*> Model<T>::parameters() {
    std::vector<Parameter<T>*> out{&gabor_};
    backbone_->parameters(out);
    return out;
}

template <typename T>
std::size_t Model<T>::parameter_count() {
    std::size_t n = 0;
    for (auto* p : parameters()) n += p->value.size() * (p->real_only ? 1 : 2);
    return n;
}

template <typename T>
std::vector<TensorRecord<T>> Model<T>::records() {
    std::vector<TensorRecord<T>> out;
    for (auto* p : parameters()) out.push_back({p->name, p->value});
    std::vector<std::pair<std::string, BNRunning<T>*>> bns;
    backbone_->batchnorms(bns);
    for (auto& [name, r] : bns) {
        out.push_back({name + ".running_mean", r->mean});
        out.push_back({name + ".running_cov", r->cov});
    }
    return out;
}

template <typename T>
void Model<T>::assign(const std::vector<TensorRecord<T>>& records) {
    std::map<std::string, ComplexTensor<T>*> slots;
    for (auto* p : parameters()) slots[p->name] = &p->value;
    std::vector<std::pair<std::string, BNRunning<T>*>> bns;
    backbone_->batchnorms(bns);
    for (auto& [name, r] : bns) {
        slots[name + ".running_mean"] = &r->mean;
        slots[name + ".running_cov"] = &r->cov;
    }
    std::map<std::string, bool> seen;
    for (const auto& rec : records) {
        auto it = slots.find(rec.name);
        if (it == slots.end()) throw std::invalid_argument("checkpoint: unexpected tensor '" + rec.name + "'");
        if (it->second->shape() != rec.value.shape())
            throw std::invalid_argument("checkpoint: tensor '" + rec.name + "' has shape " +
                                        rec.value.shape().to_string() + ", model expects " +
                                        it->second->shape().to_string());
        *it->second = rec.value;
        seen[rec.name] = true;
    }
    for (const auto& [name, slot] : slots)
        if (!seen.count(name)) throw std::invalid_argument("checkpoint: missing tensor '" + name + "'");
}

template <typename T>
void Model<T>::save(const std::string& path) {
    write_checkpoint(path, config_.to_text(), records());
}

template <typename T>
Model<T> Model<T>::load(const std::string& path) {
    auto ck = read_checkpoint<T>(path);
    auto m = build(ModelConfig::from_text(ck.config_text), 0);
    m.assign(ck.records);
    return m;
}

// ---------------------------------------------------------------------------
// Checkpoint files

namespace {

class Writer {
public:
    void bytes(const void* p, std::size_t n) {
        const char* c = static_cast<const char*>(p);
        buf_.insert(buf_.end(), c, c + n);
    }
    template <typename U>
    void le(U v) {
        unsigned char b[sizeof(U)];
        std::memcpy(b, &v, sizeof(U));
        if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(U));
        bytes(b, sizeof(U));
    }
    const std::vector<char>& data() const { return buf_; }

private:
    std::vector<char> buf_;
};

class Reader {
public:
    explicit Reader(std::vector<char> data) : data_(std::move(data)) {}
    std::size_t remaining() const { return data_.size() - pos_; }
    void bytes(void* p, std::size_t n) {
        if (n > remaining()) throw std::runtime_error("checkpoint: truncated file");
        std::memcpy(p, data_.data() + pos_, n);
        pos_ += n;
    }
    template <typename U>
    U le() {
        unsigned char b[sizeof(U)];
        bytes(b, sizeof(U));
        if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(U));
        U v;
        std::memcpy(&v, b, sizeof(U));
        return v;
    }

private:
    std::vector<char> data_;
    std::size_t pos_ = 0;
};

template <typename S, typename T>
void write_plane(Writer& w, std::span<const T> plane) {
    for (T v : plane) w.le<S>(S(v));
}

template <typename S, typename T>
void read_plane(Reader& r, std::span<T> plane) {
    for (auto& v : plane) v = T(r.le<S>());
}

}  // namespace

template <typename T>
void write_checkpoint(const std::string& path, const std::string& config_text,
                      const std::vector<TensorRecord<T>>& records) {
    static_assert(sizeof(T) == 4 || sizeof(T) == 8);
    using Bits = std::conditional_t<sizeof(T) == 4, float, double>;
    Writer w;
    w.bytes(CheckpointHeader::magic, 4);
    w.le<std::uint32_t>(CheckpointHeader::version);
    w.le<std::uint32_t>(std::uint32_t(config_text.size()));
    w.bytes(config_text.data(), config_text.size());
    w.le<std::uint32_t>(std::uint32_t(records.size()));
    for (const auto& rec : records) {
        w.le<std::uint32_t>(std::uint32_t(rec.name.size()));
        w.bytes(rec.name.data(), rec.name.size());
        w.le<std::uint8_t>(std::uint8_t(sizeof(T)));
        const auto& dims = rec.value.shape().dims();
        w.le<std::uint32_t>(std::uint32_t(dims.size()));
        for (auto d : dims) w.le<std::uint64_t>(d);
        write_plane<Bits, T>(w, rec.value.re());
        write_plane<Bits, T>(w, rec.value.im());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out.write(w.data().data(), std::streamsize(w.data().size()));
    if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

template <typename T>
Checkpoint<T> read_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint '" + path + "'");
    Reader r(std::vector<char>(std::istreambuf_iterator<char>(in), {}));
    char magic[4];
    r.bytes(magic, 4);
    if (std::memcmp(magic, CheckpointHeader::magic, 4) != 0)
        throw std::runtime_error("checkpoint: bad magic");
    const auto version = r.le<std::uint32_t>();
    if (version != CheckpointHeader::version)
        throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
    Checkpoint<T> ck;
    ck.config_text.resize(r.le<std::uint32_t>());
    r.bytes(ck.config_text.data(), ck.config_text.size());
    const auto count = r.le<std::uint32_t>();
    for (std::uint32_t k = 0; k < count; ++k) {
        TensorRecord<T> rec;
        rec.name.resize(r.le<std::uint32_t>());
        r.bytes(rec.name.data(), rec.name.size());
        const auto precision = r.le<std::uint8_t>();
        if (precision != 4 && precision != 8)
            throw std::runtime_error("checkpoint: record '" + rec.name + "' has precision " +
                                     std::to_string(precision));
        const auto ndim = r.le<std::uint32_t>();
        if (ndim > 8) throw std::runtime_error("checkpoint: dimension overflow in '" + rec.name + "'");
        std::vector<std::size_t> dims(ndim);
        std::uint64_t numel = 1;
        for (auto& d : dims) {
            const auto v = r.le<std::uint64_t>();
            if (v != 0 && numel > (std::uint64_t(1) << 40) / v)
                throw std::runtime_error("checkpoint: dimension overflow in '" + rec.name + "'");
            numel *= v;
            d = std::size_t(v);
        }
        if (numel * 2 * precision > r.remaining()) throw std::runtime_error("checkpoint: truncated file");
        rec.value = ComplexTensor<T>(Shape(dims));
        if (precision == 4) {
            read_plane<float, T>(r, rec.value.re());
            read_plane<float, T>(r, rec.value.im());
        } else {
            read_plane<double, T>(r, rec.value.re());
            read_plane<double, T>(r, rec.value.im());
        }
        ck.records.push_back(std::move(rec));
    }
    if (r.remaining() != 0) throw std::runtime_error("checkpoint: trailing bytes");
    return ck;
}

template <typename T>
std::size_t checkpoint_size(const std::string& config_text,
                            const std::vector<TensorRecord<T>>& records) {
    std::size_t n = 4 + 4 + 4 + config_text.size() + 4;
    for (const auto& rec : records)
        n += 4 + rec.name.size() + 1 + 4 + 8 * rec.value.shape().rank() + 2 * sizeof(T) * rec.value.size();
    return n;
}

#define CIRIS_INSTANTIATE_MODEL(T)                                                                 \
    template ComplexTensor<T> init_kernel(Shape, bool, std::mt19937_64&);                          \
    template struct BNLayer<T>;                                                                    \
    template struct CompositeLayer<T>;                                                             \
    template struct TransitionLayer<T>;                                                            \
    template CompositeLayer<T> make_composite(const std::string&, std::size_t, int, int, bool,     \
                                              std::mt19937_64&);                                   \
    template TransitionLayer<T> make_transition(const std::string&, std::size_t, std::size_t,      \
                                                bool, std::mt19937_64&);                           \
    template std::unique_ptr<Backbone<T>> make_backbone(const ModelConfig&, std::mt19937_64&);     \
    template class Model<T>;                                                                       \
    template void write_checkpoint(const std::string&, const std::string&,                         \
                                   const std::vector<TensorRecord<T>>&);                           \
    template Checkpoint<T> read_checkpoint(const std::string&);                                    \
    template std::size_t checkpoint_size(const std::string&, const std::vector<TensorRecord<T>>&);

CIRIS_INSTANTIATE_MODEL(float)
CIRIS_INSTANTIATE_MODEL(double)

}  // namespace ciris
