#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <set>

#include "ciris/pipeline.hpp"

using namespace ciris;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    auto dir = fs::temp_directory_path() / "ciris_test_pipeline";
    fs::create_directories(dir);
    return dir / name;
}

StripSet small_set(std::size_t ids, std::size_t samples) {
    SynthSpec spec;
    spec.identities = ids;
    spec.samples = samples;
    StripSet s;
    for (std::size_t id = 0; id < ids; ++id) {
        const auto base = base_texture(spec, id);
        for (std::size_t k = 0; k < samples; ++k) {
            s.strips.push_back(make_sample(spec, base, id, k).iris);
            s.labels.push_back(int(id));
            s.stems.push_back("id" + std::to_string(id) + "_" + std::to_string(k));
        }
    }
    return s;
}

}  // namespace

TEST_CASE("batches cover every sample once and stay usable") {
    TrainConfig cfg;
    std::vector<int> labels;
    for (int id = 0; id < 12; ++id)
        for (int k = 0; k < (id == 3 ? 5 : 10); ++k) labels.push_back(id);
    for (int epoch = 0; epoch < 3; ++epoch) {
        const auto batches = plan_batches(labels, cfg, epoch);
        std::multiset<std::size_t> seen;
        for (const auto& b : batches) {
            std::map<int, int> count;
            for (auto i : b) {
                seen.insert(i);
                ++count[labels[i]];
            }
            CHECK(count.size() >= 2);
            bool pair = false;
            for (const auto& [id, n] : count) pair = pair || n >= 2;
            CHECK(pair);
        }
        CHECK(seen.size() == labels.size());
        CHECK(std::set<std::size_t>(seen.begin(), seen.end()).size() == labels.size());
        CHECK(batches == plan_batches(labels, cfg, epoch));
    }
    CHECK(plan_batches(labels, cfg, 0) != plan_batches(labels, cfg, 1));
    CHECK_THROWS(plan_batches({0, 0, 0}, cfg, 0));
    CHECK_THROWS(plan_batches({0, 1, 2}, cfg, 0));
}

TEST_CASE("train config validation") {
    TrainConfig c;
    c.epochs = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = {};
    c.batch_ids = 1;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = {};
    c.momentum = 1;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("training is deterministic and freezing keeps the Gabor block") {
    const auto set = small_set(3, 3);
    TrainConfig cfg;
    cfg.epochs = 1;
    cfg.batch_ids = 3;
    cfg.batch_samples = 3;
    cfg.schedule = LrSchedule::parse("0:0.1");
    auto mc = ModelConfig::tiny();
    mc.gabor_trainable = false;
    auto a = Model<float>::build(mc, 7), b = Model<float>::build(mc, 7);
    const auto gabor0 = a.gabor().value;
    Trainer<float> ta(a, cfg), tb(b, cfg);
    const auto la = ta.fit(set), lb = tb.fit(set);
    REQUIRE(la.size() == 1);
    CHECK(la[0].mean_loss == lb[0].mean_loss);
    CHECK(la[0].batches == 1);
    CHECK(la[0].learning_rate == 0.1);
    const auto ra = a.records(), rb = b.records();
    bool moved = false;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        CHECK(ra[i].value.re().size() == rb[i].value.re().size());
        CHECK(std::equal(ra[i].value.re().begin(), ra[i].value.re().end(), rb[i].value.re().begin()));
    }
    CHECK(std::equal(gabor0.re().begin(), gabor0.re().end(), a.gabor().value.re().begin()));
    CHECK(std::equal(gabor0.im().begin(), gabor0.im().end(), a.gabor().value.im().begin()));
    auto fresh = Model<float>::build(mc, 7).records();
    for (std::size_t i = 0; i < ra.size(); ++i)
        moved = moved || !std::equal(ra[i].value.re().begin(), ra[i].value.re().end(), fresh[i].value.re().begin());
    CHECK(moved);
}

TEST_CASE("encoded features, scores and feature files") {
    const auto set = small_set(2, 2);
    auto m = Model<double>::build(ModelConfig::tiny(), 3);
    const auto f = encode_features(m, set, 3);
    REQUIRE(f.size() == 4);
    CHECK(f[0].values.shape() == Shape{16, 64, 8});
    CHECK(f[0].mask.rows() == 16);
    const auto direct = m.infer(strip_batch<double>(set, {2}));
    for (std::size_t i = 0; i < f[2].values.size(); ++i) CHECK(f[2].values.at(i) == direct.at(i));

    const auto scores = score_features(f, set.labels, 4);
    CHECK(scores.genuine.size() == 2);
    CHECK(scores.impostor.size() == 4);
    CHECK(scores.genuine[0] == shift_distance(f[0], f[1], 4).distance);

    const auto p = scratch("f.feat");
    write_features(p.string(), f[1]);
    const auto back = read_features(p.string());
    CHECK(back.values.shape() == f[1].values.shape());
    for (std::size_t i = 0; i < back.values.size(); ++i) CHECK(back.values.at(i) == f[1].values.at(i));
    CHECK(back.mask.cells() == f[1].mask.cells());

    std::ifstream in(p, std::ios::binary);
    const std::string bytes{std::istreambuf_iterator<char>(in), {}};
    std::ofstream(p, std::ios::binary) << bytes.substr(0, bytes.size() - 3);
    CHECK_THROWS_AS(read_features(p.string()), std::runtime_error);
    std::ofstream(p, std::ios::binary) << "CFEB" << bytes.substr(4);
    CHECK_THROWS_AS(read_features(p.string()), std::runtime_error);
}

TEST_CASE("loss log format") {
    const auto p = scratch("loss.csv");
    write_loss_csv(p.string(), {{0, 0.5, 0.01, 3, 1}, {1, 0.25, 0.01, 3, 1}});
    std::ifstream in(p);
    const std::string text{std::istreambuf_iterator<char>(in), {}};
    CHECK(text == "epoch,mean_etl\n0,0.5\n1,0.25\n");
}
