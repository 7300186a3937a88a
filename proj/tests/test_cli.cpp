#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>

#include <json.hpp>

#include "ciris/model.hpp"

using namespace ciris;
namespace fs = std::filesystem;

namespace {

const fs::path kRoot = fs::temp_directory_path() / "ciris_test_cli";

int run(const std::string& args) {
    const std::string cmd = std::string(CIRIS_CLI) + " " + args + " >" + (kRoot / "out.txt").string() +
                            " 2>" + (kRoot / "err.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

std::string at(const std::string& rel) { return (kRoot / rel).string(); }

struct Fixture {
    Fixture() {
        static bool once = [] {
            fs::remove_all(kRoot);
            fs::create_directories(kRoot);
            return true;
        }();
        (void)once;
    }
};

}  // namespace

TEST_CASE_FIXTURE(Fixture, "synth writes the dataset and reruns byte-identically") {
    REQUIRE(run("synth --ids 10 --samples 8 --seed 7 --out " + at("d1")) == 0);
    REQUIRE(run("synth --ids 10 --samples 8 --seed 7 --out " + at("d2")) == 0);
    std::size_t strips = 0;
    for (const auto& e : fs::directory_iterator(kRoot / "d1")) {
        strips += e.path().string().ends_with(".norm.pgm");
        CHECK(slurp(e.path()) == slurp(kRoot / "d2" / e.path().filename()));
    }
    CHECK(strips == 80);
    CHECK(fs::exists(kRoot / "d1" / "manifest.csv"));
}

TEST_CASE_FIXTURE(Fixture, "usage, data and config errors") {
    CHECK(run("") == 1);
    CHECK(run("frobnicate") == 1);
    CHECK(run("synth --ids") == 1);
    CHECK(run("synth --ids 0 --out " + at("zero")) == 1);
    CHECK(run("synth --out /proc/ciris_nope") == 2);
    CHECK_FALSE(slurp(kRoot / "err.txt").empty());
    CHECK(run("train --manifest " + at("missing.csv")) == 2);
    CHECK(run("eval --features " + at("nowhere") + " --manifest " + at("missing.csv")) == 2);
    std::ofstream(kRoot / "bad.cfg") << "ids = 3\ncolour = blue\n";
    CHECK(run("synth --config " + at("bad.cfg") + " --out " + at("cfg")) == 1);
    CHECK(run("--help") == 0);
}

TEST_CASE_FIXTURE(Fixture, "config values are overridden by flags") {
    std::ofstream(kRoot / "s.cfg") << "# small set\nids = 3\nsamples=2\nseed = 4\n";
    REQUIRE(run("synth --config " + at("s.cfg") + " --samples 3 --out " + at("cfgset")) == 0);
    std::size_t strips = 0;
    for (const auto& e : fs::directory_iterator(kRoot / "cfgset")) strips += e.path().string().ends_with(".norm.pgm");
    CHECK(strips == 9);
}

TEST_CASE_FIXTURE(Fixture, "deterministic training, encoding and evaluation") {
    REQUIRE(run("synth --ids 5 --samples 3 --out " + at("t")) == 0);
    const std::string train = "--deterministic train --manifest " + at("t/manifest.csv") +
                              " --epochs 2 --batch-ids 3 --freeze-gabor --seed 7 --out ";
    REQUIRE(run(train + at("r1")) == 0);
    REQUIRE(run(train + at("r2")) == 0);
    const std::string loss = slurp(kRoot / "r1" / "loss.csv");
    CHECK(loss == slurp(kRoot / "r2" / "loss.csv"));
    CHECK(loss.rfind("epoch,mean_etl\n0,", 0) == 0);
    CHECK(slurp(kRoot / "r1" / "model.cirn") == slurp(kRoot / "r2" / "model.cirn"));

    const auto init = read_checkpoint<float>(at("r1/epoch_000.cirn"));
    const auto last = read_checkpoint<float>(at("r1/model.cirn"));
    CHECK(init.records[0].name == last.records[0].name);
    CHECK(init.records[0].value.re().size() == last.records[0].value.re().size());
    CHECK(std::equal(init.records[0].value.re().begin(), init.records[0].value.re().end(),
                     last.records[0].value.re().begin()));

    REQUIRE(run("encode --checkpoint " + at("r1/model.cirn") + " --manifest " + at("t/manifest.csv") +
                " --out " + at("f1")) == 0);
    CHECK(slurp(kRoot / "out.txt").find("16x64x8") != std::string::npos);
    REQUIRE(run("encode --checkpoint " + at("r1/model.cirn") + " --manifest " + at("t/manifest.csv") +
                " --out " + at("f2")) == 0);
    for (const auto& e : fs::directory_iterator(kRoot / "f1"))
        CHECK(slurp(e.path()) == slurp(kRoot / "f2" / e.path().filename()));

    REQUIRE(run("eval --features " + at("f1") + " --manifest " + at("t/manifest.csv") +
                " --split \"\" --out " + at("e1")) == 0);
    const auto j = nlohmann::json::parse(slurp(kRoot / "e1" / "summary.json"));
    CHECK(j.contains("eer"));
    CHECK(j.contains("frr_at_far_0.001"));
    CHECK(slurp(kRoot / "e1" / "scores.csv").rfind("pair_id,label,score\n", 0) == 0);
    CHECK(slurp(kRoot / "e1" / "roc.csv").rfind("threshold,far,frr\n", 0) == 0);
    CHECK(run("encode --manifest " + at("t/manifest.csv") + " --out " + at("none")) == 1);
}

TEST_CASE_FIXTURE(Fixture, "iris codes and duplicate samples") {
    REQUIRE(run("synth --ids 4 --samples 3 --noise 0 --rotation 0 --occlusion 0 --out " + at("dup")) == 0);
    REQUIRE(run("encode --iriscode --manifest " + at("dup/manifest.csv") + " --out " + at("codes")) == 0);
    std::size_t icod = 0;
    for (const auto& e : fs::directory_iterator(kRoot / "codes")) {
        icod += e.path().extension() == ".icod";
        CHECK(slurp(e.path()).substr(0, 4) == "ICOD");
    }
    CHECK(icod == 12);
    REQUIRE(run("eval --features " + at("codes") + " --manifest " + at("dup/manifest.csv") + " --split \"\"") == 0);
    const auto j = nlohmann::json::parse(slurp(kRoot / "out.txt"));
    CHECK(j["eer"].get<double>() == 0);
    CHECK(j["genuine_mean"].get<double>() == 0);
    REQUIRE(run("iriscode-grid --manifest " + at("dup/manifest.csv") + " --split \"\" --lambdas 4,8 --deltas 0.5") == 0);
    CHECK(slurp(kRoot / "out.txt").rfind("lambda,delta_ratio,d_prime", 0) == 0);
}

TEST_CASE_FIXTURE(Fixture, "segment and normalize a rendered eye") {
    REQUIRE(run("synth --ids 1 --samples 1 --eyes --out " + at("eye")) == 0);
    REQUIRE(run("segment --image " + at("eye/id000_s00.eye.pgm") + " --out " + at("geom.json")) == 0);
    const auto g = nlohmann::json::parse(slurp(kRoot / "geom.json"));
    CHECK(std::abs(g["r_pupil"].get<double>() - 32) <= 1);
    CHECK(std::abs(g["r_limbus"].get<double>() - 100) <= 1);
    REQUIRE(run("normalize --image " + at("eye/id000_s00.eye.pgm") + " --geometry " + at("geom.json") +
                " --out " + at("eye/n")) == 0);
    CHECK(fs::exists(kRoot / "eye" / "n.norm.pgm"));
    CHECK(fs::exists(kRoot / "eye" / "n.mask.pgm"));
    CHECK(run("normalize --image " + at("eye/missing.pgm") + " --out " + at("eye/m")) == 2);
}

TEST_CASE_FIXTURE(Fixture, "gradcheck exit codes") {
    CHECK(run("gradcheck") == 0);
    const std::string report = slurp(kRoot / "out.txt");
    CHECK(report.find("triplet_loss") != std::string::npos);
    CHECK(report.find("max_rel_error") != std::string::npos);
    CHECK(run("gradcheck --inject-conv-fault") == 3);
}
