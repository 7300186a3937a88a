#include <malloc.h>

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "ciris/baseline.hpp"
#include "ciris/eval.hpp"
#include "ciris/gradcheck.hpp"
#include "ciris/image.hpp"
#include "ciris/parallel.hpp"
#include "ciris/pipeline.hpp"
#include "ciris/preprocess.hpp"
#include "ciris/synthdata.hpp"

namespace fs = std::filesystem;
using namespace ciris;

namespace {

enum Exit { ok = 0, usage = 1, data = 2, numerical = 3 };

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

template <typename F>
void checked(F&& validate) {
    try {
        validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
}

// Each `key = value` line of a config file becomes `--key=value`, placed
// before the command-line flags so those win.
std::vector<std::string> expand_config(std::vector<std::string> args) {
    for (std::size_t i = 1; i < args.size(); ++i) {
        std::string path;
        std::size_t span = 0;
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[i + 1];
            span = 2;
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
            span = 1;
        } else {
            continue;
        }
        std::ifstream in(path);
        if (!in) throw UsageError("cannot read config '" + path + "'");
        std::vector<std::string> flags;
        std::string line;
        for (int n = 1; std::getline(in, line); ++n) {
            if (const auto h = line.find('#'); h != std::string::npos) line.resize(h);
            const auto trim = [](std::string s) {
                const auto a = s.find_first_not_of(" \t\r");
                if (a == std::string::npos) return std::string();
                return s.substr(a, s.find_last_not_of(" \t\r") - a + 1);
            };
            line = trim(line);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw UsageError(path + ":" + std::to_string(n) + ": expected key=value");
            const std::string key = trim(line.substr(0, eq));
            if (key.empty() || key == "config")
                throw UsageError(path + ":" + std::to_string(n) + ": bad key");
            flags.push_back("--" + key + "=" + trim(line.substr(eq + 1)));
        }
        args.erase(args.begin() + std::ptrdiff_t(i), args.begin() + std::ptrdiff_t(i + span));
        // after the subcommand name
        std::size_t at = 1;
        while (at < args.size() && args[at].rfind("-", 0) == 0) ++at;
        args.insert(args.begin() + std::ptrdiff_t(std::min(at + 1, args.size())), flags.begin(), flags.end());
        --i;
    }
    return args;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ',');)
        if (!item.empty()) out.push_back(item);
    return out;
}

nlohmann::ordered_json geometry_json(const IrisGeometry& g) {
    return {{"cx", g.cx}, {"cy", g.cy}, {"r_pupil", g.r_pupil}, {"r_limbus", g.r_limbus},
            {"low_confidence", g.low_confidence}};
}

IrisGeometry read_geometry(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read geometry '" + path + "'");
    try {
        const auto j = nlohmann::json::parse(in);
        IrisGeometry g{j.at("cx").get<double>(), j.at("cy").get<double>(), j.at("r_pupil").get<double>(),
                       j.at("r_limbus").get<double>(), j.value("low_confidence", false)};
        g.validate();
        return g;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("geometry '" + path + "': " + e.what());
    }
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text)) throw std::runtime_error("cannot write '" + path.string() + "'");
}

void make_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir))
        throw std::runtime_error("cannot create directory '" + dir.string() + "'");
}

// ---------------------------------------------------------------------------

struct TrainArgs {
    std::string manifest, out = "run", preset = "tiny", mining = "semi_hard", schedule = "desk";
    bool real = false, freeze_gabor = false;
    double pool_jitter = 0;
    int precision = 32;
    int checkpoint_every = 10;
    TrainConfig config;
};

template <typename T>
int run_train(const TrainArgs& a) {
    ModelConfig mc = ModelConfig::preset(a.preset);
    mc.real_valued = a.real;
    mc.gabor_trainable = !a.freeze_gabor;
    mc.pool_jitter = a.pool_jitter;
    checked([&] { mc.validate(); });
    const StripSet train = load_strips(read_manifest(a.manifest), "train");
    if (train.size() == 0) throw std::runtime_error("manifest has no train entries");

    make_dir(a.out);
    auto model = Model<T>::build(mc, a.config.seed);
    model.save((fs::path(a.out) / "epoch_000.cirn").string());
    Trainer<T> trainer(model, a.config);
    std::vector<EpochStats> log;
    trainer.fit(train, [&](const EpochStats& s) {
        log.push_back(s);
        std::cerr << "epoch " << s.epoch + 1 << "/" << a.config.epochs << "  etl " << s.mean_loss
                  << "  lr " << s.learning_rate << "  batches " << s.batches << "\n";
        write_loss_csv((fs::path(a.out) / "loss.csv").string(), log);
        const int done = s.epoch + 1;
        if (a.checkpoint_every > 0 && done % a.checkpoint_every == 0 && done < a.config.epochs) {
            char name[32];
            std::snprintf(name, sizeof name, "epoch_%03d.cirn", done);
            model.save((fs::path(a.out) / name).string());
        }
    });
    model.save((fs::path(a.out) / "model.cirn").string());
    std::cout << "trained " << log.size() << " epochs, final etl " << format_number(log.back().mean_loss)
              << ", checkpoint " << (fs::path(a.out) / "model.cirn").string() << "\n";
    return ok;
}

struct EncodeArgs {
    std::string checkpoint, manifest, out = "features", split;
    bool iriscode = false;
    int precision = 32;
    std::size_t code_rows = 8, code_cols = 128;
};

template <typename T>
int run_encode_network(const EncodeArgs& a, const StripSet& set) {
    auto model = Model<T>::load(a.checkpoint);
    const auto& mc = model.config();
    for (std::size_t i = 0; i < set.size(); ++i)
        if (set.strips[i].strip.rows != mc.input_h || set.strips[i].strip.cols != mc.input_w)
            throw std::runtime_error("strip '" + set.stems[i] + "' is " +
                                     std::to_string(set.strips[i].strip.rows) + "x" +
                                     std::to_string(set.strips[i].strip.cols) + ", checkpoint expects " +
                                     std::to_string(mc.input_h) + "x" + std::to_string(mc.input_w));
    const auto feats = encode_features(model, set);
    for (std::size_t i = 0; i < set.size(); ++i)
        write_features((fs::path(a.out) / (set.stems[i] + ".feat")).string(), feats[i]);
    const Shape s = mc.output_shape();
    std::cout << "encoded " << set.size() << " samples, features " << s[0] << "x" << s[1] << "x" << s[2]
              << "\n";
    return ok;
}

int run_encode(const EncodeArgs& a) {
    if (a.iriscode == !a.checkpoint.empty())
        throw UsageError("encode needs exactly one of --checkpoint and --iriscode");
    const StripSet set = load_strips(read_manifest(a.manifest), a.split);
    make_dir(a.out);
    if (a.iriscode) {
        IrisCodeConfig cfg;
        cfg.rows = a.code_rows;
        cfg.cols = a.code_cols;
        checked([&] { cfg.validate(); });
        std::vector<IrisCode> codes(set.size());
        parallel_for(set.size(), [&](std::size_t i) { codes[i] = encode(set.strips[i], cfg); });
        for (std::size_t i = 0; i < set.size(); ++i)
            write_iriscode((fs::path(a.out) / (set.stems[i] + ".icod")).string(), codes[i]);
        std::cout << "encoded " << set.size() << " iris codes, " << cfg.rows << "x" << cfg.cols << "x"
                  << cfg.bank.size() << " cells\n";
        return ok;
    }
    return a.precision == 64 ? run_encode_network<double>(a, set) : run_encode_network<float>(a, set);
}

struct EvalArgs {
    std::string features, manifest, out, split = "test";
    double far = 0.001;
    int max_shift = 4;
    std::size_t cap = 0;
    std::uint64_t seed = 7;
};

int run_eval(const EvalArgs& a) {
    Manifest m = read_manifest(a.manifest);
    std::vector<std::string> stems;
    std::vector<int> labels;
    for (const auto& e : m) {
        if (!a.split.empty() && e.split != a.split) continue;
        std::string stem = fs::path(e.strip_path).filename().string();
        if (const auto p = stem.find(".norm.pgm"); p != std::string::npos) stem.resize(p);
        stems.push_back(stem);
        labels.push_back(e.identity);
    }
    if (stems.empty()) throw std::runtime_error("no manifest entries in split '" + a.split + "'");
    const fs::path dir(a.features);
    const bool codes = fs::exists(dir / (stems[0] + ".icod"));
    const PairSet pairs = enumerate_pairs(labels, a.cap, a.seed);
    for (const auto& w : pairs.warnings) std::cerr << "warning: " << w << "\n";
    if (pairs.genuine.empty() || pairs.impostor.empty())
        throw std::runtime_error("evaluation needs both genuine and impostor pairs");

    std::vector<IrisCode> icodes;
    std::vector<FeatureMap<double>> feats;
    for (const auto& s : stems) {
        if (codes)
            icodes.push_back(read_iriscode((dir / (s + ".icod")).string()));
        else
            feats.push_back(read_features((dir / (s + ".feat")).string()));
    }
    auto distance = [&](const SamplePair& p) {
        return codes ? hamming(icodes[p.a], icodes[p.b], a.max_shift).distance
                     : shift_distance(feats[p.a], feats[p.b], a.max_shift).distance;
    };
    ScoreSet scores;
    scores.genuine.resize(pairs.genuine.size());
    scores.impostor.resize(pairs.impostor.size());
    parallel_for(pairs.genuine.size(), [&](std::size_t i) { scores.genuine[i] = distance(pairs.genuine[i]); });
    parallel_for(pairs.impostor.size(), [&](std::size_t i) { scores.impostor[i] = distance(pairs.impostor[i]); });

    std::vector<ScoredPair> rows;
    auto add = [&](const std::vector<SamplePair>& ps, const std::vector<double>& ss, bool genuine) {
        for (std::size_t i = 0; i < ps.size(); ++i)
            rows.push_back({stems[ps[i].a] + ":" + stems[ps[i].b], genuine, ss[i]});
    };
    add(pairs.genuine, scores.genuine, true);
    add(pairs.impostor, scores.impostor, false);
    const EvalSummary summary = summarize(scores, a.far);
    if (!a.out.empty()) {
        make_dir(a.out);
        write_scores_csv((fs::path(a.out) / "scores.csv").string(), rows);
        write_roc_csv((fs::path(a.out) / "roc.csv").string(), roc(scores));
        write_summary((fs::path(a.out) / "summary.json").string(), summary);
    }
    std::cout << summary_json(summary) << "\n";
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    mallopt(M_MMAP_MAX, 0);
    mallopt(M_TRIM_THRESHOLD, -1);

    CLI::App app{"Complex-valued iris recognition network and IrisCode baseline"};
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    bool deterministic = false;
    app.add_flag("--deterministic", deterministic, "Sequential execution (byte-identical reruns)");
    std::size_t threads = 0;
    app.add_option("--threads", threads, "Worker limit (default COMPLEXIRIS_THREADS or all cores)");

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", "key=value file; flags override its values");
        sub->add_flag("--deterministic", deterministic, "Sequential execution (byte-identical reruns)");
        sub->add_option("--threads", threads, "Worker limit");
    };

    // synth
    SynthSpec spec;
    std::string synth_out = "data";
    auto* synth = app.add_subcommand("synth", "Generate a synthetic strip dataset and manifest");
    add_common(synth);
    synth->add_option("--ids", spec.identities, "Identities")->capture_default_str();
    synth->add_option("--samples", spec.samples, "Samples per identity")->capture_default_str();
    synth->add_option("--noise", spec.noise_std, "Pixel noise std")->capture_default_str();
    synth->add_option("--rotation", spec.max_rotation, "Max rotation in columns")->capture_default_str();
    synth->add_option("--occlusion", spec.occlusion_p, "Occlusion band probability")->capture_default_str();
    synth->add_option("--alpha", spec.alpha, "Texture spectrum exponent")->capture_default_str();
    synth->add_option("--texture-std", spec.texture_std, "Base texture contrast")->capture_default_str();
    synth->add_option("--train-fraction", spec.train_fraction)->capture_default_str();
    synth->add_option("--val-fraction", spec.val_fraction)->capture_default_str();
    synth->add_flag("--eyes", spec.eyes, "Also render eye images");
    synth->add_option("--seed", spec.seed)->capture_default_str();
    synth->add_option("--out", synth_out, "Output directory")->capture_default_str();

    // segment
    std::string seg_image, seg_out;
    SegmentOptions seg;
    auto* segment_cmd = app.add_subcommand("segment", "Locate pupil and limbus circles in an eye image");
    add_common(segment_cmd);
    auto add_seg_opts = [&](CLI::App* sub) {
        sub->add_option("--pupil-min", seg.pupil_min)->capture_default_str();
        sub->add_option("--pupil-max", seg.pupil_max)->capture_default_str();
        sub->add_option("--iris-min", seg.iris_min)->capture_default_str();
        sub->add_option("--iris-max", seg.iris_max)->capture_default_str();
        sub->add_option("--sigma", seg.locate.sigma, "Radial blur, px")->capture_default_str();
    };
    segment_cmd->add_option("--image", seg_image, "Eye image (PGM)")->required();
    segment_cmd->add_option("--out", seg_out, "Geometry JSON (default stdout)");
    add_seg_opts(segment_cmd);

    // normalize
    std::string norm_image, norm_geometry, norm_occlusion, norm_out;
    std::size_t norm_rows = 64, norm_cols = 256;
    auto* normalize = app.add_subcommand("normalize", "Unwrap an eye image to a strip and mask");
    add_common(normalize);
    normalize->add_option("--image", norm_image, "Eye image (PGM)")->required();
    normalize->add_option("--geometry", norm_geometry, "Geometry JSON (default: segment first)");
    normalize->add_option("--occlusion", norm_occlusion, "Image-sized validity PGM (255 = valid)");
    normalize->add_option("--out", norm_out, "Output stem")->required();
    normalize->add_option("--rows", norm_rows)->capture_default_str();
    normalize->add_option("--cols", norm_cols)->capture_default_str();
    add_seg_opts(normalize);

    // train
    TrainArgs ta;
    std::size_t train_triplets = ta.config.triplets;
    auto* train = app.add_subcommand("train", "Train the network with the extended triplet loss");
    add_common(train);
    train->add_option("--manifest", ta.manifest)->required();
    train->add_option("--out", ta.out, "Run directory")->capture_default_str();
    train->add_option("--preset", ta.preset, "tiny or paper")->capture_default_str();
    train->add_flag("--real", ta.real, "Pure real-valued variant");
    train->add_flag("--freeze-gabor", ta.freeze_gabor, "Keep the Gabor kernels fixed");
    train->add_option("--pool-jitter", ta.pool_jitter)->capture_default_str();
    train->add_option("--epochs", ta.config.epochs)->capture_default_str();
    train->add_option("--batch-ids", ta.config.batch_ids)->capture_default_str();
    train->add_option("--batch-samples", ta.config.batch_samples)->capture_default_str();
    train->add_option("--triplets", train_triplets, "Triplets per batch")->capture_default_str();
    train->add_option("--alpha", ta.config.alpha, "Triplet margin")->capture_default_str();
    train->add_option("--max-shift", ta.config.max_shift)->capture_default_str();
    train->add_option("--mining", ta.mining, "random or semi_hard")->capture_default_str();
    train->add_option("--lr-schedule", ta.schedule, "desk, paper or epoch:rate,...")->capture_default_str();
    train->add_option("--momentum", ta.config.momentum)->capture_default_str();
    train->add_option("--clip", ta.config.clip_norm, "Gradient norm clip")->capture_default_str();
    train->add_option("--seed", ta.config.seed)->capture_default_str();
    train->add_option("--precision", ta.precision)->check(CLI::IsMember({32, 64}))->capture_default_str();
    train->add_option("--checkpoint-every", ta.checkpoint_every, "Epochs between checkpoints (0 off)")
        ->capture_default_str();

    // encode
    EncodeArgs ea;
    auto* encode_cmd = app.add_subcommand("encode", "Write network features or iris codes per sample");
    add_common(encode_cmd);
    encode_cmd->add_option("--checkpoint", ea.checkpoint);
    encode_cmd->add_flag("--iriscode", ea.iriscode, "Classical IrisCode instead of the network");
    encode_cmd->add_option("--manifest", ea.manifest)->required();
    encode_cmd->add_option("--split", ea.split, "Only this split (default all)");
    encode_cmd->add_option("--out", ea.out)->capture_default_str();
    encode_cmd->add_option("--precision", ea.precision)->check(CLI::IsMember({32, 64}))->capture_default_str();
    encode_cmd->add_option("--code-rows", ea.code_rows)->capture_default_str();
    encode_cmd->add_option("--code-cols", ea.code_cols)->capture_default_str();

    // eval
    EvalArgs va;
    auto* eval_cmd = app.add_subcommand("eval", "Score pairs and report ROC, EER and FRR@FAR");
    add_common(eval_cmd);
    eval_cmd->add_option("--features", va.features, "Directory of .feat or .icod files")->required();
    eval_cmd->add_option("--manifest", va.manifest)->required();
    eval_cmd->add_option("--split", va.split)->capture_default_str();
    eval_cmd->add_option("--far", va.far)->capture_default_str();
    eval_cmd->add_option("--max-shift", va.max_shift)->capture_default_str();
    eval_cmd->add_option("--cap", va.cap, "Max pairs per list (0 = all)")->capture_default_str();
    eval_cmd->add_option("--seed", va.seed, "Seed for capped pair sampling")->capture_default_str();
    eval_cmd->add_option("--out", va.out, "Directory for scores.csv, roc.csv, summary.json");

    // iriscode-grid
    std::string grid_manifest, grid_split = "train", grid_lambdas = "4,6,8,12,16", grid_deltas = "0.35,0.5,0.7",
                               grid_out;
    int grid_shift = 4;
    auto* grid = app.add_subcommand("iriscode-grid", "Grid-search IrisCode wavelength and envelope by d'");
    add_common(grid);
    grid->add_option("--manifest", grid_manifest)->required();
    grid->add_option("--split", grid_split)->capture_default_str();
    grid->add_option("--lambdas", grid_lambdas, "Comma-separated base wavelengths")->capture_default_str();
    grid->add_option("--deltas", grid_deltas, "Comma-separated envelope/wavelength ratios")->capture_default_str();
    grid->add_option("--max-shift", grid_shift)->capture_default_str();
    grid->add_option("--out", grid_out, "CSV of all grid points");

    // gradcheck
    GradCheckOptions gc;
    auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference check of every layer and loss");
    add_common(gradcheck);
    gradcheck->add_option("--seed", gc.seed)->capture_default_str();
    gradcheck->add_option("--step", gc.h, "Central difference step")->capture_default_str();
    gradcheck->add_option("--tolerance", gc.tolerance)->capture_default_str();
    gradcheck->add_flag("--inject-conv-fault", gc.inject_conv_fault)->group("");

    try {
        std::vector<std::string> args(argv, argv + argc);
        args = expand_config(args);
        std::vector<std::string> rev(args.rbegin(), args.rend() - 1);
        try {
            app.parse(std::move(rev));
        } catch (const CLI::CallForHelp& e) {
            return app.exit(e);
        } catch (const CLI::CallForAllHelp& e) {
            return app.exit(e);
        } catch (const CLI::ParseError& e) {
            app.exit(e);
            return usage;
        }
        if (deterministic) set_thread_limit(1);
        else if (threads > 0) set_thread_limit(threads);

        if (synth->parsed()) {
            checked([&] { spec.validate(); });
            const Manifest m = generate(spec, synth_out);
            std::cout << "wrote " << m.size() << " samples and " << (fs::path(synth_out) / "manifest.csv").string()
                      << "\n";
            return ok;
        }
        if (segment_cmd->parsed() || normalize->parsed()) {
            const GrayImage img = read_pgm(segment_cmd->parsed() ? seg_image : norm_image);
            IrisGeometry g = !norm_geometry.empty() && normalize->parsed() ? read_geometry(norm_geometry)
                                                                           : segment(img, seg);
            if (g.low_confidence) std::cerr << "warning: low-confidence segmentation\n";
            if (segment_cmd->parsed()) {
                const std::string text = geometry_json(g).dump(2) + "\n";
                if (seg_out.empty()) std::cout << text;
                else write_text(seg_out, text);
                return ok;
            }
            BinaryGrid valid;
            const BinaryGrid* vp = nullptr;
            if (!norm_occlusion.empty()) {
                const GrayImage o = read_pgm(norm_occlusion);
                if (o.width != img.width || o.height != img.height)
                    throw std::runtime_error("occlusion image size differs from the eye image");
                valid = image_to_mask(o);
                vp = &valid;
            }
            if (norm_rows < 2 || norm_cols < 1) throw UsageError("strip needs at least 2 rows and 1 column");
            write_normalized(norm_out, rubber_sheet(img, g, vp, norm_rows, norm_cols));
            std::cout << "wrote " << norm_out << ".norm.pgm and " << norm_out << ".mask.pgm\n";
            return ok;
        }
        if (train->parsed()) {
            checked([&] {
                ta.config.triplets = train_triplets;
                ta.config.mining = parse_mining_strategy(ta.mining);
                ta.config.schedule = ta.schedule == "desk"    ? LrSchedule::desk()
                                     : ta.schedule == "paper" ? LrSchedule::paper()
                                                              : LrSchedule::parse(ta.schedule);
                ta.config.validate();
                if (!(ta.pool_jitter >= 0 && ta.pool_jitter <= 1)) throw std::invalid_argument("pool jitter must lie in [0, 1]");
            });
            return ta.precision == 64 ? run_train<double>(ta) : run_train<float>(ta);
        }
        if (encode_cmd->parsed()) return run_encode(ea);
        if (eval_cmd->parsed()) {
            if (!(va.far > 0 && va.far <= 1)) throw UsageError("--far must lie in (0, 1]");
            if (va.max_shift < 0) throw UsageError("--max-shift must be non-negative");
            return run_eval(va);
        }
        if (grid->parsed()) {
            std::vector<double> lambdas, deltas;
            checked([&] {
                try {
                    for (const auto& s : split_list(grid_lambdas)) lambdas.push_back(std::stod(s));
                    for (const auto& s : split_list(grid_deltas)) deltas.push_back(std::stod(s));
                } catch (const std::logic_error&) {
                    throw std::invalid_argument("grid values must be comma-separated numbers");
                }
                if (lambdas.empty() || deltas.empty()) throw std::invalid_argument("empty grid");
            });
            const StripSet set = load_strips(read_manifest(grid_manifest), grid_split);
            const auto points = iriscode_grid(set.strips, set.labels, lambdas, deltas, {}, grid_shift);
            std::ostringstream csv;
            csv << "lambda,delta_ratio,d_prime,genuine_mean,impostor_mean\n";
            for (const auto& p : points)
                csv << format_number(p.lambda) << ',' << format_number(p.delta_ratio) << ','
                    << format_number(p.d_prime) << ',' << format_number(p.genuine_mean) << ','
                    << format_number(p.impostor_mean) << '\n';
            if (!grid_out.empty()) write_text(grid_out, csv.str());
            std::cout << csv.str();
            return ok;
        }
        if (gradcheck->parsed()) {
            const auto results = run_gradcheck_suite(gc);
            std::cout << format_report(results);
            for (const auto& r : results)
                if (!r.passed) return numerical;
            return ok;
        }
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return usage;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return numerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return data;
    }
    return usage;
}
