#include "gazelab/cli.hpp"

#include "gazelab/datasets.hpp"
#include "gazelab/error.hpp"
#include "gazelab/evalkit.hpp"
#include "gazelab/models.hpp"
#include "gazelab/synthlab.hpp"
#include "gazelab/textio.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

namespace gazelab::cli {

namespace fs = std::filesystem;

namespace {

struct SynthConfig {
    std::string out;
    std::string looker = "L1";
    double kappa = 0.6;
    std::string condition = "visible";
    int blocks = 3;
    int first_block = 0;
    std::uint64_t seed = 1;
    double pose_jitter = 0.0;
    double annotation_noise = 0.0;
    double pixel_noise = 0.0;
    double asym_longitude = 0.0;
    double asym_latitude = 0.0;
};

struct TrainConfig {
    std::string manifest;
    std::string out;
    std::string model = "face-eyes";
    int k = 5;
    double epsilon = 1e-6;
    int cell_size = 8;
    int bins = 9;
    int block_size = 2;
    double clip = 0.2;
    bool cross_looker = false;
};

struct PredictConfig {
    std::string model_file;
    std::string model;
    std::string manifest;
    std::string out;
    std::string condition = "visible";
};

struct EvalConfig {
    std::string model_file;
    std::string model;
    std::string manifest;
    std::string out;
    std::string condition = "visible";
    std::string predictions;
    bool allow_overlap = false;
    bool strict_lookers = false;
    double center_sign = 1.0;
    std::vector<int> positions;
};

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw IoError("cannot write " + path.string());
    }
    f << text;
    if (!f.flush()) {
        throw IoError("cannot write " + path.string());
    }
}

std::string read_text(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        throw MissingFileError("cannot open " + path.string());
    }
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

void require(const std::string& value, const char* flag) {
    if (value.empty()) {
        throw ParameterError(std::string(flag) + " is required");
    }
}

// --model on predict/eval names the variant the caller expects to load.
void expect_variant(const std::string& expected, std::string_view actual) {
    if (!expected.empty() && expected != actual) {
        throw ParameterError("--model " + expected + " does not match the " + std::string(actual) + " model");
    }
}

void cmd_synth(const SynthConfig& c, std::ostream& out) {
    require(c.out, "--out");
    LookerProfile profile;
    profile.looker_id = c.looker;
    profile.kappa = c.kappa;
    profile.pose_jitter_deg = c.pose_jitter;
    profile.annotation_noise_deg = c.annotation_noise;
    profile.pixel_noise = c.pixel_noise;
    profile.seed = c.seed;
    profile.features.feature_longitude_offset_deg = c.asym_longitude;
    profile.features.feature_latitude_offset_deg = c.asym_latitude;
    validate(profile);
    const Condition condition = parse_condition(c.condition);
    if (c.blocks < 1 || c.first_block < 0) {
        throw ParameterError("--blocks must be >= 1 and --first-block >= 0");
    }

    const SceneLayout scene = nominal_scene();
    const auto blocks = generate_blocks(profile, scene, c.blocks, condition, c.seed, c.first_block);
    const Dataset dataset = to_dataset(blocks, scene);
    write_manifest(dataset, c.out);
    out << "lookers 1\nblocks " << c.blocks << "\ntrials " << dataset.trials.size() << "\ncondition "
        << to_string(condition) << "\nmanifest " << (fs::path(c.out) / kManifestFileName).string() << "\n";
}

void cmd_train(const TrainConfig& c, std::ostream& out) {
    require(c.manifest, "--manifest");
    require(c.out, "--out");
    ModelConfig config;
    config.variant = parse_model_variant(c.model);
    config.k = c.k;
    config.epsilon = c.epsilon;
    config.hog = HogParams{c.cell_size, c.bins, c.block_size, c.clip};
    config.cross_looker = c.cross_looker;
    validate(config);

    const Dataset data = read_manifest(c.manifest);
    if (data.trials.empty()) {
        throw EmptyInputError("manifest " + c.manifest + " has no trials");
    }
    Model model = train(examples_from_trials(data.trials, config), config);
    save_model(model, c.out);
    out << "variant " << to_string(model.variant()) << "\ntraining_size " << model.training_size() << "\n";
    if (model.variant() == ModelVariant::KinectLinear) {
        const auto& m = model.linear_map();
        out << "azimuth_coefficients";
        for (double v : m.azimuth) {
            out << ' ' << textio::format_double(v);
        }
        out << "\nelevation_coefficients";
        for (double v : m.elevation) {
            out << ' ' << textio::format_double(v);
        }
        out << '\n';
    }
    out << "model " << c.out << "\n";
}

void cmd_predict(const PredictConfig& c, std::ostream& out) {
    require(c.model_file, "--model-file");
    require(c.manifest, "--manifest");
    require(c.out, "--out");
    const Condition condition = parse_condition(c.condition);
    const Model model = load_model(c.model_file);
    expect_variant(c.model, to_string(model.variant()));
    const Dataset data = read_manifest(c.manifest);
    if (data.trials.empty()) {
        throw EmptyInputError("manifest " + c.manifest + " has no trials");
    }
    PredictionsFile file;
    file.model = std::string(to_string(model.variant()));
    file.condition = condition;
    file.responses = predict_dataset(model, data.trials, data.scene, condition);
    write_text(c.out, predictions_to_text(file));
    const auto n_invalid = std::count_if(file.responses.begin(), file.responses.end(),
                                         [](const Response& r) { return !r.predicted_target; });
    out << "predictions " << file.responses.size() << "\ninvalid " << n_invalid << "\nfile " << c.out << "\n";
}

void cmd_eval(const EvalConfig& c, std::ostream& out, std::ostream& err) {
    require(c.manifest, "--manifest");
    require(c.out, "--out");
    if (c.model_file.empty() == c.predictions.empty()) {
        throw ParameterError("give exactly one of --model-file and --predictions");
    }
    if (c.center_sign != 1.0 && c.center_sign != -1.0) {
        throw ParameterError("--center-sign must be 1 or -1");
    }
    for (int p : c.positions) {
        if (p < 1 || p > 4) {
            throw UnknownPositionError("observer position " + std::to_string(p) + " is not in 1..4");
        }
    }
    const Condition condition = parse_condition(c.condition);
    const Dataset data = read_manifest(c.manifest);
    if (data.trials.empty()) {
        throw EmptyInputError("manifest " + c.manifest + " has no trials");
    }

    EvalOptions options;
    options.require_disjoint = !c.allow_overlap;
    options.center_column_sign = c.center_sign;
    options.observer_positions = c.positions;

    EvalReport report;
    if (!c.model_file.empty()) {
        const Model model = load_model(c.model_file);
        expect_variant(c.model, to_string(model.variant()));
        const auto unseen = unseen_lookers(model, data.trials);
        if (!unseen.empty()) {
            std::string names;
            for (const auto& u : unseen) {
                names += (names.empty() ? "" : ",") + u;
            }
            if (c.strict_lookers) {
                throw LookerMismatchError("test lookers not in training data: " + names);
            }
            err << "warning: test lookers not in training data: " << names << "\n";
        }
        report = run_evaluation(model, data, condition, options);
    } else {
        const PredictionsFile file = predictions_from_text(read_text(c.predictions));
        expect_variant(c.model, file.model);
        if (file.condition != condition) {
            throw ValidationError("predictions were made for " + std::string(to_string(file.condition)));
        }
        report = evaluate_responses(file.responses, data.trials, data.scene, condition, file.model, options);
    }

    const fs::path dir(c.out);
    write_text(dir / "report.txt", report_to_text(report));
    write_text(dir / "report.json", report_to_json(report));
    for (const auto& e : report.entries) {
        out << e.looker_id << " exact " << textio::format_fixed(e.exact_accuracy, 4) << " one_off "
            << textio::format_fixed(e.one_off_accuracy, 4) << "\n";
    }
    out << "report " << (dir / "report.txt").string() << "\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Gaze estimation toolkit: synthesize trials, train, predict, evaluate", "gazelab"};
    app.set_config("--config", "", "Optional TOML/INI config file; command-line flags take precedence");
    app.require_subcommand(1);

    const auto variant_check = CLI::IsMember({"face-eyes", "face", "kinect-linear"});
    const auto condition_check = CLI::IsMember({"visible", "invisible", "eyes-visible", "eyes-invisible"});

    SynthConfig sc;
    auto* synth = app.add_subcommand("synth", "Render a synthetic looker's trials to a manifest directory");
    synth->add_option("--out", sc.out, "Output dataset directory")->required();
    synth->add_option("--looker", sc.looker, "Looker id")->capture_default_str();
    synth->add_option("--kappa", sc.kappa, "Fraction of the target angle covered by the head")->capture_default_str();
    synth->add_option("--condition", sc.condition, "visible or invisible")->check(condition_check)->capture_default_str();
    synth->add_option("--blocks", sc.blocks, "Number of 52-trial blocks")->capture_default_str();
    synth->add_option("--first-block", sc.first_block, "Id of the first block")->capture_default_str();
    synth->add_option("--seed", sc.seed, "Random seed")->capture_default_str();
    synth->add_option("--pose-jitter", sc.pose_jitter, "Head pose jitter sigma (deg)")->capture_default_str();
    synth->add_option("--annotation-noise", sc.annotation_noise, "Annotated pose noise sigma (deg)")
        ->capture_default_str();
    synth->add_option("--pixel-noise", sc.pixel_noise, "Pixel noise sigma (intensity)")->capture_default_str();
    synth->add_option("--asym-longitude", sc.asym_longitude, "Feature longitude offset (deg)")->capture_default_str();
    synth->add_option("--asym-latitude", sc.asym_latitude, "Feature latitude offset (deg)")->capture_default_str();

    TrainConfig tc;
    auto* trn = app.add_subcommand("train", "Train a model on a manifest");
    trn->add_option("--manifest", tc.manifest, "Training manifest (file or directory)")->required();
    trn->add_option("--out", tc.out, "Model file to write")->required();
    trn->add_option("--model", tc.model, "Model variant")
        ->check(variant_check)
        ->capture_default_str();
    trn->add_option("--k", tc.k, "Number of neighbors")->capture_default_str();
    trn->add_option("--epsilon", tc.epsilon, "Similarity epsilon: w = 1/(d + epsilon)")->capture_default_str();
    trn->add_option("--cell-size", tc.cell_size, "HoG cell size (px)")->capture_default_str();
    trn->add_option("--bins", tc.bins, "HoG orientation bins")->capture_default_str();
    trn->add_option("--block-size", tc.block_size, "HoG block size (cells)")->capture_default_str();
    trn->add_option("--clip", tc.clip, "HoG L2-hys clip value")->capture_default_str();
    trn->add_flag("--cross-looker", tc.cross_looker, "Allow training on several lookers");

    PredictConfig pc;
    auto* pred = app.add_subcommand("predict", "Write per-trial predictions");
    pred->add_option("--model-file", pc.model_file, "Trained model file")->required();
    pred->add_option("--model", pc.model, "Expected model variant (checked against the file)")
        ->check(variant_check);
    pred->add_option("--manifest", pc.manifest, "Test manifest (file or directory)")->required();
    pred->add_option("--out", pc.out, "Predictions file to write")->required();
    pred->add_option("--condition", pc.condition, "visible or invisible")->check(condition_check)->capture_default_str();

    EvalConfig ec;
    auto* eval = app.add_subcommand("eval", "Evaluate a model (or a predictions file) and write reports");
    eval->add_option("--model-file", ec.model_file, "Trained model file");
    eval->add_option("--predictions", ec.predictions, "Score this predictions file instead of running a model");
    eval->add_option("--model", ec.model, "Expected model variant (checked against the file)")
        ->check(variant_check);
    eval->add_option("--manifest", ec.manifest, "Test manifest (file or directory)")->required();
    eval->add_option("--out", ec.out, "Report directory (report.txt, report.json)")->required();
    eval->add_option("--condition", ec.condition, "visible or invisible")->check(condition_check)->capture_default_str();
    eval->add_flag("--allow-overlap", ec.allow_overlap, "Do not require test blocks to be unseen in training");
    eval->add_flag("--strict-lookers", ec.strict_lookers, "Fail when test lookers were not trained on");
    eval->add_option("--center-sign", ec.center_sign, "Column-error sign for the center column (1 or -1)")
        ->capture_default_str();
    eval->add_option("--position", ec.positions, "Observer seat(s) 1..4 to tag position tables with");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        std::string msg = e.what();
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        err << "error: usage: " << msg << "\n";
        return 2;
    }

    try {
        if (synth->parsed()) {
            cmd_synth(sc, out);
        } else if (trn->parsed()) {
            cmd_train(tc, out);
        } else if (pred->parsed()) {
            cmd_predict(pc, out);
        } else if (eval->parsed()) {
            cmd_eval(ec, out, err);
        }
    } catch (const Error& e) {
        std::string msg = e.what();
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        err << "error: " << e.error_class() << ": " << msg << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: internal: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace gazelab::cli
