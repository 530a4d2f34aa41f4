#include "gazelab/cli.hpp"
#include "gazelab/datasets.hpp"
#include "gazelab/descriptor.hpp"
#include "gazelab/error.hpp"
#include "gazelab/evalkit.hpp"
#include "gazelab/geometry.hpp"
#include "gazelab/models.hpp"
#include "gazelab/orientation.hpp"
#include "gazelab/synthlab.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace gazelab;

namespace {

using Vec = std::tuple<double, double, double>;
using Quat = std::tuple<double, double, double, double>;

Vec3 to_vec(const Vec& v) { return {std::get<0>(v), std::get<1>(v), std::get<2>(v)}; }
Vec from_vec(const Vec3& v) { return {v.x, v.y, v.z}; }
UnitQuaternion to_quat(const Quat& q) {
    return UnitQuaternion::from_components(std::get<0>(q), std::get<1>(q), std::get<2>(q), std::get<3>(q));
}
Quat from_quat(const UnitQuaternion& q) { return {q.w(), q.x(), q.y(), q.z()}; }

GrayPatch to_patch(py::array_t<double, py::array::c_style | py::array::forcecast> image) {
    if (image.ndim() != 2) {
        throw ParameterError("image must be a 2-D array");
    }
    const auto h = static_cast<int>(image.shape(0));
    const auto w = static_cast<int>(image.shape(1));
    return GrayPatch(w, h, std::vector<double>(image.data(), image.data() + image.size()));
}

}  // namespace

PYBIND11_MODULE(_gazelab, m) {
    m.doc() = "Gaze estimation toolkit: geometry, HoG descriptors, kNN gaze models, synthetic trials, evaluation";

    py::register_exception<Error>(m, "GazelabError");

    m.def("grid_targets", [] {
        std::vector<std::tuple<int, int, double, double, double>> out;
        const TargetGrid grid = build_grid();
        for (const auto& t : grid.targets()) {
            out.emplace_back(t.row(), t.col(), t.position.x, t.position.y, t.position.z);
        }
        return out;
    }, "All 52 targets as (row, col, x, y, z) in centimeters.");

    m.def("visual_angle_between", [](const Vec& eye, const std::pair<int, int>& a, const std::pair<int, int>& b) {
        const TargetGrid grid = build_grid();
        return visual_angle_between(to_vec(eye), grid.at({a.first, a.second}), grid.at({b.first, b.second}));
    }, py::arg("eye"), py::arg("a"), py::arg("b"),
       "Angle in degrees subtended at eye by targets a and b, given as (row, col).");

    m.def("head_from_euler", [](double yaw, double pitch, double roll) {
        return from_quat(HeadPose::from_euler(yaw, pitch, roll).orientation);
    }, py::arg("yaw_deg"), py::arg("pitch_deg"), py::arg("roll_deg") = 0.0,
       "Head orientation quaternion (w, x, y, z) from Euler angles in degrees.");

    m.def("correction_from", [](const Quat& head, const Vec& gaze) {
        return from_quat(correction_from(HeadPose{to_quat(head)}, GazeDirection::from_vector(to_vec(gaze))).offset);
    }, py::arg("head"), py::arg("gaze"));

    m.def("compose", [](const Quat& head, const Quat& correction) {
        return from_vec(compose(HeadPose{to_quat(head)}, EyeGazeCorrection{to_quat(correction)}).vector());
    }, py::arg("head"), py::arg("correction"), "Gaze unit vector from head pose and eye correction.");

    m.def("compute_hog", [](py::array_t<double, py::array::c_style | py::array::forcecast> image, int cell_size,
                            int n_bins, int block_size, double clip) {
        const HogDescriptor d = compute_hog(to_patch(image), HogParams{cell_size, n_bins, block_size, clip});
        return d.values;
    }, py::arg("image"), py::arg("cell_size") = 8, py::arg("n_bins") = 9, py::arg("block_size") = 2,
       py::arg("clip") = 0.2, "HoG descriptor of a 2-D array with values in [0, 1].");

    m.def("synthesize", [](const std::string& out_dir, double kappa, int blocks, int first_block,
                           std::uint64_t seed, const std::string& condition, const std::string& looker,
                           double pose_jitter, double annotation_noise, double pixel_noise) {
        LookerProfile profile;
        profile.looker_id = looker;
        profile.kappa = kappa;
        profile.seed = seed;
        profile.pose_jitter_deg = pose_jitter;
        profile.annotation_noise_deg = annotation_noise;
        profile.pixel_noise = pixel_noise;
        validate(profile);
        const SceneLayout scene = nominal_scene();
        const Dataset data =
            to_dataset(generate_blocks(profile, scene, blocks, parse_condition(condition), seed, first_block), scene);
        write_manifest(data, out_dir);
        return data.trials.size();
    }, py::arg("out_dir"), py::arg("kappa") = 0.6, py::arg("blocks") = 3, py::arg("first_block") = 0,
       py::arg("seed") = 1, py::arg("condition") = "visible", py::arg("looker") = "L1",
       py::arg("pose_jitter") = 0.0, py::arg("annotation_noise") = 0.0, py::arg("pixel_noise") = 0.0,
       "Render synthetic trials to a manifest directory; returns the trial count.");

    m.def("read_trials", [](const std::string& manifest) {
        std::vector<py::dict> out;
        for (const auto& t : read_manifest(manifest).trials) {
            py::dict d;
            d["trial_id"] = t.trial_id;
            d["looker_id"] = t.looker_id;
            d["block_id"] = t.block_id;
            d["condition"] = std::string(to_string(t.condition));
            d["target"] = std::make_tuple(t.target.row, t.target.col);
            d["head"] = from_quat(t.annotated_head_pose.orientation);
            out.push_back(std::move(d));
        }
        return out;
    }, py::arg("manifest"));

    m.def("train_model", [](const std::string& manifest, const std::string& model_path, const std::string& variant,
                            int k, bool cross_looker) {
        ModelConfig config;
        config.variant = parse_model_variant(variant);
        config.k = k;
        config.cross_looker = cross_looker;
        validate(config);
        const Dataset data = read_manifest(manifest);
        const Model model = train(examples_from_trials(data.trials, config), config);
        save_model(model, model_path);
        return model.training_size();
    }, py::arg("manifest"), py::arg("model_path"), py::arg("variant") = "face-eyes", py::arg("k") = 5,
       py::arg("cross_looker") = false, "Train and save a model; returns the training-set size.");

    m.def("evaluate", [](const std::string& model_path, const std::string& manifest, const std::string& condition) {
        const Model model = load_model(model_path);
        return report_to_json(run_evaluation(model, read_manifest(manifest), parse_condition(condition)));
    }, py::arg("model_path"), py::arg("manifest"), py::arg("condition") = "visible",
       "Evaluate a saved model on a held-out manifest; returns the JSON report text.");

    m.def("run_cli", [](const std::vector<std::string>& args) {
        std::ostringstream out;
        std::ostringstream err;
        const int code = cli::run(args, out, err);
        return std::make_tuple(code, out.str(), err.str());
    }, py::arg("args"), "Run the command-line tool in-process; returns (exit code, stdout, stderr).");
}
