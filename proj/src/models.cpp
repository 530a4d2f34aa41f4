#include "gazelab/models.hpp"

#include "gazelab/error.hpp"
#include "gazelab/textio.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace gazelab {

std::string_view to_string(ModelVariant variant) {
    switch (variant) {
        case ModelVariant::FaceEyes:
            return "face-eyes";
        case ModelVariant::Face:
            return "face";
        case ModelVariant::KinectLinear:
            return "kinect-linear";
    }
    return "unknown";
}

ModelVariant parse_model_variant(std::string_view text) {
    if (text == "face-eyes") {
        return ModelVariant::FaceEyes;
    }
    if (text == "face") {
        return ModelVariant::Face;
    }
    if (text == "kinect-linear") {
        return ModelVariant::KinectLinear;
    }
    throw ParameterError("unknown model variant '" + std::string(text) + "'");
}

void validate(const ModelConfig& config) {
    if (config.k < 1) {
        throw ParameterError("k must be at least 1");
    }
    if (!(config.epsilon > 0.0) || !std::isfinite(config.epsilon)) {
        throw ParameterError("epsilon must be positive");
    }
    validate(config.hog);
    if (config.sizes.face_width < 1 || config.sizes.face_height < 1 || config.sizes.eyes_width < 1 ||
        config.sizes.eyes_height < 1) {
        throw ParameterError("patch sizes must be positive");
    }
}

TrainingExample make_example(const TrialRecord& trial, const HogParams& hog, bool with_eyes) {
    TrainingExample ex;
    ex.example_id = trial.trial_id;
    ex.looker_id = trial.looker_id;
    ex.block_id = trial.block_id;
    ex.face_descriptor = compute_hog(trial.face_patch, hog);
    if (with_eyes) {
        ex.eyes_descriptor = compute_hog(trial.eyes_patch, hog);
    }
    ex.head_pose = trial.annotated_head_pose;
    ex.gaze = trial.true_gaze();
    ex.eye_correction = correction_from(ex.head_pose, ex.gaze);
    return ex;
}

std::vector<TrainingExample> examples_from_trials(std::span<const TrialRecord> trials, const ModelConfig& config) {
    std::vector<TrainingExample> out;
    out.reserve(trials.size());
    for (const auto& trial : trials) {
        if (config.variant == ModelVariant::KinectLinear) {
            TrainingExample ex;
            ex.example_id = trial.trial_id;
            ex.looker_id = trial.looker_id;
            ex.block_id = trial.block_id;
            ex.head_pose = trial.annotated_head_pose;
            ex.gaze = trial.true_gaze();
            ex.eye_correction = correction_from(ex.head_pose, ex.gaze);
            out.push_back(std::move(ex));
        } else {
            out.push_back(make_example(trial, config.hog, config.variant == ModelVariant::FaceEyes));
        }
    }
    return out;
}

KnnIndex::KnnIndex(std::vector<HogDescriptor> descriptors, std::vector<std::string> ids, int k, double epsilon)
    : descriptors_(std::move(descriptors)), ids_(std::move(ids)), k_(k), epsilon_(epsilon) {
    if (descriptors_.empty()) {
        throw EmptyInputError("kNN index needs at least one example");
    }
    if (ids_.size() != descriptors_.size()) {
        throw ParameterError("kNN index needs one id per descriptor");
    }
    if (k_ < 1 || static_cast<std::size_t>(k_) > descriptors_.size()) {
        throw ParameterError("k = " + std::to_string(k_) + " must lie in [1, " + std::to_string(descriptors_.size()) +
                             "]");
    }
    if (!(epsilon_ > 0.0)) {
        throw ParameterError("epsilon must be positive");
    }
    for (const auto& d : descriptors_) {
        if (!(d.layout == descriptors_.front().layout) || d.values.size() != descriptors_.front().values.size()) {
            throw LayoutMismatchError("training descriptors have differing layouts");
        }
    }
}

std::vector<Neighbor> KnnIndex::search(const HogDescriptor& query) const {
    std::vector<Neighbor> all(descriptors_.size());
    for (std::size_t i = 0; i < descriptors_.size(); ++i) {
        all[i].index = i;
        all[i].distance = descriptor_distance(query, descriptors_[i]);
    }
    const auto closer = [this](const Neighbor& a, const Neighbor& b) {
        if (a.distance != b.distance) {
            return a.distance < b.distance;
        }
        return ids_[a.index] < ids_[b.index];
    };
    std::partial_sort(all.begin(), all.begin() + k_, all.end(), closer);
    all.resize(k_);
    for (auto& n : all) {
        n.weight = 1.0 / (n.distance + epsilon_);
    }
    return all;
}

LinearGazeMap fit_linear_gaze_map(std::span<const EulerAngles> poses, std::span<const GazeDirection> gazes) {
    if (poses.empty()) {
        throw EmptyInputError("linear fit needs data");
    }
    if (poses.size() != gazes.size()) {
        throw ParameterError("linear fit needs one gaze per pose");
    }
    const auto n = static_cast<Eigen::Index>(poses.size());
    Eigen::MatrixXd design(n, 4);
    Eigen::MatrixXd response(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& p = poses[static_cast<std::size_t>(i)];
        const auto& g = gazes[static_cast<std::size_t>(i)];
        design.row(i) << p.yaw_deg, p.pitch_deg, p.roll_deg, 1.0;
        response.row(i) << g.azimuth_deg(), g.elevation_deg();
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(1e-10);
    if (qr.rank() < 4) {
        throw SingularFitError("head-pose design matrix has rank " + std::to_string(qr.rank()) +
                               " < 4; poses need spread in yaw, pitch and roll");
    }
    const Eigen::MatrixXd coef = qr.solve(response);
    LinearGazeMap map;
    for (int j = 0; j < 4; ++j) {
        map.azimuth[j] = coef(j, 0);
        map.elevation[j] = coef(j, 1);
    }
    return map;
}

void Model::build_indexes() {
    if (config_.variant == ModelVariant::KinectLinear) {
        return;
    }
    std::vector<HogDescriptor> faces;
    std::vector<std::string> ids;
    faces.reserve(examples_.size());
    for (const auto& ex : examples_) {
        faces.push_back(ex.face_descriptor);
        ids.push_back(ex.example_id);
    }
    face_index_ = KnnIndex(std::move(faces), ids, config_.k, config_.epsilon);
    if (config_.variant == ModelVariant::FaceEyes) {
        std::vector<HogDescriptor> eyes;
        eyes.reserve(examples_.size());
        for (const auto& ex : examples_) {
            if (!ex.eyes_descriptor) {
                throw ParameterError("example " + ex.example_id + " lacks an eyes descriptor");
            }
            eyes.push_back(*ex.eyes_descriptor);
        }
        eyes_index_ = KnnIndex(std::move(eyes), std::move(ids), config_.k, config_.epsilon);
    }
}

Model Model::train(std::vector<TrainingExample> examples, const ModelConfig& config) {
    validate(config);
    if (examples.empty()) {
        throw EmptyInputError("training set is empty");
    }
    std::stable_sort(examples.begin(), examples.end(),
                     [](const TrainingExample& a, const TrainingExample& b) { return a.example_id < b.example_id; });

    std::set<std::pair<std::string, int>> provenance;
    std::set<std::string> lookers;
    for (const auto& ex : examples) {
        provenance.emplace(ex.looker_id, ex.block_id);
        lookers.insert(ex.looker_id);
    }
    if (lookers.size() > 1 && !config.cross_looker) {
        throw ParameterError("training set mixes " + std::to_string(lookers.size()) +
                             " lookers; select one looker or enable cross-looker training");
    }

    Model model;
    model.config_ = config;
    model.provenance_.assign(provenance.begin(), provenance.end());
    model.training_size_ = examples.size();
    if (config.variant == ModelVariant::KinectLinear) {
        std::vector<EulerAngles> poses;
        std::vector<GazeDirection> gazes;
        for (const auto& ex : examples) {
            poses.push_back(ex.head_pose.euler());
            gazes.push_back(ex.gaze);
        }
        model.linear_ = fit_linear_gaze_map(poses, gazes);
        return model;
    }
    model.examples_ = std::move(examples);
    model.build_indexes();
    return model;
}

Model train(std::vector<TrainingExample> examples, const ModelConfig& config) {
    return Model::train(std::move(examples), config);
}

namespace {

void require_variant(const Model& model, ModelVariant a, std::optional<ModelVariant> b = std::nullopt) {
    if (model.variant() != a && (!b || model.variant() != *b)) {
        throw ParameterError("operation not supported by a " + std::string(to_string(model.variant())) + " model");
    }
}

void require_layout(const KnnIndex& index, const HogDescriptor& d, const char* what) {
    if (!(d.layout == index.layout()) || d.values.size() != index.layout().size()) {
        throw LayoutMismatchError(std::string(what) + " descriptor layout does not match the model");
    }
}

HeadPose average_head(const Model& model, const std::vector<Neighbor>& neighbors) {
    std::vector<UnitQuaternion> quats;
    std::vector<double> weights;
    for (const auto& n : neighbors) {
        quats.push_back(model.examples()[n.index].head_pose.orientation);
        weights.push_back(n.weight);
    }
    return {weighted_average(quats, weights)};
}

}  // namespace

GazePrediction predict_face_eyes(const Model& model, const HogDescriptor& face, const HogDescriptor& eyes) {
    require_variant(model, ModelVariant::FaceEyes);
    require_layout(model.face_index(), face, "face");
    require_layout(model.eyes_index(), eyes, "eyes");
    GazePrediction out;
    out.face_neighbors = model.face_index().search(face);
    out.eyes_neighbors = model.eyes_index().search(eyes);
    out.head_estimate = average_head(model, out.face_neighbors);

    std::vector<UnitQuaternion> quats;
    std::vector<double> weights;
    for (const auto& n : out.eyes_neighbors) {
        quats.push_back(model.examples()[n.index].eye_correction.offset);
        weights.push_back(n.weight);
    }
    out.correction_estimate = EyeGazeCorrection{weighted_average(quats, weights)};
    out.direction = compose(*out.head_estimate, *out.correction_estimate);
    return out;
}

GazePrediction eyes_invisible_query(const Model& model, const HogDescriptor& face) {
    require_variant(model, ModelVariant::FaceEyes);
    require_layout(model.face_index(), face, "face");
    GazePrediction out;
    out.face_neighbors = model.face_index().search(face);
    out.head_estimate = average_head(model, out.face_neighbors);
    out.correction_estimate = EyeGazeCorrection{};
    out.direction = compose(*out.head_estimate, *out.correction_estimate);
    return out;
}

GazePrediction predict_face(const Model& model, const HogDescriptor& face) {
    require_variant(model, ModelVariant::Face, ModelVariant::FaceEyes);
    require_layout(model.face_index(), face, "face");
    GazePrediction out;
    out.face_neighbors = model.face_index().search(face);
    Vec3 sum;
    double total = 0.0;
    for (const auto& n : out.face_neighbors) {
        sum = sum + n.weight * model.examples()[n.index].gaze.vector();
        total += n.weight;
    }
    if (!(sum.norm() > 1e-12 * total)) {
        throw PredictionError("neighbor gaze directions cancel out");
    }
    out.direction = GazeDirection::from_vector(sum);
    return out;
}

GazePrediction predict_kinect_linear(const Model& model, const HeadPose& head_pose) {
    require_variant(model, ModelVariant::KinectLinear);
    const EulerAngles e = head_pose.euler();
    const auto apply = [&](const std::array<double, 4>& c) {
        return c[0] * e.yaw_deg + c[1] * e.pitch_deg + c[2] * e.roll_deg + c[3];
    };
    const LinearGazeMap& m = model.linear_map();
    GazePrediction out;
    out.direction = GazeDirection::from_azimuth_elevation(apply(m.azimuth), apply(m.elevation));
    return out;
}

GazePrediction predict_trial(const Model& model, const TrialRecord& trial, Condition condition) {
    const ModelConfig& cfg = model.config();
    switch (model.variant()) {
        case ModelVariant::FaceEyes: {
            const HogDescriptor face = compute_hog(trial.face_patch, cfg.hog);
            if (condition == Condition::EyesInvisible) {
                return eyes_invisible_query(model, face);
            }
            return predict_face_eyes(model, face, compute_hog(trial.eyes_patch, cfg.hog));
        }
        case ModelVariant::Face:
            return predict_face(model, compute_hog(trial.face_patch, cfg.hog));
        case ModelVariant::KinectLinear:
            return predict_kinect_linear(model, trial.annotated_head_pose);
    }
    throw ParameterError("unknown model variant");
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

constexpr std::string_view kModelMagic = "gazelab-model 1";

std::string join_doubles(std::span<const double> values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) {
            out += ' ';
        }
        out += textio::format_double(values[i]);
    }
    return out;
}

std::string quat_text(const UnitQuaternion& q) {
    const std::array<double, 4> c{q.w(), q.x(), q.y(), q.z()};
    return join_doubles(c);
}

std::string descriptor_text(const HogDescriptor& d) {
    const auto& l = d.layout;
    return std::to_string(l.cells_x) + " " + std::to_string(l.cells_y) + " " + std::to_string(l.bins) + " " +
           std::to_string(l.block_size) + " " + join_doubles(d.values);
}

class ModelReader {
public:
    explicit ModelReader(std::string_view text) : lines_(textio::split(text, '\n')) {
        if (!lines_.empty() && lines_.back().empty()) {
            lines_.pop_back();
        }
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw ModelFormatError("model line " + std::to_string(pos_) + ": " + what);
    }

    std::string_view next() {
        if (pos_ >= lines_.size()) {
            ++pos_;
            fail("unexpected end of model");
        }
        return lines_[pos_++];
    }

    bool done() const { return pos_ >= lines_.size(); }

    // "key v1 v2 ..." -> values
    std::vector<std::string_view> keyed(std::string_view key, std::size_t count) {
        auto tokens = textio::split_whitespace(next());
        if (tokens.empty() || tokens[0] != key || tokens.size() != count + 1) {
            fail("expected '" + std::string(key) + "' with " + std::to_string(count) + " values");
        }
        tokens.erase(tokens.begin());
        return tokens;
    }

    double real(std::string_view token) {
        const auto v = textio::parse_double(token);
        if (!v || !std::isfinite(*v)) {
            fail("bad number '" + std::string(token) + "'");
        }
        return *v;
    }

    long long integer(std::string_view token) {
        const auto v = textio::parse_int(token);
        if (!v) {
            fail("bad integer '" + std::string(token) + "'");
        }
        return *v;
    }

    std::vector<double> reals(std::span<const std::string_view> tokens) {
        std::vector<double> out;
        out.reserve(tokens.size());
        for (auto t : tokens) {
            out.push_back(real(t));
        }
        return out;
    }

    UnitQuaternion quat(std::string_view field) {
        const auto tokens = textio::split_whitespace(field);
        if (tokens.size() != 4) {
            fail("quaternion needs 4 values");
        }
        const auto c = reals(tokens);
        try {
            return UnitQuaternion::from_components(c[0], c[1], c[2], c[3]);
        } catch (const Error& e) {
            fail(e.what());
        }
    }

    HogDescriptor descriptor(std::string_view field) {
        const auto tokens = textio::split_whitespace(field);
        if (tokens.size() < 4) {
            fail("descriptor needs a layout");
        }
        HogDescriptor d;
        d.layout = {static_cast<int>(integer(tokens[0])), static_cast<int>(integer(tokens[1])),
                    static_cast<int>(integer(tokens[2])), static_cast<int>(integer(tokens[3]))};
        if (d.layout.cells_x < 1 || d.layout.cells_y < 1 || d.layout.bins < 1 || d.layout.block_size < 1 ||
            d.layout.blocks_x() < 1 || d.layout.blocks_y() < 1 || tokens.size() - 4 != d.layout.size()) {
            fail("descriptor layout does not match its value count");
        }
        d.values = reals(std::span(tokens).subspan(4));
        return d;
    }

private:
    std::vector<std::string_view> lines_;
    std::size_t pos_ = 0;
};

}  // namespace

std::string Model::to_text() const {
    std::ostringstream out;
    const auto& c = config_;
    out << kModelMagic << '\n';
    out << "variant " << to_string(c.variant) << '\n';
    out << "k " << c.k << '\n';
    out << "epsilon " << textio::format_double(c.epsilon) << '\n';
    out << "hog " << c.hog.cell_size << ' ' << c.hog.n_bins << ' ' << c.hog.block_size << ' '
        << textio::format_double(c.hog.clip_threshold) << '\n';
    out << "sizes " << c.sizes.face_width << ' ' << c.sizes.face_height << ' ' << c.sizes.eyes_width << ' '
        << c.sizes.eyes_height << '\n';
    out << "cross_looker " << (c.cross_looker ? 1 : 0) << '\n';
    out << "linear_azimuth " << join_doubles(linear_.azimuth) << '\n';
    out << "linear_elevation " << join_doubles(linear_.elevation) << '\n';
    out << "training_size " << training_size_ << '\n';
    out << "provenance " << provenance_.size() << '\n';
    for (const auto& [looker, block] : provenance_) {
        out << looker << '\t' << block << '\n';
    }
    out << "examples " << examples_.size() << '\n';
    for (const auto& ex : examples_) {
        const Vec3& g = ex.gaze.vector();
        const std::array<double, 3> gv{g.x, g.y, g.z};
        out << ex.example_id << '\t' << ex.looker_id << '\t' << ex.block_id << '\t'
            << quat_text(ex.head_pose.orientation) << '\t' << quat_text(ex.eye_correction.offset) << '\t'
            << join_doubles(gv) << '\t' << descriptor_text(ex.face_descriptor) << '\t'
            << (ex.eyes_descriptor ? descriptor_text(*ex.eyes_descriptor) : std::string("-")) << '\n';
    }
    return out.str();
}

Model Model::from_text(std::string_view text) {
    ModelReader r(text);
    if (r.next() != kModelMagic) {
        r.fail("expected '" + std::string(kModelMagic) + "'");
    }
    Model m;
    ModelConfig& c = m.config_;
    try {
        c.variant = parse_model_variant(r.keyed("variant", 1)[0]);
    } catch (const ParameterError& e) {
        r.fail(e.what());
    }
    c.k = static_cast<int>(r.integer(r.keyed("k", 1)[0]));
    c.epsilon = r.real(r.keyed("epsilon", 1)[0]);
    {
        const auto t = r.keyed("hog", 4);
        c.hog = {static_cast<int>(r.integer(t[0])), static_cast<int>(r.integer(t[1])),
                 static_cast<int>(r.integer(t[2])), r.real(t[3])};
    }
    {
        const auto t = r.keyed("sizes", 4);
        c.sizes = {static_cast<int>(r.integer(t[0])), static_cast<int>(r.integer(t[1])),
                   static_cast<int>(r.integer(t[2])), static_cast<int>(r.integer(t[3]))};
    }
    c.cross_looker = r.integer(r.keyed("cross_looker", 1)[0]) != 0;
    try {
        validate(c);
    } catch (const ParameterError& e) {
        r.fail(e.what());
    }
    {
        const auto az = r.reals(r.keyed("linear_azimuth", 4));
        const auto el = r.reals(r.keyed("linear_elevation", 4));
        std::copy(az.begin(), az.end(), m.linear_.azimuth.begin());
        std::copy(el.begin(), el.end(), m.linear_.elevation.begin());
    }
    m.training_size_ = static_cast<std::size_t>(r.integer(r.keyed("training_size", 1)[0]));
    const auto n_prov = r.integer(r.keyed("provenance", 1)[0]);
    for (long long i = 0; i < n_prov; ++i) {
        const auto f = textio::split(r.next(), '\t');
        if (f.size() != 2) {
            r.fail("provenance entry needs looker and block");
        }
        m.provenance_.emplace_back(std::string(f[0]), static_cast<int>(r.integer(f[1])));
    }
    const auto n_ex = r.integer(r.keyed("examples", 1)[0]);
    for (long long i = 0; i < n_ex; ++i) {
        const auto f = textio::split(r.next(), '\t');
        if (f.size() != 8) {
            r.fail("example needs 8 tab-separated fields");
        }
        TrainingExample ex;
        ex.example_id = std::string(f[0]);
        ex.looker_id = std::string(f[1]);
        ex.block_id = static_cast<int>(r.integer(f[2]));
        ex.head_pose.orientation = r.quat(f[3]);
        ex.eye_correction.offset = r.quat(f[4]);
        const auto g = r.reals(textio::split_whitespace(f[5]));
        if (g.size() != 3) {
            r.fail("gaze needs 3 values");
        }
        try {
            ex.gaze = GazeDirection::from_vector({g[0], g[1], g[2]});
        } catch (const Error& e) {
            r.fail(e.what());
        }
        ex.face_descriptor = r.descriptor(f[6]);
        if (f[7] != "-") {
            ex.eyes_descriptor = r.descriptor(f[7]);
        }
        m.examples_.push_back(std::move(ex));
    }
    if (!r.done()) {
        r.fail("trailing content");
    }
    if (c.variant != ModelVariant::KinectLinear && m.examples_.size() != m.training_size_) {
        r.fail("example count does not match training_size");
    }
    try {
        m.build_indexes();
    } catch (const Error& e) {
        throw ModelFormatError(std::string("inconsistent model: ") + e.what());
    }
    return m;
}

void save_model(const Model& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write model file " + path.string());
    }
    const std::string text = model.to_text();
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) {
        throw IoError("write failed for " + path.string());
    }
}

Model load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw MissingFileError("missing model file " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return Model::from_text(ss.str());
}

}  // namespace gazelab
