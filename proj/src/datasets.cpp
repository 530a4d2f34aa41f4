#include "gazelab/datasets.hpp"

#include "gazelab/error.hpp"
#include "gazelab/textio.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace gazelab {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kManifestMagic = "#gazelab-manifest";
constexpr std::string_view kFieldHeader =
    "#fields\ttrial_id\tlooker_id\tblock_id\tcondition\ttarget_row\ttarget_col\tface_patch\teyes_patch\t"
    "head_qw\thead_qx\thead_qy\thead_qz\teye_x_cm\teye_y_cm\teye_z_cm\ttarget_x_cm\ttarget_y_cm\ttarget_z_cm";
constexpr std::size_t kFieldCount = 18;

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw MissingFileError("cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, std::string_view bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw IoError("write failed for " + path.string());
    }
}

std::vector<std::string_view> lines_of(std::string_view text) {
    std::vector<std::string_view> lines = textio::split(text, '\n');
    if (!lines.empty() && lines.back().empty()) {
        lines.pop_back();
    }
    for (auto& line : lines) {
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
    }
    return lines;
}

std::string face_rel_path(const std::string& trial_id) { return "patches/" + trial_id + ".face.pgm"; }
std::string eyes_rel_path(const std::string& trial_id) { return "patches/" + trial_id + ".eyes.pgm"; }

void append_vec(std::string& out, const Vec3& v, char sep) {
    out += textio::format_double(v.x);
    out += sep;
    out += textio::format_double(v.y);
    out += sep;
    out += textio::format_double(v.z);
}

}  // namespace

std::string_view to_string(Condition condition) {
    return condition == Condition::EyesVisible ? "eyes-visible" : "eyes-invisible";
}

Condition parse_condition(std::string_view text) {
    if (text == "eyes-visible" || text == "visible") {
        return Condition::EyesVisible;
    }
    if (text == "eyes-invisible" || text == "invisible") {
        return Condition::EyesInvisible;
    }
    throw ParameterError("unknown condition '" + std::string(text) + "'");
}

bool valid_trial_id(std::string_view id) {
    if (id.empty() || id.front() == '.') {
        return false;
    }
    return std::all_of(id.begin(), id.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' || c == '-';
    });
}

GrayPatch quantize_8bit(const GrayPatch& patch) {
    std::vector<double> px(patch.pixels().size());
    std::transform(patch.pixels().begin(), patch.pixels().end(), px.begin(),
                   [](double v) { return static_cast<double>(std::lround(v * 255.0)) / 255.0; });
    return GrayPatch(patch.width(), patch.height(), std::move(px));
}

void write_pgm(const GrayPatch& patch, const fs::path& path) {
    std::string bytes = "P5\n" + std::to_string(patch.width()) + " " + std::to_string(patch.height()) + "\n255\n";
    bytes.reserve(bytes.size() + patch.pixels().size());
    for (double v : patch.pixels()) {
        bytes.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0))));
    }
    write_file(path, bytes);
}

GrayPatch read_pnm(const fs::path& path) {
    if (!fs::exists(path)) {
        throw MissingFileError("missing raster file " + path.string());
    }
    const std::string bytes = read_file(path);
    std::size_t pos = 0;
    const auto next_token = [&]() -> std::string {
        while (pos < bytes.size()) {
            if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') {
                    ++pos;
                }
            } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
                ++pos;
            } else {
                break;
            }
        }
        const std::size_t start = pos;
        while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
            ++pos;
        }
        return bytes.substr(start, pos - start);
    };
    const std::string magic = next_token();
    if (magic != "P5" && magic != "P6") {
        throw IoError(path.string() + ": not a binary PGM/PPM file");
    }
    const auto width = textio::parse_int(next_token());
    const auto height = textio::parse_int(next_token());
    const auto maxval = textio::parse_int(next_token());
    if (!width || !height || !maxval || *width < 1 || *height < 1 || *maxval < 1 || *maxval > 255) {
        throw IoError(path.string() + ": bad raster header");
    }
    ++pos;  // single whitespace byte before the raster
    const std::size_t channels = magic == "P6" ? 3 : 1;
    const std::size_t count = static_cast<std::size_t>(*width) * static_cast<std::size_t>(*height);
    if (bytes.size() < pos || bytes.size() - pos != count * channels) {
        throw IoError(path.string() + ": raster size does not match header");
    }
    const double scale = static_cast<double>(*maxval);
    std::vector<double> px(count);
    for (std::size_t i = 0; i < count; ++i) {
        const auto sample = [&](std::size_t c) {
            return static_cast<double>(static_cast<unsigned char>(bytes[pos + i * channels + c]));
        };
        double v = channels == 1 ? sample(0) : 0.299 * sample(0) + 0.587 * sample(1) + 0.114 * sample(2);
        px[i] = std::min(v / scale, 1.0);
    }
    return GrayPatch(static_cast<int>(*width), static_cast<int>(*height), std::move(px));
}

std::string scene_to_text(const SceneLayout& scene) {
    std::string out = "gazelab-scene 1\n";
    out += "eye_height_cm " + textio::format_double(scene.grid.eye_height_cm()) + "\n";
    out += "column_step_deg " + textio::format_double(scene.grid.column_step_deg()) + "\n";
    out += "radii_cm";
    for (double r : scene.grid.radii_cm()) {
        out += " " + textio::format_double(r);
    }
    out += "\nlooker_eye_center_cm ";
    append_vec(out, scene.looker_eye_center, ' ');
    out += "\n";
    for (std::size_t i = 0; i < scene.observer_positions.size(); ++i) {
        out += "observer_" + std::to_string(i + 1) + "_cm ";
        append_vec(out, scene.observer_positions[i], ' ');
        out += "\n";
    }
    return out;
}

SceneLayout scene_from_text(std::string_view text) {
    const auto lines = lines_of(text);
    const auto fail = [](std::size_t line, const std::string& what) -> MalformedRecordError {
        return MalformedRecordError("scene line " + std::to_string(line) + ": " + what);
    };
    if (lines.empty() || lines[0] != "gazelab-scene 1") {
        throw fail(1, "expected 'gazelab-scene 1'");
    }
    const std::vector<std::string> keys = {"eye_height_cm", "column_step_deg", "radii_cm", "looker_eye_center_cm",
                                           "observer_1_cm", "observer_2_cm",   "observer_3_cm", "observer_4_cm"};
    const std::vector<std::size_t> arity = {1, 1, 4, 3, 3, 3, 3, 3};
    if (lines.size() != keys.size() + 1) {
        throw fail(lines.size(), "expected " + std::to_string(keys.size() + 1) + " lines");
    }
    std::vector<std::vector<double>> values;
    for (std::size_t i = 0; i < keys.size(); ++i) {
        const auto tokens = textio::split_whitespace(lines[i + 1]);
        if (tokens.empty() || tokens[0] != keys[i] || tokens.size() != arity[i] + 1) {
            throw fail(i + 2, "expected '" + keys[i] + "' with " + std::to_string(arity[i]) + " values");
        }
        std::vector<double> row;
        for (std::size_t t = 1; t < tokens.size(); ++t) {
            const auto v = textio::parse_double(tokens[t]);
            if (!v || !std::isfinite(*v)) {
                throw fail(i + 2, "bad number '" + std::string(tokens[t]) + "'");
            }
            row.push_back(*v);
        }
        values.push_back(std::move(row));
    }
    SceneLayout scene;
    try {
        scene.grid = TargetGrid({values[2][0], values[2][1], values[2][2], values[2][3]}, values[0][0], values[1][0]);
    } catch (const ParameterError& e) {
        throw fail(2, e.what());
    }
    scene.looker_eye_center = {values[3][0], values[3][1], values[3][2]};
    for (std::size_t i = 0; i < 4; ++i) {
        scene.observer_positions[i] = {values[4 + i][0], values[4 + i][1], values[4 + i][2]};
    }
    return scene;
}

void write_manifest(const Dataset& dataset, const fs::path& dir) {
    std::set<std::string> seen;
    for (const auto& t : dataset.trials) {
        if (!valid_trial_id(t.trial_id) || !seen.insert(t.trial_id).second) {
            throw ValidationError("trial id '" + t.trial_id + "' is invalid or duplicated");
        }
        if (!valid_trial_id(t.looker_id)) {
            throw ValidationError("trial " + t.trial_id + ": invalid looker id '" + t.looker_id + "'");
        }
    }
    std::error_code ec;
    fs::create_directories(dir / "patches", ec);
    if (ec) {
        throw IoError("cannot create " + (dir / "patches").string() + ": " + ec.message());
    }

    std::string out;
    out += std::string(kManifestMagic) + "\t" + std::to_string(kManifestVersion) + "\n";
    out += "#scene\t" + std::string(kSceneFileName) + "\n";
    out += std::string(kFieldHeader) + "\n";
    for (const auto& t : dataset.trials) {
        const UnitQuaternion& q = t.annotated_head_pose.orientation;
        out += t.trial_id + "\t" + t.looker_id + "\t" + std::to_string(t.block_id) + "\t" +
               std::string(to_string(t.condition)) + "\t" + std::to_string(t.target.row) + "\t" +
               std::to_string(t.target.col) + "\t" + face_rel_path(t.trial_id) + "\t" + eyes_rel_path(t.trial_id);
        for (double c : {q.w(), q.x(), q.y(), q.z()}) {
            out += "\t" + textio::format_double(c);
        }
        out += "\t";
        append_vec(out, t.eye_center, '\t');
        out += "\t";
        append_vec(out, t.target_position, '\t');
        out += "\n";
        write_pgm(t.face_patch, dir / face_rel_path(t.trial_id));
        write_pgm(t.eyes_patch, dir / eyes_rel_path(t.trial_id));
    }
    write_file(dir / kSceneFileName, scene_to_text(dataset.scene));
    write_file(dir / kManifestFileName, out);
}

Dataset read_manifest(const fs::path& path) {
    const fs::path manifest = fs::is_directory(path) ? path / kManifestFileName : path;
    if (!fs::exists(manifest)) {
        throw MissingFileError("missing manifest " + manifest.string());
    }
    const fs::path root = manifest.parent_path();
    const std::string text = read_file(manifest);
    const auto lines = lines_of(text);

    const auto malformed = [&](std::size_t line, const std::string& what) {
        return MalformedRecordError(manifest.string() + " line " + std::to_string(line) + ": " + what);
    };
    if (lines.empty()) {
        throw malformed(1, "empty manifest");
    }
    const auto magic = textio::split(lines[0], '\t');
    if (magic.size() != 2 || magic[0] != kManifestMagic) {
        throw malformed(1, "expected '#gazelab-manifest<TAB>version'");
    }
    if (magic[1] != std::to_string(kManifestVersion)) {
        throw SchemaVersionError(manifest.string() + ": unsupported schema version '" + std::string(magic[1]) + "'");
    }
    if (lines.size() < 3) {
        throw malformed(lines.size() + 1, "truncated header");
    }
    const auto scene_line = textio::split(lines[1], '\t');
    if (scene_line.size() != 2 || scene_line[0] != "#scene" || scene_line[1].empty()) {
        throw malformed(2, "expected '#scene<TAB>file'");
    }
    if (lines[2] != kFieldHeader) {
        throw malformed(3, "field header does not match schema version 1");
    }

    Dataset dataset;
    const fs::path scene_path = root / std::string(scene_line[1]);
    if (!fs::exists(scene_path)) {
        throw MissingFileError("missing scene file " + scene_path.string());
    }
    dataset.scene = scene_from_text(read_file(scene_path));

    std::set<std::string, std::less<>> ids;
    for (std::size_t li = 3; li < lines.size(); ++li) {
        const std::size_t lineno = li + 1;
        const auto f = textio::split(lines[li], '\t');
        if (f.size() != kFieldCount) {
            throw malformed(lineno, "expected " + std::to_string(kFieldCount) + " fields, got " +
                                        std::to_string(f.size()));
        }
        TrialRecord t;
        t.trial_id = std::string(f[0]);
        if (!valid_trial_id(t.trial_id)) {
            throw ValidationError("line " + std::to_string(lineno) + ": invalid trial id '" + t.trial_id + "'");
        }
        if (!ids.insert(t.trial_id).second) {
            throw ValidationError("line " + std::to_string(lineno) + ": duplicate trial id '" + t.trial_id + "'");
        }
        const std::string where = "trial " + t.trial_id + " (line " + std::to_string(lineno) + ")";
        t.looker_id = std::string(f[1]);
        if (!valid_trial_id(t.looker_id)) {
            throw ValidationError(where + ": invalid looker id '" + t.looker_id + "'");
        }
        const auto int_field = [&](std::size_t i, const char* name) {
            const auto v = textio::parse_int(f[i]);
            if (!v || *v < std::numeric_limits<int>::min() || *v > std::numeric_limits<int>::max()) {
                throw malformed(lineno, std::string("bad integer for ") + name + ": '" + std::string(f[i]) + "'");
            }
            return static_cast<int>(*v);
        };
        const auto real_field = [&](std::size_t i, const char* name) {
            const auto v = textio::parse_double(f[i]);
            if (!v) {
                throw malformed(lineno, std::string("bad number for ") + name + ": '" + std::string(f[i]) + "'");
            }
            if (!std::isfinite(*v)) {
                throw ValidationError(where + ": non-finite " + name);
            }
            return *v;
        };
        t.block_id = int_field(2, "block_id");
        if (t.block_id < 0) {
            throw ValidationError(where + ": negative block id");
        }
        try {
            t.condition = parse_condition(f[3]);
        } catch (const ParameterError&) {
            throw ValidationError(where + ": unknown condition '" + std::string(f[3]) + "'");
        }
        t.target = {int_field(4, "target_row"), int_field(5, "target_col")};
        if (!TargetGrid::contains(t.target)) {
            throw ValidationError(where + ": target (" + std::to_string(t.target.row) + ", " +
                                  std::to_string(t.target.col) + ") outside the grid");
        }
        const double qw = real_field(8, "head_qw");
        const double qx = real_field(9, "head_qx");
        const double qy = real_field(10, "head_qy");
        const double qz = real_field(11, "head_qz");
        const double qn = std::sqrt(qw * qw + qx * qx + qy * qy + qz * qz);
        if (!(std::abs(qn - 1.0) <= 1e-6)) {
            throw NonUnitQuaternionError(where + ": head quaternion norm " + textio::format_double(qn) +
                                         " is not 1");
        }
        t.annotated_head_pose.orientation = UnitQuaternion::from_components(qw, qx, qy, qz);
        t.eye_center = {real_field(12, "eye_x_cm"), real_field(13, "eye_y_cm"), real_field(14, "eye_z_cm")};
        t.target_position = {real_field(15, "target_x_cm"), real_field(16, "target_y_cm"),
                             real_field(17, "target_z_cm")};
        if (!((t.target_position - t.eye_center).norm() > 0.0)) {
            throw ValidationError(where + ": eye center coincides with the target position");
        }
        for (std::size_t i : {std::size_t{6}, std::size_t{7}}) {
            if (f[i].empty()) {
                throw malformed(lineno, "empty patch path");
            }
            const fs::path patch_path = root / std::string(f[i]);
            if (!fs::exists(patch_path)) {
                throw MissingFileError(where + ": missing patch file " + patch_path.string());
            }
            (i == 6 ? t.face_patch : t.eyes_patch) = read_pnm(patch_path);
        }
        dataset.trials.push_back(std::move(t));
    }
    return dataset;
}

}  // namespace gazelab
