#include "gazelab/evalkit.hpp"

#include "gazelab/error.hpp"
#include "gazelab/textio.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <set>
#include <sstream>

namespace gazelab {

namespace {

using Pair = std::pair<const Response*, const Truth*>;

// Matched pairs in trial-id order, so every reduction is order independent.
std::vector<Pair> align(std::span<const Response> responses, std::span<const Truth> truths) {
    if (truths.empty() || responses.empty()) {
        throw EmptyInputError("no trials to score");
    }
    std::map<std::string_view, const Truth*> by_id;
    for (const auto& t : truths) {
        if (!by_id.emplace(t.trial_id, &t).second) {
            throw UnmatchedTrialError("duplicate truth for trial " + t.trial_id);
        }
    }
    std::map<std::string_view, const Response*> seen;
    for (const auto& r : responses) {
        if (!by_id.contains(r.trial_id)) {
            throw UnmatchedTrialError("response for unknown trial " + r.trial_id);
        }
        if (!seen.emplace(r.trial_id, &r).second) {
            throw UnmatchedTrialError("duplicate response for trial " + r.trial_id);
        }
    }
    std::vector<Pair> out;
    out.reserve(by_id.size());
    for (const auto& [id, truth] : by_id) {
        const auto it = seen.find(id);
        if (it == seen.end()) {
            throw UnmatchedTrialError("no response for trial " + std::string(id));
        }
        out.emplace_back(it->second, truth);
    }
    return out;
}

double signed_azimuth_diff(double a, double b) {
    double d = a - b;
    while (d > 180.0) {
        d -= 360.0;
    }
    while (d <= -180.0) {
        d += 360.0;
    }
    return d;
}

std::string fmt_fixed(double v, int decimals) { return textio::format_fixed(v, decimals); }

}  // namespace

Truth truth_of(const TrialRecord& trial) {
    return {trial.trial_id, trial.target, trial.true_gaze(), trial.eye_center};
}

std::vector<Truth> truths_of(std::span<const TrialRecord> trials) {
    std::vector<Truth> out;
    out.reserve(trials.size());
    for (const auto& t : trials) {
        out.push_back(truth_of(t));
    }
    return out;
}

double exact_accuracy(std::span<const Response> responses, std::span<const Truth> truths) {
    const auto pairs = align(responses, truths);
    std::size_t hits = 0;
    for (const auto& [r, t] : pairs) {
        hits += r->predicted_target && *r->predicted_target == t->target;
    }
    return static_cast<double>(hits) / static_cast<double>(pairs.size());
}

double one_off_accuracy(std::span<const Response> responses, std::span<const Truth> truths) {
    const auto pairs = align(responses, truths);
    std::size_t hits = 0;
    for (const auto& [r, t] : pairs) {
        if (r->predicted_target) {
            hits += std::abs(r->predicted_target->row - t->target.row) <= 1 &&
                    std::abs(r->predicted_target->col - t->target.col) <= 1;
        }
    }
    return static_cast<double>(hits) / static_cast<double>(pairs.size());
}

BiasStats bias_stats(std::span<const Response> responses, std::span<const Truth> truths, const SceneLayout& scene,
                     double center_column_sign) {
    if (center_column_sign != 1.0 && center_column_sign != -1.0) {
        throw ParameterError("center column sign must be +1 or -1");
    }
    const auto pairs = align(responses, truths);
    std::vector<double> col_err;
    std::vector<double> row_err;
    for (const auto& [r, t] : pairs) {
        std::optional<GazeDirection> pred = r->predicted_direction;
        if (!pred && r->predicted_target) {
            pred = gaze_to_target(t->eye_center, scene.grid.at(*r->predicted_target));
        }
        if (!pred) {
            continue;
        }
        const double true_az = t->direction.azimuth_deg();
        const double s = t->target.col == TargetGrid::kCenterCol ? center_column_sign : (true_az < 0.0 ? -1.0 : 1.0);
        col_err.push_back(s * signed_azimuth_diff(pred->azimuth_deg(), true_az));
        row_err.push_back(t->direction.elevation_deg() - pred->elevation_deg());
    }
    if (col_err.empty()) {
        throw EmptyInputError("no response carries a direction or target");
    }
    const auto mean_std = [](const std::vector<double>& v) {
        double sum = 0.0;
        for (double x : v) {
            sum += x;
        }
        const double mean = sum / static_cast<double>(v.size());
        double ss = 0.0;
        for (double x : v) {
            ss += (x - mean) * (x - mean);
        }
        return std::pair{mean, std::sqrt(ss / static_cast<double>(v.size()))};
    };
    BiasStats out;
    std::tie(out.col_bias_deg, out.col_std_deg) = mean_std(col_err);
    std::tie(out.row_bias_deg, out.row_std_deg) = mean_std(row_err);
    out.n_trials = col_err.size();
    return out;
}

std::vector<ColumnAccuracy> column_accuracy(std::span<const Response> responses, std::span<const Truth> truths) {
    const auto pairs = align(responses, truths);
    std::map<int, std::array<std::size_t, 3>> counts;  // col -> n, row hits, col hits
    for (const auto& [r, t] : pairs) {
        auto& c = counts[t->target.col];
        ++c[0];
        if (r->predicted_target) {
            c[1] += r->predicted_target->row == t->target.row;
            c[2] += r->predicted_target->col == t->target.col;
        }
    }
    std::vector<ColumnAccuracy> out;
    for (const auto& [col, c] : counts) {
        const double n = static_cast<double>(c[0]);
        out.push_back({col, c[0], static_cast<double>(c[1]) / n, static_cast<double>(c[2]) / n});
    }
    return out;
}

PositionAccuracy position_accuracy(std::span<const Response> responses, std::span<const Truth> truths,
                                   int observer_position) {
    if (observer_position < 1 || observer_position > 4) {
        throw UnknownPositionError("observer position " + std::to_string(observer_position) + " is not in 1..4");
    }
    return {observer_position, column_accuracy(responses, truths)};
}

Response predict_response(const Model& model, const TrialRecord& trial, const SceneLayout& scene,
                          Condition condition) {
    Response r;
    r.trial_id = trial.trial_id;
    try {
        const GazePrediction p = predict_trial(model, trial, condition);
        r.predicted_direction = p.direction;
        if (const auto target = snap_to_target(p.direction, trial.eye_center, scene.grid)) {
            r.predicted_target = target->id;
        }
        for (const auto& n : p.face_neighbors) {
            r.face_neighbors.emplace_back(model.examples()[n.index].example_id, n.weight);
        }
        for (const auto& n : p.eyes_neighbors) {
            r.eyes_neighbors.emplace_back(model.examples()[n.index].example_id, n.weight);
        }
    } catch (const Error& e) {
        r = Response{};
        r.trial_id = trial.trial_id;
        r.error = e.error_class();
    }
    return r;
}

std::vector<Response> predict_dataset(const Model& model, std::span<const TrialRecord> trials,
                                      const SceneLayout& scene, Condition condition) {
    std::vector<Response> out;
    out.reserve(trials.size());
    for (const auto& t : trials) {
        out.push_back(predict_response(model, t, scene, condition));
    }
    return out;
}

EvalReport evaluate_responses(std::span<const Response> responses, std::span<const TrialRecord> trials,
                              const SceneLayout& scene, Condition condition, const std::string& model_name,
                              const EvalOptions& options) {
    if (trials.empty()) {
        throw EmptyInputError("empty test set");
    }
    std::map<std::string, std::vector<Truth>> truths;
    std::map<std::string_view, std::string_view> looker_of;
    for (const auto& t : trials) {
        truths[t.looker_id].push_back(truth_of(t));
        looker_of[t.trial_id] = t.looker_id;
    }
    std::map<std::string, std::vector<Response>> grouped;
    for (const auto& r : responses) {
        const auto it = looker_of.find(r.trial_id);
        if (it == looker_of.end()) {
            throw UnmatchedTrialError("response for unknown trial " + r.trial_id);
        }
        grouped[std::string(it->second)].push_back(r);
    }

    EvalReport report;
    for (const auto& [looker, group_truths] : truths) {
        const auto& group = grouped[looker];
        EvalEntry e;
        e.looker_id = looker;
        e.condition = condition;
        e.model = model_name;
        e.n_trials = group_truths.size();
        e.n_invalid = static_cast<std::size_t>(
            std::count_if(group.begin(), group.end(), [](const Response& r) { return !r.predicted_target; }));
        e.exact_accuracy = exact_accuracy(group, group_truths);
        e.one_off_accuracy = one_off_accuracy(group, group_truths);
        try {
            e.bias = bias_stats(group, group_truths, scene, options.center_column_sign);
        } catch (const EmptyInputError&) {
            e.bias = BiasStats{std::nan(""), std::nan(""), std::nan(""), std::nan(""), 0};
        }
        e.columns = column_accuracy(group, group_truths);
        report.entries.push_back(std::move(e));
    }
    if (!options.observer_positions.empty()) {
        const auto all_truths = truths_of(trials);
        for (int pos : options.observer_positions) {
            report.positions.push_back(position_accuracy(responses, all_truths, pos));
        }
    }
    return report;
}

void check_disjoint(const Model& model, std::span<const TrialRecord> trials) {
    const std::set<std::pair<std::string, int>> used(model.provenance().begin(), model.provenance().end());
    for (const auto& t : trials) {
        if (used.contains({t.looker_id, t.block_id})) {
            throw ValidationError("test trial " + t.trial_id + " comes from training block " +
                                  std::to_string(t.block_id) + " of looker " + t.looker_id);
        }
    }
}

std::vector<std::string> unseen_lookers(const Model& model, std::span<const TrialRecord> trials) {
    std::set<std::string> trained;
    for (const auto& [looker, block] : model.provenance()) {
        trained.insert(looker);
    }
    std::set<std::string> out;
    for (const auto& t : trials) {
        if (!trained.contains(t.looker_id)) {
            out.insert(t.looker_id);
        }
    }
    return {out.begin(), out.end()};
}

EvalReport run_evaluation(const Model& model, const Dataset& test, Condition condition, const EvalOptions& options) {
    if (test.trials.empty()) {
        throw EmptyInputError("empty test set");
    }
    if (options.require_disjoint) {
        check_disjoint(model, test.trials);
    }
    const auto responses = predict_dataset(model, test.trials, test.scene, condition);
    return evaluate_responses(responses, test.trials, test.scene, condition, std::string(to_string(model.variant())),
                              options);
}

std::string report_to_text(const EvalReport& report) {
    std::ostringstream out;
    out << "Accuracy\n";
    out << "model\tlooker\tcondition\tn\tinvalid\texact\tone_off\n";
    for (const auto& e : report.entries) {
        out << e.model << '\t' << e.looker_id << '\t' << to_string(e.condition) << '\t' << e.n_trials << '\t'
            << e.n_invalid << '\t' << fmt_fixed(e.exact_accuracy, 4) << '\t' << fmt_fixed(e.one_off_accuracy, 4)
            << '\n';
    }
    out << "\nBias and standard deviation (degrees)\n";
    out << "model\tlooker\tcondition\tcolBias\tcolStd\trowBias\trowStd\tn\n";
    for (const auto& e : report.entries) {
        const auto& b = e.bias;
        out << e.model << '\t' << e.looker_id << '\t' << to_string(e.condition) << '\t'
            << fmt_fixed(b.col_bias_deg, 2) << '\t' << fmt_fixed(b.col_std_deg, 2) << '\t'
            << fmt_fixed(b.row_bias_deg, 2) << '\t' << fmt_fixed(b.row_std_deg, 2) << '\t' << b.n_trials << '\n';
    }
    out << "\nAccuracy by target column\n";
    out << "model\tlooker\tcondition\tcol\tn\trow_acc\tcol_acc\n";
    for (const auto& e : report.entries) {
        for (const auto& c : e.columns) {
            out << e.model << '\t' << e.looker_id << '\t' << to_string(e.condition) << '\t' << c.col << '\t'
                << c.n_trials << '\t' << fmt_fixed(c.row_accuracy, 4) << '\t' << fmt_fixed(c.col_accuracy, 4)
                << '\n';
        }
    }
    if (!report.positions.empty()) {
        out << "\nAccuracy by observer position\n";
        out << "position\tcol\tn\trow_acc\tcol_acc\n";
        for (const auto& p : report.positions) {
            for (const auto& c : p.columns) {
                out << p.position << '\t' << c.col << '\t' << c.n_trials << '\t' << fmt_fixed(c.row_accuracy, 4)
                    << '\t' << fmt_fixed(c.col_accuracy, 4) << '\n';
            }
        }
    }
    return out.str();
}

namespace {

nlohmann::json columns_json(const std::vector<ColumnAccuracy>& columns) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& c : columns) {
        out.push_back({{"col", c.col}, {"n", c.n_trials}, {"row_accuracy", c.row_accuracy},
                       {"col_accuracy", c.col_accuracy}});
    }
    return out;
}

nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

std::string report_to_json(const EvalReport& report) {
    nlohmann::json out;
    out["format"] = "gazelab-report";
    out["version"] = 1;
    out["entries"] = nlohmann::json::array();
    for (const auto& e : report.entries) {
        out["entries"].push_back({
            {"model", e.model},
            {"looker", e.looker_id},
            {"condition", std::string(to_string(e.condition))},
            {"n_trials", e.n_trials},
            {"n_invalid", e.n_invalid},
            {"exact_accuracy", e.exact_accuracy},
            {"one_off_accuracy", e.one_off_accuracy},
            {"bias",
             {{"colBias", number_or_null(e.bias.col_bias_deg)},
              {"colStd", number_or_null(e.bias.col_std_deg)},
              {"rowBias", number_or_null(e.bias.row_bias_deg)},
              {"rowStd", number_or_null(e.bias.row_std_deg)},
              {"n", e.bias.n_trials}}},
            {"columns", columns_json(e.columns)},
        });
    }
    out["positions"] = nlohmann::json::array();
    for (const auto& p : report.positions) {
        out["positions"].push_back({{"position", p.position}, {"columns", columns_json(p.columns)}});
    }
    return out.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Predictions file

namespace {

constexpr std::string_view kPredictionsMagic = "#gazelab-predictions\t1";
constexpr std::string_view kPredictionFields =
    "#fields\ttrial_id\tstatus\tazimuth_deg\televation_deg\tdir_x\tdir_y\tdir_z\trow\tcol\tface_neighbors\t"
    "eyes_neighbors";

std::string neighbors_text(const std::vector<std::pair<std::string, double>>& neighbors) {
    if (neighbors.empty()) {
        return "-";
    }
    std::string out;
    for (std::size_t i = 0; i < neighbors.size(); ++i) {
        if (i) {
            out += ',';
        }
        out += neighbors[i].first + ":" + textio::format_double(neighbors[i].second);
    }
    return out;
}

}  // namespace

std::string predictions_to_text(const PredictionsFile& file) {
    std::string out;
    out += std::string(kPredictionsMagic) + "\n";
    out += "#model\t" + file.model + "\n";
    out += "#condition\t" + std::string(to_string(file.condition)) + "\n";
    out += std::string(kPredictionFields) + "\n";
    for (const auto& r : file.responses) {
        out += r.trial_id + "\t" + (r.valid() ? std::string("ok") : "invalid:" + r.error);
        if (r.predicted_direction) {
            const auto& d = *r.predicted_direction;
            out += "\t" + textio::format_fixed(d.azimuth_deg(), 4) + "\t" + textio::format_fixed(d.elevation_deg(), 4);
            out += "\t" + textio::format_double(d.vector().x) + "\t" + textio::format_double(d.vector().y) + "\t" +
                   textio::format_double(d.vector().z);
        } else {
            out += "\t-\t-\t-\t-\t-";
        }
        if (r.predicted_target) {
            out += "\t" + std::to_string(r.predicted_target->row) + "\t" + std::to_string(r.predicted_target->col);
        } else {
            out += "\t-\t-";
        }
        out += "\t" + neighbors_text(r.face_neighbors) + "\t" + neighbors_text(r.eyes_neighbors) + "\n";
    }
    return out;
}

PredictionsFile predictions_from_text(std::string_view text) {
    auto lines = textio::split(text, '\n');
    if (!lines.empty() && lines.back().empty()) {
        lines.pop_back();
    }
    const auto fail = [](std::size_t line, const std::string& what) {
        return MalformedRecordError("predictions line " + std::to_string(line) + ": " + what);
    };
    if (lines.empty() || !lines[0].starts_with("#gazelab-predictions\t")) {
        throw fail(1, "expected '#gazelab-predictions<TAB>1'");
    }
    if (lines[0] != kPredictionsMagic) {
        throw SchemaVersionError("unsupported predictions version: " + std::string(lines[0]));
    }
    if (lines.size() < 4 || !lines[1].starts_with("#model\t") || !lines[2].starts_with("#condition\t") ||
        lines[3] != kPredictionFields) {
        throw fail(2, "bad predictions header");
    }
    PredictionsFile file;
    file.model = std::string(lines[1].substr(7));
    try {
        file.condition = parse_condition(lines[2].substr(11));
    } catch (const ParameterError& e) {
        throw fail(3, e.what());
    }
    const auto parse_neighbors = [&](std::string_view field, std::size_t lineno) {
        std::vector<std::pair<std::string, double>> out;
        if (field == "-") {
            return out;
        }
        for (auto item : textio::split(field, ',')) {
            const auto colon = item.rfind(':');
            const auto w = colon == std::string_view::npos ? std::nullopt : textio::parse_double(item.substr(colon + 1));
            if (!w) {
                throw fail(lineno, "bad neighbor entry '" + std::string(item) + "'");
            }
            out.emplace_back(std::string(item.substr(0, colon)), *w);
        }
        return out;
    };
    for (std::size_t li = 4; li < lines.size(); ++li) {
        const std::size_t lineno = li + 1;
        const auto f = textio::split(lines[li], '\t');
        if (f.size() != 11) {
            throw fail(lineno, "expected 11 fields");
        }
        Response r;
        r.trial_id = std::string(f[0]);
        if (f[1] != "ok") {
            if (!f[1].starts_with("invalid:") || f[1].size() == 8) {
                throw fail(lineno, "bad status '" + std::string(f[1]) + "'");
            }
            r.error = std::string(f[1].substr(8));
        }
        if (f[4] != "-") {
            const auto x = textio::parse_double(f[4]);
            const auto y = textio::parse_double(f[5]);
            const auto z = textio::parse_double(f[6]);
            if (!x || !y || !z) {
                throw fail(lineno, "bad direction");
            }
            try {
                r.predicted_direction = GazeDirection::from_vector({*x, *y, *z});
            } catch (const Error&) {
                throw fail(lineno, "degenerate direction");
            }
        }
        if (f[7] != "-") {
            const auto row = textio::parse_int(f[7]);
            const auto col = textio::parse_int(f[8]);
            if (!row || !col || !TargetGrid::contains({static_cast<int>(*row), static_cast<int>(*col)})) {
                throw fail(lineno, "bad target");
            }
            r.predicted_target = TargetId{static_cast<int>(*row), static_cast<int>(*col)};
        }
        r.face_neighbors = parse_neighbors(f[9], lineno);
        r.eyes_neighbors = parse_neighbors(f[10], lineno);
        file.responses.push_back(std::move(r));
    }
    return file;
}

}  // namespace gazelab
