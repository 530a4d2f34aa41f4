#include "doctest.h"

#include "gazelab/error.hpp"
#include "gazelab/evalkit.hpp"
#include "gazelab/synthlab.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

#include "json.hpp"

#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

using namespace gazelab;

namespace {

using namespace fixture;

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

TEST_CASE("accuracy on the 10-trial fixture") {
    std::vector<Response> rs;
    std::vector<Truth> ts;
    accuracy_fixture(rs, ts);
    CHECK(exact_accuracy(rs, ts) == kAccuracyExact);
    CHECK(one_off_accuracy(rs, ts) == kAccuracyOneOff);

    const auto cols = column_accuracy(rs, ts);
    const auto& expect = kAccuracyColumns;
    REQUIRE(cols.size() == expect.size());
    for (const auto& c : cols) {
        const auto& [n, ra, ca] = expect.at(c.col);
        CHECK(c.n_trials == n);
        CHECK(c.row_accuracy == doctest::Approx(ra));
        CHECK(c.col_accuracy == doctest::Approx(ca));
    }
}

TEST_CASE("accuracy basics") {
    std::vector<Truth> ts{truth("a", 1, 1), truth("b", 2, 5), truth("c", 3, 7), truth("d", 4, 12)};
    std::vector<Response> rs;
    for (const auto& t : ts) rs.push_back(discrete(t.trial_id, t.target));
    CHECK(exact_accuracy(rs, ts) == 1.0);
    CHECK(one_off_accuracy(rs, ts) == 1.0);
    rs[2].predicted_target = TargetId{3, 8};
    CHECK(exact_accuracy(rs, ts) == 0.75);
    CHECK(one_off_accuracy(rs, ts) == 1.0);
    rs[2].predicted_target = TargetId{1, 7};
    CHECK(one_off_accuracy(rs, ts) == 0.75);
}

TEST_CASE("bias on the 6-trial sign fixture") {
    std::vector<Truth> ts;
    std::vector<Response> rs;
    bias_fixture(rs, ts);
    std::vector<double> ec, er, ec_neg;
    for (const auto& c : kBias) {
        ec.push_back(c.e_c);
        er.push_back(c.e_r);
        ec_neg.push_back(c.col == 7 ? -c.e_c : c.e_c);
    }
    const auto [cb, cs] = mean_pstd(ec);
    const auto [rb, rsd] = mean_pstd(er);
    const BiasStats s = bias_stats(rs, ts, scene());
    CHECK(s.n_trials == 6);
    CHECK(s.col_bias_deg == doctest::Approx(cb).epsilon(1e-9));
    CHECK(s.col_std_deg == doctest::Approx(cs).epsilon(1e-9));
    CHECK(s.row_bias_deg == doctest::Approx(rb).epsilon(1e-9));
    CHECK(s.row_std_deg == doctest::Approx(rsd).epsilon(1e-9));
    CHECK(cb == doctest::Approx(-0.5 / 6));

    const BiasStats n = bias_stats(rs, ts, scene(), -1.0);
    CHECK(n.col_bias_deg == doctest::Approx(mean_pstd(ec_neg).first).epsilon(1e-9));
    CHECK(n.row_bias_deg == s.row_bias_deg);
    CHECK_THROWS_AS(bias_stats(rs, ts, scene(), 0.5), ParameterError);
}

TEST_CASE("bias of perfect and constant-offset responses") {
    std::vector<Truth> ts;
    std::vector<Response> perfect, low;
    for (const auto& t : scene().grid.targets()) {
        ts.push_back(truth("P" + std::to_string(ts.size()), t.row(), t.col()));
        perfect.push_back(shifted(ts.back(), 0, 0));
        low.push_back(shifted(ts.back(), 0, -2.0));
    }
    const BiasStats p = bias_stats(perfect, ts, scene());
    CHECK(std::abs(p.col_bias_deg) < 1e-9);
    CHECK(std::abs(p.row_bias_deg) < 1e-9);
    CHECK(p.col_std_deg < 1e-9);
    CHECK(p.row_std_deg < 1e-9);
    const BiasStats l = bias_stats(low, ts, scene());
    CHECK(l.row_bias_deg == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(l.row_std_deg < 1e-9);
    CHECK(std::abs(l.col_bias_deg) < 1e-9);
    CHECK(l.col_std_deg < 1e-9);

    // Discrete responses are scored through their target's direction.
    std::vector<Response> d;
    for (const auto& t : ts) d.push_back(discrete(t.trial_id, t.target));
    const BiasStats z = bias_stats(d, ts, scene());
    CHECK(std::abs(z.col_bias_deg) < 1e-9);
    CHECK(z.row_std_deg < 1e-9);
}

TEST_CASE("responses without an answer are skipped in bias") {
    std::vector<Truth> ts{truth("a", 1, 1), truth("b", 2, 2)};
    std::vector<Response> rs{shifted(ts[0], 0, -1.0), discrete("b", std::nullopt)};
    rs[1].error = "prediction";
    const BiasStats s = bias_stats(rs, ts, scene());
    CHECK(s.n_trials == 1);
    CHECK(s.row_bias_deg == doctest::Approx(1.0));
    rs[0] = discrete("a", std::nullopt);
    CHECK_THROWS_AS(bias_stats(rs, ts, scene()), EmptyInputError);
    CHECK(exact_accuracy(rs, ts) == 0.0);
}

TEST_CASE("mirroring the scene leaves the statistics unchanged off the center column") {
    std::mt19937_64 rng(51);
    std::uniform_real_distribution<double> off(-4.0, 4.0);
    std::vector<Truth> ts, mts;
    std::vector<Response> rs, mrs;
    for (const auto& t : scene().grid.targets()) {
        if (t.col() == 7) continue;
        const std::string id = "M" + std::to_string(ts.size());
        ts.push_back(truth(id, t.row(), t.col()));
        mts.push_back(truth(id, t.row(), 14 - t.col()));
        const double da = off(rng), de = off(rng);
        rs.push_back(shifted(ts.back(), da, de));
        mrs.push_back(shifted(mts.back(), -da, de));
    }
    const BiasStats a = bias_stats(rs, ts, scene());
    const BiasStats b = bias_stats(mrs, mts, scene());
    CHECK(a.col_bias_deg == doctest::Approx(b.col_bias_deg).epsilon(1e-9));
    CHECK(a.col_std_deg == doctest::Approx(b.col_std_deg).epsilon(1e-9));
    CHECK(a.row_bias_deg == doctest::Approx(b.row_bias_deg).epsilon(1e-9));
    CHECK(a.row_std_deg == doctest::Approx(b.row_std_deg).epsilon(1e-9));
    CHECK(exact_accuracy(rs, ts) == exact_accuracy(mrs, mts));
    CHECK(one_off_accuracy(rs, ts) == one_off_accuracy(mrs, mts));
}

TEST_CASE("statistics do not depend on trial order") {
    std::mt19937_64 rng(52);
    std::uniform_real_distribution<double> off(-6.0, 6.0);
    std::vector<Truth> ts;
    std::vector<Response> rs;
    for (int rep = 0; rep < 3; ++rep)
        for (const auto& t : scene().grid.targets()) {
            ts.push_back(truth("O" + std::to_string(ts.size()), t.row(), t.col()));
            rs.push_back(shifted(ts.back(), off(rng), off(rng)));
        }
    const BiasStats a = bias_stats(rs, ts, scene());
    const double ea = exact_accuracy(rs, ts), oa = one_off_accuracy(rs, ts);
    for (int i = 0; i < 5; ++i) {
        std::shuffle(rs.begin(), rs.end(), rng);
        std::shuffle(ts.begin(), ts.end(), rng);
        const BiasStats b = bias_stats(rs, ts, scene());
        CHECK(a.col_bias_deg == b.col_bias_deg);
        CHECK(a.col_std_deg == b.col_std_deg);
        CHECK(a.row_bias_deg == b.row_bias_deg);
        CHECK(a.row_std_deg == b.row_std_deg);
        CHECK(ea == exact_accuracy(rs, ts));
        CHECK(oa == one_off_accuracy(rs, ts));
    }
    CHECK(oa >= ea);
}

TEST_CASE("streaming and batch agree, perfect additions never hurt") {
    std::mt19937_64 rng(53);
    std::uniform_real_distribution<double> off(-6.0, 6.0);
    std::uniform_int_distribution<int> coin(0, 2);
    std::vector<Truth> ts;
    std::vector<Response> rs;
    // Welford running mean / variance.
    double n = 0, mean_c = 0, m2_c = 0, mean_r = 0, m2_r = 0;
    double prev_exact = 0, prev_one = 0;
    bool first = true;
    for (int rep = 0; rep < 2; ++rep) {
        for (const auto& t : scene().grid.targets()) {
            ts.push_back(truth("S" + std::to_string(ts.size()), t.row(), t.col()));
            const bool perfect = coin(rng) == 0;
            const double da = perfect ? 0 : off(rng), de = perfect ? 0 : off(rng);
            rs.push_back(shifted(ts.back(), da, de));
            const double s = t.col() == 7 ? 1.0 : (ts.back().direction.azimuth_deg() < 0 ? -1.0 : 1.0);
            const double ec = s * da, er = -de;
            n += 1;
            const double dc = ec - mean_c;
            mean_c += dc / n;
            m2_c += dc * (ec - mean_c);
            const double dr = er - mean_r;
            mean_r += dr / n;
            m2_r += dr * (er - mean_r);

            const BiasStats b = bias_stats(rs, ts, scene());
            CHECK(b.col_bias_deg == doctest::Approx(mean_c).epsilon(1e-9).scale(1.0));
            CHECK(b.row_bias_deg == doctest::Approx(mean_r).epsilon(1e-9).scale(1.0));
            CHECK(b.col_std_deg == doctest::Approx(std::sqrt(m2_c / n)).epsilon(1e-9).scale(1.0));
            CHECK(b.row_std_deg == doctest::Approx(std::sqrt(m2_r / n)).epsilon(1e-9).scale(1.0));

            const double ex = exact_accuracy(rs, ts), on = one_off_accuracy(rs, ts);
            if (perfect && !first) {
                CHECK(ex >= prev_exact);
                CHECK(on >= prev_one);
            }
            prev_exact = ex;
            prev_one = on;
            first = false;
        }
    }
}

TEST_CASE("position accuracy on the two-seat fixture") {
    std::vector<Truth> ts;
    std::vector<Response> s1, s3;
    seat_fixture(s1, s3, ts);
    for (int seat : {1, 3}) {
        const auto p = position_accuracy(seat == 1 ? s1 : s3, ts, seat);
        CHECK(p.position == seat);
        std::size_t n = 0;
        for (const auto& c : p.columns) {
            const auto& [cnt, ra, ca] = kSeatColumns.at({seat, c.col});
            CHECK(c.n_trials == cnt);
            CHECK(c.row_accuracy == ra);
            CHECK(c.col_accuracy == ca);
            ++n;
        }
        CHECK(n == 5);
    }
}

TEST_CASE("position accuracy") {
    std::vector<Truth> ts;
    std::vector<Response> seat1, seat4;
    for (const auto& t : scene().grid.targets()) {
        ts.push_back(truth("Q" + std::to_string(ts.size()), t.row(), t.col()));
        // Seat 1 reads the left half one column too far left; seat 4 is perfect.
        const int c = t.col() <= 6 && t.col() > 1 ? t.col() - 1 : t.col();
        seat1.push_back(discrete(ts.back().trial_id, TargetId{t.row(), c}));
        seat4.push_back(discrete(ts.back().trial_id, t.id));
    }
    const auto p1 = position_accuracy(seat1, ts, 1);
    const auto p4 = position_accuracy(seat4, ts, 4);
    CHECK(p1.position == 1);
    REQUIRE(p1.columns.size() == 13);
    for (const auto& c : p1.columns) {
        CHECK(c.n_trials == 4);
        CHECK(c.row_accuracy == 1.0);
        CHECK(c.col_accuracy == ((c.col >= 2 && c.col <= 6) ? 0.0 : 1.0));
    }
    for (const auto& c : p4.columns) {
        CHECK(c.row_accuracy == 1.0);
        CHECK(c.col_accuracy == 1.0);
    }
    CHECK_THROWS_AS(position_accuracy(seat4, ts, 0), UnknownPositionError);
    CHECK_THROWS_AS(position_accuracy(seat4, ts, 5), UnknownPositionError);
}

TEST_CASE("alignment errors") {
    std::vector<Truth> ts{truth("a", 1, 1), truth("b", 2, 2)};
    std::vector<Response> missing{discrete("a", TargetId{1, 1})};
    std::vector<Response> extra{discrete("a", TargetId{1, 1}), discrete("b", TargetId{1, 1}),
                                discrete("c", TargetId{1, 1})};
    std::vector<Response> dup{discrete("a", TargetId{1, 1}), discrete("a", TargetId{1, 1})};
    CHECK_THROWS_AS(exact_accuracy(missing, ts), UnmatchedTrialError);
    CHECK_THROWS_AS(one_off_accuracy(extra, ts), UnmatchedTrialError);
    CHECK_THROWS_AS(bias_stats(dup, ts, scene()), UnmatchedTrialError);
    CHECK_THROWS_AS(exact_accuracy({}, {}), EmptyInputError);
}

TEST_CASE("end to end on noiseless synthetic lookers") {
    LookerProfile prof;
    const SceneLayout sc = nominal_scene();
    const auto blocks = generate_blocks(prof, sc, 4, Condition::EyesVisible, 61);
    const Dataset tr = to_dataset({blocks[0], blocks[1], blocks[2]}, sc);
    const ModelConfig cfg;
    const Model m = train(examples_from_trials(tr.trials, cfg), cfg);

    const Dataset test = to_dataset({blocks[3]}, sc);
    const EvalReport vis = run_evaluation(m, test, Condition::EyesVisible);
    REQUIRE(vis.entries.size() == 1);
    MESSAGE("visible exact ", vis.entries[0].exact_accuracy);
    CHECK(vis.entries[0].exact_accuracy >= 0.9);
    CHECK(vis.entries[0].one_off_accuracy >= vis.entries[0].exact_accuracy);
    CHECK(vis.entries[0].model == "face-eyes");
    CHECK(vis.entries[0].n_trials == 52);

    const auto inv_blocks = generate_blocks(prof, sc, 1, Condition::EyesInvisible, 61, 3);
    const EvalReport inv = run_evaluation(m, to_dataset(inv_blocks, sc), Condition::EyesInvisible);
    MESSAGE("invisible exact ", inv.entries[0].exact_accuracy);
    CHECK(inv.entries[0].exact_accuracy < vis.entries[0].exact_accuracy);

    // Same inputs twice, same report.
    CHECK(report_to_text(run_evaluation(m, test, Condition::EyesVisible)) == report_to_text(vis));

    CHECK_THROWS_AS(run_evaluation(m, to_dataset({blocks[0]}, sc), Condition::EyesVisible), ValidationError);
    EvalOptions loose;
    loose.require_disjoint = false;
    CHECK_NOTHROW(run_evaluation(m, to_dataset({blocks[0]}, sc), Condition::EyesVisible, loose));
    CHECK_THROWS_AS(run_evaluation(m, Dataset{sc, {}}, Condition::EyesVisible), EmptyInputError);

    LookerProfile other = prof;
    other.looker_id = "L9";
    const Dataset unseen = to_dataset(generate_blocks(other, sc, 1, Condition::EyesVisible, 62), sc);
    CHECK(unseen_lookers(m, unseen.trials) == std::vector<std::string>{"L9"});
    CHECK(unseen_lookers(m, test.trials).empty());
}

TEST_CASE("failed predictions are recorded as invalid") {
    // A face model whose two examples cancel exactly.
    TrainingExample a, b;
    a.example_id = "a";
    b.example_id = "b";
    a.looker_id = b.looker_id = "L1";
    const HogLayout layout = hog_layout(64, 64, HogParams{});
    a.face_descriptor = {layout, std::vector<double>(layout.size(), 0.0)};
    b.face_descriptor = a.face_descriptor;
    a.gaze = GazeDirection::from_vector({1, 0, 0});
    b.gaze = GazeDirection::from_vector({-1, 0, 0});
    ModelConfig cfg;
    cfg.variant = ModelVariant::Face;
    cfg.k = 2;
    const Model m = train({a, b}, cfg);
    LookerProfile prof;
    const auto blk = generate_blocks(prof, scene(), 1, Condition::EyesVisible, 63);
    const Response r = predict_response(m, blk[0].trials[0].record, scene(), Condition::EyesVisible);
    CHECK_FALSE(r.valid());
    CHECK(r.error == "prediction");
    CHECK_FALSE(r.predicted_target.has_value());

    const Dataset d = to_dataset(blk, scene());
    EvalOptions loose;
    loose.require_disjoint = false;
    const EvalReport rep = run_evaluation(m, d, Condition::EyesVisible, loose);
    CHECK(rep.entries[0].n_invalid == 52);
    CHECK(rep.entries[0].exact_accuracy == 0.0);
    CHECK(std::isnan(rep.entries[0].bias.col_bias_deg));
    const auto j = nlohmann::json::parse(report_to_json(rep));
    CHECK(j["entries"][0]["bias"]["colBias"].is_null());
}

TEST_CASE("report formats match the golden files") {
    std::vector<Response> rs;
    std::vector<Truth> ts;
    accuracy_fixture(rs, ts);
    std::vector<TrialRecord> trials;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        TrialRecord t;
        t.trial_id = ts[i].trial_id;
        t.looker_id = i < 6 ? "L1" : "L2";
        t.target = ts[i].target;
        t.eye_center = scene().looker_eye_center;
        t.target_position = scene().grid.at(ts[i].target).position;
        trials.push_back(t);
    }
    // Directions for the answered ones: one degree right of and half a degree
    // below the answered target.
    for (auto& r : rs) {
        if (!r.predicted_target) continue;
        const auto g = gaze_to_target(scene().looker_eye_center, scene().grid.at(*r.predicted_target));
        r.predicted_direction = GazeDirection::from_azimuth_elevation(g.azimuth_deg() + 1.0, g.elevation_deg() - 0.5);
    }
    EvalOptions opt;
    opt.observer_positions = {2};
    const EvalReport rep = evaluate_responses(rs, trials, scene(), Condition::EyesVisible, "face-eyes", opt);
    const std::filesystem::path golden = GAZELAB_GOLDEN_DIR;
    if (std::getenv("GAZELAB_UPDATE_GOLDEN")) {
        std::ofstream(golden / "report.txt", std::ios::binary) << report_to_text(rep);
        std::ofstream(golden / "report.json", std::ios::binary) << report_to_json(rep);
    }
    CHECK(report_to_text(rep) == read_file(golden / "report.txt"));
    CHECK(report_to_json(rep) == read_file(golden / "report.json"));

    REQUIRE(rep.entries.size() == 2);
    CHECK(rep.entries[0].looker_id == "L1");
    CHECK(rep.entries[1].n_invalid == 0);
    CHECK(rep.entries[0].n_invalid == 1);
}

TEST_CASE("predictions file round trip") {
    PredictionsFile f;
    f.model = "face-eyes";
    f.condition = Condition::EyesInvisible;
    Response ok;
    ok.trial_id = "L1-b0-t00";
    ok.predicted_direction = GazeDirection::from_azimuth_elevation(12.3456789, -20.5);
    ok.predicted_target = TargetId{4, 8};
    ok.face_neighbors = {{"L1-b1-t03", 1.0 / 3.0}, {"L1-b2-t17", 2.5e6}};
    Response miss;
    miss.trial_id = "L1-b0-t01";
    miss.predicted_direction = GazeDirection::from_azimuth_elevation(0, 10);
    Response bad;
    bad.trial_id = "L1-b0-t02";
    bad.error = "prediction";
    f.responses = {ok, miss, bad};

    const std::string text = predictions_to_text(f);
    const PredictionsFile back = predictions_from_text(text);
    CHECK(predictions_to_text(back) == text);
    CHECK(back.model == "face-eyes");
    CHECK(back.condition == Condition::EyesInvisible);
    REQUIRE(back.responses.size() == 3);
    CHECK(back.responses[0].predicted_direction->vector() == ok.predicted_direction->vector());
    CHECK(back.responses[0].face_neighbors == ok.face_neighbors);
    CHECK(back.responses[0].eyes_neighbors.empty());
    CHECK(back.responses[1].valid());
    CHECK_FALSE(back.responses[1].predicted_target.has_value());
    CHECK(back.responses[2].error == "prediction");

    CHECK_THROWS_AS(predictions_from_text(""), MalformedRecordError);
    CHECK_THROWS_AS(predictions_from_text("#gazelab-predictions\t2\n"), SchemaVersionError);
    std::string broken = text;
    broken.replace(broken.find("\t4\t8\t"), 5, "\t9\t8\t");
    CHECK_THROWS_AS(predictions_from_text(broken), MalformedRecordError);
    std::string short_row = text.substr(0, text.rfind('\t')) + "\n";
    CHECK_THROWS_AS(predictions_from_text(short_row), MalformedRecordError);
}
