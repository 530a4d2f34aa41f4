#pragma once

// Small hand-enumerated scoring fixtures shared by the evalkit tests and the
// acceptance runner. Expected values below were worked out by hand.

#include "gazelab/evalkit.hpp"

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

namespace fixture {

using namespace gazelab;

inline const SceneLayout& scene() {
    static const SceneLayout s = nominal_scene();
    return s;
}

inline Truth truth(const std::string& id, int row, int col) {
    const auto& t = scene().grid.at(row, col);
    return {id, t.id, gaze_to_target(scene().looker_eye_center, t), scene().looker_eye_center};
}

inline Response discrete(const std::string& id, std::optional<TargetId> target) {
    Response r;
    r.trial_id = id;
    r.predicted_target = target;
    return r;
}

// Direction offset from the truth by (d_az, d_el) degrees, snapped to a target.
inline Response shifted(const Truth& t, double d_az, double d_el) {
    Response r;
    r.trial_id = t.trial_id;
    r.predicted_direction =
        GazeDirection::from_azimuth_elevation(t.direction.azimuth_deg() + d_az, t.direction.elevation_deg() + d_el);
    if (const auto hit = snap_to_target(*r.predicted_direction, t.eye_center, scene().grid)) r.predicted_target = hit->id;
    return r;
}

inline std::pair<double, double> mean_pstd(const std::vector<double>& v) {
    double m = 0;
    for (double x : v) m += x;
    m /= v.size();
    double s = 0;
    for (double x : v) s += (x - m) * (x - m);
    return {m, std::sqrt(s / v.size())};
}

// 10 trials: truth (row, col) -> answered (row, col) or nothing.
struct AccRow {
    int tr, tc;
    std::optional<TargetId> pred;
};
inline const std::vector<AccRow> kAccuracy = {
    {4, 7, TargetId{4, 7}},    // exact
    {1, 1, TargetId{1, 2}},    // one column off
    {2, 13, TargetId{3, 12}},  // diagonal neighbor
    {3, 5, TargetId{1, 5}},    // two rows off
    {4, 10, std::nullopt},     // no answer
    {1, 7, TargetId{1, 7}},    // exact
    {2, 3, TargetId{2, 5}},    // two columns off
    {3, 9, TargetId{4, 9}},    // one row off
    {4, 13, TargetId{4, 13}},  // exact
    {2, 6, TargetId{2, 6}},    // exact
};
// Exact hits: trials 0, 5, 8, 9. One-off adds 1, 2, 7.
inline constexpr double kAccuracyExact = 0.4;
inline constexpr double kAccuracyOneOff = 0.7;
// col -> (n, row accuracy, col accuracy)
inline const std::map<int, std::tuple<std::size_t, double, double>> kAccuracyColumns = {
    {1, {1, 1.0, 0.0}}, {3, {1, 1.0, 0.0}}, {5, {1, 0.0, 1.0}},  {6, {1, 1.0, 1.0}},
    {7, {2, 1.0, 1.0}}, {9, {1, 0.0, 1.0}}, {10, {1, 0.0, 0.0}}, {13, {2, 0.5, 0.5}},
};

inline void accuracy_fixture(std::vector<Response>& rs, std::vector<Truth>& ts) {
    for (std::size_t i = 0; i < kAccuracy.size(); ++i) {
        const std::string id = "T" + std::to_string(i);
        ts.push_back(truth(id, kAccuracy[i].tr, kAccuracy[i].tc));
        rs.push_back(discrete(id, kAccuracy[i].pred));
    }
}

// 6 trials: (row, col, d_az, d_el) and the signed errors by hand,
// e_c = d_az * s (s = sign of true azimuth, +1 at the center), e_r = -d_el.
struct BiasRow {
    int row, col;
    double d_az, d_el, e_c, e_r;
};
inline const std::vector<BiasRow> kBias = {
    {4, 9, 3.0, -1.0, 3.0, 1.0},     // right, further right, lower
    {2, 4, -2.0, 0.5, 2.0, -0.5},    // left, further left
    {1, 7, 1.5, 0.0, 1.5, 0.0},      // center, toward the right
    {3, 2, 4.0, -2.0, -4.0, 2.0},    // left, toward the middle
    {4, 12, -1.0, 1.5, -1.0, -1.5},  // right, toward the middle, higher
    {3, 7, -2.0, -0.25, -2.0, 0.25}, // center, toward the left
};

inline void bias_fixture(std::vector<Response>& rs, std::vector<Truth>& ts) {
    for (std::size_t i = 0; i < kBias.size(); ++i) {
        ts.push_back(truth("B" + std::to_string(i), kBias[i].row, kBias[i].col));
        rs.push_back(shifted(ts.back(), kBias[i].d_az, kBias[i].d_el));
    }
}

// 8 trials seen from two seats. Seat 1 pushes every left-half answer one
// column further left; seat 3 gets the rows wrong on column 13.
struct SeatRow {
    int tr, tc;
    TargetId seat1, seat3;
};
inline const std::vector<SeatRow> kSeats = {
    {1, 2, {1, 1}, {1, 2}},  {2, 4, {2, 3}, {2, 4}},   {3, 7, {3, 7}, {3, 7}},   {4, 7, {4, 7}, {4, 7}},
    {1, 13, {1, 13}, {2, 13}}, {3, 13, {3, 13}, {4, 13}}, {2, 10, {2, 10}, {2, 10}}, {4, 4, {4, 3}, {4, 4}},
};
// (seat, col) -> (n, row accuracy, col accuracy)
inline const std::map<std::pair<int, int>, std::tuple<std::size_t, double, double>> kSeatColumns = {
    {{1, 2}, {1, 1.0, 0.0}}, {{1, 4}, {2, 1.0, 0.0}}, {{1, 7}, {2, 1.0, 1.0}},
    {{1, 10}, {1, 1.0, 1.0}}, {{1, 13}, {2, 1.0, 1.0}}, {{3, 2}, {1, 1.0, 1.0}},
    {{3, 4}, {2, 1.0, 1.0}}, {{3, 7}, {2, 1.0, 1.0}}, {{3, 10}, {1, 1.0, 1.0}},
    {{3, 13}, {2, 0.0, 1.0}},
};

inline void seat_fixture(std::vector<Response>& seat1, std::vector<Response>& seat3, std::vector<Truth>& ts) {
    for (std::size_t i = 0; i < kSeats.size(); ++i) {
        const std::string id = "S" + std::to_string(i);
        ts.push_back(truth(id, kSeats[i].tr, kSeats[i].tc));
        seat1.push_back(discrete(id, kSeats[i].seat1));
        seat3.push_back(discrete(id, kSeats[i].seat3));
    }
}

}  // namespace fixture
