#pragma once

// Synthetic pose sets for predictor training and waypoint evaluation.

#include <cstdint>
#include <vector>

#include "waynav/metrics.hpp"
#include "waynav/predictor.hpp"
#include "waynav/scenes.hpp"

namespace waynav {

struct PoseSample {
    scenes::RoomScene scene;
    ShortestDistanceProfile profile;
    OccupancyMask mask;
    std::vector<PolarPoint> gt;
    PolarHeatmap target;
    PanoFeatures features;
};

// `count` random-room poses; scene layout and feature noise both follow `seed`.
std::vector<PoseSample> make_pose_set(std::uint64_t seed, int count, int feature_dim = kDefaultFeatureDim,
                                      const DepthCamera& camera = {});

std::vector<TrainingSample> training_samples(const std::vector<PoseSample>& poses);

struct WaypointEval {
    std::vector<WaypointMetrics> rows;
    WaypointMetrics mean;
};

WaypointEval evaluate_predictor(const ToyPredictorParams& params, const std::vector<PoseSample>& poses);
// Openings read from the depth profile, as used by the oracle navigation source.
WaypointEval evaluate_oracle(const std::vector<PoseSample>& poses);

}  // namespace waynav
