#include "waynav/experiments.hpp"

#include <random>

#include "waynav/errors.hpp"

namespace waynav {

std::vector<PoseSample> make_pose_set(std::uint64_t seed, int count, int feature_dim, const DepthCamera& camera) {
    if (count < 0) throw ConfigError("pose count must be non-negative");
    std::mt19937_64 layout_rng(seed);
    std::mt19937_64 feature_rng(seed ^ 0xA5A5A5A5A5A5A5A5ULL);
    std::vector<PoseSample> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        PoseSample s;
        s.scene = scenes::random_room(layout_rng);
        const DepthPanorama pano = render_depth_panorama(s.scene.plan, s.scene.pose, camera);
        s.profile = shortest_distance_profile(pano, camera);
        s.mask = occupancy_mask(s.profile);
        s.gt = s.scene.gt_waypoints;
        s.target = target_heatmap(s.gt);
        s.features = synth_features(pano, feature_rng, feature_dim);
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<TrainingSample> training_samples(const std::vector<PoseSample>& poses) {
    std::vector<TrainingSample> out;
    out.reserve(poses.size());
    for (const auto& p : poses) out.push_back({p.features, p.target, p.mask});
    return out;
}

WaypointEval evaluate_predictor(const ToyPredictorParams& params, const std::vector<PoseSample>& poses) {
    WaypointEval e;
    for (const auto& p : poses) {
        const PolarHeatmap h = predict_heatmap(p.features, params);
        e.rows.push_back(waypoint_metrics(nms(h), p.gt, p.mask, p.target));
    }
    e.mean = mean_waypoint_metrics(e.rows);
    return e;
}

WaypointEval evaluate_oracle(const std::vector<PoseSample>& poses) {
    WaypointEval e;
    for (const auto& p : poses) e.rows.push_back(waypoint_metrics(nms(oracle_heatmap(p.profile)), p.gt, p.mask, p.target));
    e.mean = mean_waypoint_metrics(e.rows);
    return e;
}

}  // namespace waynav
