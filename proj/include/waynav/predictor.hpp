#pragma once

// Toy waypoint predictor: one masked RGB->depth cross-attention layer over the 12
// panorama views, a weight-shared linear head per view and a logistic squash.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "waynav/errors.hpp"
#include "waynav/heatmap.hpp"
#include "waynav/losses.hpp"
#include "waynav/polar_geometry.hpp"

namespace waynav {

inline constexpr int kDefaultFeatureDim = 16;
inline constexpr int kColumnsPerView = kAngleBins / kViews;  // 10
inline constexpr int kHeadOutputs = kColumnsPerView * kDistBins;  // 120
inline constexpr double kDefaultLearningRate = 0.1;
inline constexpr int kDefaultEpochs = 500;

// Per-view features, one row per view (12 x F).
struct PanoFeatures {
    Eigen::MatrixXd rgb;
    Eigen::MatrixXd depth;
};

struct AdjacencyMask {
    std::array<std::array<bool, kViews>, kViews> allowed{};

    int row_sum(int i) const;
};

struct ToyPredictorParams {
    int feature_dim = kDefaultFeatureDim;
    Eigen::MatrixXd query;  // F x F
    Eigen::MatrixXd key;    // F x F
    Eigen::MatrixXd value;  // F x F
    Eigen::MatrixXd head;   // 120 x F, output index = column * 12 + dist_bin
    Eigen::VectorXd bias;   // 120
    double learning_rate = kDefaultLearningRate;
    std::uint64_t seed = 0;

    // Small seeded random attention weights and head; zero bias.
    static ToyPredictorParams initialise(int feature_dim, std::uint64_t seed,
                                         double learning_rate = kDefaultLearningRate);
    static ToyPredictorParams zeros(int feature_dim);

    std::size_t parameter_count() const;
    Eigen::VectorXd flatten() const;
    void assign(const Eigen::VectorXd& flat);
};

struct AttentionOutput {
    Eigen::MatrixXd fused;    // 12 x F
    Eigen::MatrixXd weights;  // 12 x 12, zero outside the mask
};

// Cyclic +/-1 neighbourhood over the 12 views.
AdjacencyMask adjacency_mask();

// Single-head scaled dot-product attention; RGB rows are queries, depth rows keys and values.
AttentionOutput masked_cross_attention(const Eigen::MatrixXd& rgb, const Eigen::MatrixXd& depth,
                                       const AdjacencyMask& mask, const ToyPredictorParams& params);

// View v's head output fills angle bins [10v, 10v + 10).
PolarHeatmap predict_heatmap(const PanoFeatures& features, const ToyPredictorParams& params);

// Depth rows: per-view min depth over `feature_dim` column groups, divided by the
// max range. RGB rows: seeded noise with no geometric content.
PanoFeatures synth_features(const DepthPanorama& pano, std::mt19937_64& rng, int feature_dim = kDefaultFeatureDim);

struct TrainingSample {
    PanoFeatures features;
    PolarHeatmap target;
    OccupancyMask mask;
};

// Loss of one sample and, when `gradient` is non-null, d loss / d params in
// flatten() order.
LossBreakdown sample_loss(const TrainingSample& sample, const ToyPredictorParams& params, double lambda_occ,
                          Eigen::VectorXd* gradient = nullptr);

struct TrainResult {
    ToyPredictorParams params;
    // Entry e holds the mean loss after e epochs; entry 0 is the initial loss.
    std::vector<LossBreakdown> curve;
};

class TrainingError : public Error {
public:
    TrainingError(const std::string& what, TrainResult partial) : Error(what), partial_(std::move(partial)) {}
    const TrainResult& partial() const { return partial_; }

private:
    TrainResult partial_;
};

// Full-batch gradient descent on the mean sample loss.
TrainResult train_toy(const std::vector<TrainingSample>& samples, double lambda_occ, int epochs,
                      ToyPredictorParams params);

// TWP1: "TWP1", u32 version, u32 F, u32 views, u32 outputs, then query, key, value,
// head (row-major), bias, learning rate as f64 and seed as u64, all little-endian.
void write_params(std::ostream& out, const ToyPredictorParams& params);
ToyPredictorParams read_params(std::istream& in);
void save_params(const std::string& path, const ToyPredictorParams& params);
ToyPredictorParams load_params(const std::string& path);

void write_loss_csv(std::ostream& out, const std::vector<LossBreakdown>& curve);

// Ground-truth opening directions read off a distance profile: runs of bins at
// least kOpenThreshold deep, split into chunks of at most 90 degrees, each
// yielding one waypoint at the chunk centre short of the obstacle by kOpeningMargin.
inline constexpr double kOpenThreshold = 1.0;
inline constexpr double kOpeningMargin = 0.5;
std::vector<Waypoint> oracle_opening_waypoints(const ShortestDistanceProfile& profile);
// Spike heatmap holding exactly the oracle openings.
PolarHeatmap oracle_heatmap(const ShortestDistanceProfile& profile);

}  // namespace waynav
