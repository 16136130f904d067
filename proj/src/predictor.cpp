#include "waynav/predictor.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

namespace waynav {

int AdjacencyMask::row_sum(int i) const {
    return static_cast<int>(std::count(allowed[i].begin(), allowed[i].end(), true));
}

AdjacencyMask adjacency_mask() {
    AdjacencyMask m;
    for (int i = 0; i < kViews; ++i)
        for (int j = 0; j < kViews; ++j) {
            const int d = std::abs(i - j);
            m.allowed[i][j] = std::min(d, kViews - d) <= 1;
        }
    return m;
}

ToyPredictorParams ToyPredictorParams::zeros(int feature_dim) {
    ToyPredictorParams p;
    p.feature_dim = feature_dim;
    p.query = Eigen::MatrixXd::Zero(feature_dim, feature_dim);
    p.key = Eigen::MatrixXd::Zero(feature_dim, feature_dim);
    p.value = Eigen::MatrixXd::Zero(feature_dim, feature_dim);
    p.head = Eigen::MatrixXd::Zero(kHeadOutputs, feature_dim);
    p.bias = Eigen::VectorXd::Zero(kHeadOutputs);
    return p;
}

ToyPredictorParams ToyPredictorParams::initialise(int feature_dim, std::uint64_t seed, double learning_rate) {
    ToyPredictorParams p = zeros(feature_dim);
    p.learning_rate = learning_rate;
    p.seed = seed;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double attn_scale = 1.0 / std::sqrt(static_cast<double>(feature_dim));
    auto fill = [&](Eigen::MatrixXd& m, double scale) {
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = scale * normal(rng);
    };
    fill(p.query, attn_scale);
    fill(p.key, attn_scale);
    fill(p.value, attn_scale);
    fill(p.head, 0.1 * attn_scale);
    return p;
}

std::size_t ToyPredictorParams::parameter_count() const {
    const auto f = static_cast<std::size_t>(feature_dim);
    return 3 * f * f + static_cast<std::size_t>(kHeadOutputs) * f + kHeadOutputs;
}

namespace {

void append_row_major(const Eigen::MatrixXd& m, Eigen::VectorXd& out, Eigen::Index& at) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) out(at++) = m(r, c);
}

void read_row_major(Eigen::MatrixXd& m, const Eigen::VectorXd& in, Eigen::Index& at) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = in(at++);
}

}  // namespace

Eigen::VectorXd ToyPredictorParams::flatten() const {
    Eigen::VectorXd out(static_cast<Eigen::Index>(parameter_count()));
    Eigen::Index at = 0;
    append_row_major(query, out, at);
    append_row_major(key, out, at);
    append_row_major(value, out, at);
    append_row_major(head, out, at);
    for (Eigen::Index i = 0; i < bias.size(); ++i) out(at++) = bias(i);
    return out;
}

void ToyPredictorParams::assign(const Eigen::VectorXd& flat) {
    if (flat.size() != static_cast<Eigen::Index>(parameter_count())) throw ValidationError("parameter vector size mismatch");
    Eigen::Index at = 0;
    read_row_major(query, flat, at);
    read_row_major(key, flat, at);
    read_row_major(value, flat, at);
    read_row_major(head, flat, at);
    for (Eigen::Index i = 0; i < bias.size(); ++i) bias(i) = flat(at++);
}

namespace {

void check_shapes(const Eigen::MatrixXd& rgb, const Eigen::MatrixXd& depth, const ToyPredictorParams& params) {
    const int f = params.feature_dim;
    if (rgb.rows() != kViews || depth.rows() != kViews || rgb.cols() != f || depth.cols() != f)
        throw ValidationError("view features must be 12 x F with F matching the parameters");
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct Forward {
    Eigen::MatrixXd q, k, v;
    AttentionOutput attn;
    Eigen::MatrixXd probs;  // 12 x 120
};

Forward forward(const PanoFeatures& features, const ToyPredictorParams& params) {
    check_shapes(features.rgb, features.depth, params);
    Forward fw;
    fw.q = features.rgb * params.query.transpose();
    fw.k = features.depth * params.key.transpose();
    fw.v = features.depth * params.value.transpose();
    fw.attn = masked_cross_attention(features.rgb, features.depth, adjacency_mask(), params);
    Eigen::MatrixXd logits = fw.attn.fused * params.head.transpose();
    logits.rowwise() += params.bias.transpose();
    fw.probs = logits.unaryExpr([](double x) { return sigmoid(x); });
    return fw;
}

PolarHeatmap to_heatmap(const Eigen::MatrixXd& probs) {
    PolarHeatmap h;
    for (int v = 0; v < kViews; ++v)
        for (int c = 0; c < kColumnsPerView; ++c)
            for (int j = 0; j < kDistBins; ++j) h.at(kColumnsPerView * v + c, j) = probs(v, c * kDistBins + j);
    return h;
}

}  // namespace

AttentionOutput masked_cross_attention(const Eigen::MatrixXd& rgb, const Eigen::MatrixXd& depth,
                                       const AdjacencyMask& mask, const ToyPredictorParams& params) {
    check_shapes(rgb, depth, params);
    const Eigen::MatrixXd q = rgb * params.query.transpose();
    const Eigen::MatrixXd k = depth * params.key.transpose();
    const Eigen::MatrixXd v = depth * params.value.transpose();
    const double scale = 1.0 / std::sqrt(static_cast<double>(params.feature_dim));

    AttentionOutput out;
    out.weights = Eigen::MatrixXd::Zero(kViews, kViews);
    for (int i = 0; i < kViews; ++i) {
        double peak = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < kViews; ++j)
            if (mask.allowed[i][j]) peak = std::max(peak, q.row(i).dot(k.row(j)) * scale);
        double total = 0.0;
        for (int j = 0; j < kViews; ++j) {
            if (!mask.allowed[i][j]) continue;
            const double e = std::exp(q.row(i).dot(k.row(j)) * scale - peak);
            out.weights(i, j) = e;
            total += e;
        }
        if (total > 0.0) out.weights.row(i) /= total;
    }
    out.fused = out.weights * v;
    return out;
}

PolarHeatmap predict_heatmap(const PanoFeatures& features, const ToyPredictorParams& params) {
    return to_heatmap(forward(features, params).probs);
}

PanoFeatures synth_features(const DepthPanorama& pano, std::mt19937_64& rng, int feature_dim) {
    pano.validate();
    const int w = pano.views[0].width;
    if (feature_dim < 1 || w % feature_dim != 0) throw ConfigError("view width must be divisible by the feature dimension");
    const int group = w / feature_dim;

    PanoFeatures f;
    f.depth = Eigen::MatrixXd::Zero(kViews, feature_dim);
    f.rgb = Eigen::MatrixXd::Zero(kViews, feature_dim);
    for (int v = 0; v < kViews; ++v) {
        const auto& view = pano.views[static_cast<std::size_t>(v)];
        for (int b = 0; b < feature_dim; ++b) {
            double lo = std::numeric_limits<double>::infinity();
            for (int row = 0; row < view.height; ++row)
                for (int col = b * group; col < (b + 1) * group; ++col) lo = std::min(lo, view.at(col, row));
            f.depth(v, b) = lo / kMaxDepthRange;
        }
    }
    std::normal_distribution<double> normal(0.0, 0.5);
    for (int v = 0; v < kViews; ++v)
        for (int b = 0; b < feature_dim; ++b) f.rgb(v, b) = normal(rng);
    return f;
}

LossBreakdown sample_loss(const TrainingSample& sample, const ToyPredictorParams& params, double lambda_occ,
                          Eigen::VectorXd* gradient) {
    const Forward fw = forward(sample.features, params);
    const PolarHeatmap p = to_heatmap(fw.probs);
    const LossBreakdown loss = l_total(p, sample.target, sample.mask, lambda_occ);
    if (gradient == nullptr) return loss;

    const HeatmapGradient dp = grad_l_total(p, sample.target, sample.mask, lambda_occ);
    Eigen::MatrixXd dz(kViews, kHeadOutputs);
    for (int v = 0; v < kViews; ++v)
        for (int c = 0; c < kColumnsPerView; ++c)
            for (int j = 0; j < kDistBins; ++j) {
                const int o = c * kDistBins + j;
                const double pr = fw.probs(v, o);
                dz(v, o) = dp[static_cast<std::size_t>((kColumnsPerView * v + c) * kDistBins + j)] * pr * (1.0 - pr);
            }

    const Eigen::MatrixXd& a = fw.attn.weights;
    const Eigen::MatrixXd d_head = dz.transpose() * fw.attn.fused;
    const Eigen::VectorXd d_bias = dz.colwise().sum().transpose();
    const Eigen::MatrixXd d_fused = dz * params.head;
    const Eigen::MatrixXd d_weights = d_fused * fw.v.transpose();
    const Eigen::MatrixXd d_v = a.transpose() * d_fused;

    Eigen::MatrixXd d_scores = Eigen::MatrixXd::Zero(kViews, kViews);
    for (int i = 0; i < kViews; ++i) {
        const double inner = a.row(i).dot(d_weights.row(i));
        for (int j = 0; j < kViews; ++j) d_scores(i, j) = a(i, j) * (d_weights(i, j) - inner);
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(params.feature_dim));
    const Eigen::MatrixXd d_q = d_scores * fw.k * scale;
    const Eigen::MatrixXd d_k = d_scores.transpose() * fw.q * scale;

    ToyPredictorParams g = ToyPredictorParams::zeros(params.feature_dim);
    g.query = d_q.transpose() * sample.features.rgb;
    g.key = d_k.transpose() * sample.features.depth;
    g.value = d_v.transpose() * sample.features.depth;
    g.head = d_head;
    g.bias = d_bias;
    *gradient = g.flatten();
    return loss;
}

namespace {

bool finite(const LossBreakdown& l) { return std::isfinite(l.l_total) && std::isfinite(l.l_vis) && std::isfinite(l.l_occ); }

// Mean loss and gradient over all samples. Per-sample gradients are summed in
// sample order so the result does not depend on the thread count.
LossBreakdown batch_loss(const std::vector<TrainingSample>& samples, const ToyPredictorParams& params, double lambda_occ,
                         Eigen::VectorXd* gradient) {
    const auto n = static_cast<long>(samples.size());
    std::vector<LossBreakdown> losses(samples.size());
    std::vector<Eigen::VectorXd> grads(gradient ? samples.size() : 0);
    const double nan = std::numeric_limits<double>::quiet_NaN();
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i) {
        const auto s = static_cast<std::size_t>(i);
        // exceptions must not leave the parallel region; non-finite scores surface as a NaN loss
        try {
            losses[s] = sample_loss(samples[s], params, lambda_occ, gradient ? &grads[s] : nullptr);
        } catch (const ValidationError&) {
            losses[s].l_vis = losses[s].l_occ = losses[s].l_total = nan;
            if (gradient) grads[s] = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(params.parameter_count()), nan);
        }
    }

    LossBreakdown mean;
    mean.lambda_occ = lambda_occ;
    mean.l_vis = mean.l_occ = mean.l_total = 0.0;
    for (const auto& l : losses) {
        mean.l_vis += l.l_vis;
        mean.l_occ += l.l_occ;
        mean.l_total += l.l_total;
    }
    const double inv = 1.0 / static_cast<double>(n);
    mean.l_vis *= inv;
    mean.l_occ *= inv;
    mean.l_total *= inv;
    if (gradient) {
        *gradient = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(params.parameter_count()));
        for (const auto& g : grads) *gradient += g;
        *gradient *= inv;
    }
    return mean;
}

}  // namespace

TrainResult train_toy(const std::vector<TrainingSample>& samples, double lambda_occ, int epochs,
                      ToyPredictorParams params) {
    if (samples.empty()) throw ValidationError("training set is empty");
    if (epochs < 0) throw ValidationError("epochs must be non-negative");

    TrainResult result;
    Eigen::VectorXd grad;
    LossBreakdown loss = batch_loss(samples, params, lambda_occ, &grad);
    if (!finite(loss)) throw TrainingError("initial loss is not finite", {params, {}});
    result.curve.push_back(loss);

    for (int epoch = 0; epoch < epochs; ++epoch) {
        ToyPredictorParams next = params;
        next.assign(params.flatten() - params.learning_rate * grad);
        Eigen::VectorXd next_grad;
        const LossBreakdown next_loss = batch_loss(samples, next, lambda_occ, &next_grad);
        if (!finite(next_loss) || !next_grad.allFinite()) {
            result.params = params;
            throw TrainingError("training diverged at epoch " + std::to_string(epoch + 1), result);
        }
        params = std::move(next);
        grad = std::move(next_grad);
        result.curve.push_back(next_loss);
    }
    result.params = std::move(params);
    return result;
}

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::ostream& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

std::uint64_t get_bytes(std::istream& in, int n) {
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) {
        const int c = in.get();
        if (c == std::char_traits<char>::eof()) throw LoadError("truncated parameter file");
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
    }
    return v;
}

constexpr std::uint32_t kParamsVersion = 1;

}  // namespace

void write_params(std::ostream& out, const ToyPredictorParams& params) {
    out.write("TWP1", 4);
    put_u32(out, kParamsVersion);
    put_u32(out, static_cast<std::uint32_t>(params.feature_dim));
    put_u32(out, kViews);
    put_u32(out, kHeadOutputs);
    const Eigen::VectorXd flat = params.flatten();
    for (Eigen::Index i = 0; i < flat.size(); ++i) put_f64(out, flat(i));
    put_f64(out, params.learning_rate);
    put_u64(out, params.seed);
}

ToyPredictorParams read_params(std::istream& in) {
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, "TWP1", 4) != 0) throw LoadError("not a TWP1 parameter file");
    const auto version = static_cast<std::uint32_t>(get_bytes(in, 4));
    if (version != kParamsVersion) throw LoadError("unsupported TWP1 version " + std::to_string(version));
    const auto f = static_cast<int>(get_bytes(in, 4));
    const auto views = get_bytes(in, 4);
    const auto outputs = get_bytes(in, 4);
    if (f < 1 || f > 4096 || views != kViews || outputs != kHeadOutputs) throw LoadError("TWP1 dimensions are invalid");
    ToyPredictorParams p = ToyPredictorParams::zeros(f);
    Eigen::VectorXd flat(static_cast<Eigen::Index>(p.parameter_count()));
    for (Eigen::Index i = 0; i < flat.size(); ++i) flat(i) = std::bit_cast<double>(get_bytes(in, 8));
    p.assign(flat);
    p.learning_rate = std::bit_cast<double>(get_bytes(in, 8));
    p.seed = get_bytes(in, 8);
    return p;
}

void save_params(const std::string& path, const ToyPredictorParams& params) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    write_params(out, params);
}

ToyPredictorParams load_params(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path);
    return read_params(in);
}

void write_loss_csv(std::ostream& out, const std::vector<LossBreakdown>& curve) {
    out << "epoch,l_vis,l_occ,l_total\n";
    char line[160];
    for (std::size_t e = 0; e < curve.size(); ++e) {
        std::snprintf(line, sizeof line, "%zu,%.17g,%.17g,%.17g\n", e, curve[e].l_vis, curve[e].l_occ, curve[e].l_total);
        out << line;
    }
}

std::vector<Waypoint> oracle_opening_waypoints(const ShortestDistanceProfile& profile) {
    const auto& d = profile.distances;
    std::array<bool, kAngleBins> open{};
    for (int k = 0; k < kAngleBins; ++k) open[k] = d[k] >= kOpenThreshold;

    // (start, length) runs of open bins, cyclic
    std::vector<std::pair<int, int>> runs;
    const auto closed = std::find(open.begin(), open.end(), false);
    if (closed == open.end()) {
        for (int s = 0; s < kAngleBins; s += 30) runs.emplace_back(s, 30);
    } else {
        const int first_closed = static_cast<int>(closed - open.begin());
        int run_start = -1;
        for (int step = 1; step <= kAngleBins; ++step) {
            const int k = (first_closed + step) % kAngleBins;
            if (open[k] && run_start < 0) run_start = step;
            if ((!open[k] || step == kAngleBins) && run_start >= 0) {
                const int len = (open[k] ? step + 1 : step) - run_start;
                const int chunks = (len + 29) / 30;
                for (int c = 0; c < chunks; ++c) {
                    const int lo = run_start + len * c / chunks;
                    const int hi = run_start + len * (c + 1) / chunks;
                    runs.emplace_back((first_closed + lo) % kAngleBins, hi - lo);
                }
                run_start = -1;
            }
        }
    }

    std::vector<Waypoint> out;
    for (const auto& [start, len] : runs) {
        if (len < 3) continue;
        const int centre = (start + len / 2) % kAngleBins;
        double nearest = std::numeric_limits<double>::infinity();
        for (int dk = -1; dk <= 1; ++dk) nearest = std::min(nearest, d[((centre + dk) % kAngleBins + kAngleBins) % kAngleBins]);
        const double reach = std::min(nearest - kOpeningMargin, kMaxWaypointDist);
        if (reach < kDistStep) continue;
        Waypoint w = metric_to_cell(kBinDegrees * centre + kBinDegrees / 2.0, reach);
        w.score = reach / kMaxWaypointDist;
        out.push_back(w);
    }
    return out;
}

PolarHeatmap oracle_heatmap(const ShortestDistanceProfile& profile) {
    PolarHeatmap h;
    for (const auto& w : oracle_opening_waypoints(profile)) h.at(w.angle_bin, w.dist_bin) = std::max(h.at(w.angle_bin, w.dist_bin), w.score);
    return h;
}

}  // namespace waynav
