#pragma once

// History-aware single-decision navigator: action space with multi-scale turns
// and a LIFO backtrack option, prompt assembly, decision parsing and the episode loop.

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "waynav/heatmap.hpp"
#include "waynav/polar_geometry.hpp"
#include "waynav/predictor.hpp"
#include "waynav/trace.hpp"
#include "waynav/world.hpp"

namespace waynav {

inline constexpr double kSlightTurnDeg = 30.0;
inline constexpr double kSharpTurnDeg = 90.0;
inline constexpr int kDefaultMaxSteps = 20;
inline constexpr int kHistoryWindow = 12;
inline constexpr double kSimSuccessThreshold = 3.0;
inline constexpr double kStrictSuccessThreshold = 2.0;
inline constexpr const char* kNoPlanSentinel = "none";

struct ActionOption {
    std::string id;
    ActionKind kind = ActionKind::stop;
    std::string description;
    // move_to_waypoint only
    Waypoint waypoint;
    PolarPoint polar;
    Vec2 target;
    std::vector<std::string> scene_tags;
};

struct HistoryEntry {
    int step = 0;
    ActionKind kind = ActionKind::stop;
    std::string action_taken;
    std::vector<std::string> scene_tags;
    AgentPose pose_before;
    AgentPose pose_after;
    bool collided = false;
};

struct Plan {
    std::string text;
};

struct NavState {
    AgentPose pose;
    std::vector<HistoryEntry> history;
    Plan plan;
    std::vector<AgentPose> backtrack_stack;
    int step_count = 0;
    bool done = false;
};

struct ImageAttachment {
    std::string option_id;
    std::string mime;
    std::string base64;
};

struct DecisionRequest {
    std::string instruction;
    std::string plan;
    std::vector<std::string> history;
    std::vector<std::pair<std::string, std::string>> options;  // (id, text)
    std::vector<ImageAttachment> images;
    std::string prompt;  // full textual rendering
};

// Waypoint moves first (scene tags from the view facing the waypoint), then the
// four turns, MoveBack when the stack is non-empty and backtracking is enabled,
// then Stop. Ids are consecutive letters from 'A'.
std::vector<ActionOption> build_action_space(const std::vector<Waypoint>& waypoints, const AgentPose& pose,
                                             const FloorPlan& plan_world, const NavState& state,
                                             bool backtrack_enabled = true);

std::string task_description();
std::string format_reminder();
std::vector<std::string> render_history(const std::vector<HistoryEntry>& history, int window = kHistoryWindow);

DecisionRequest assemble_prompt(const std::string& instruction, const NavState& state,
                                const std::vector<ActionOption>& options, int history_window = kHistoryWindow);

// Extracts Thought / New Plan / Action fields; throws ParseError when the action
// is missing or not offered.
DecisionResponse parse_decision(const std::string& raw, const std::vector<std::string>& offered_ids);

// Returns the state after executing `option`; the executed step's collision flag
// is in history.back().collided.
NavState apply_action(const NavState& state, const ActionOption& option, const FloorPlan& plan_world);

struct DecisionContext {
    const FloorPlan* plan = nullptr;
    const Episode* episode = nullptr;
    const NavState* state = nullptr;
    const std::vector<ActionOption>* options = nullptr;
    const GoalDistanceField* goal_field = nullptr;
    double success_threshold = kSimSuccessThreshold;
};

struct DecisionOutcome {
    DecisionResponse response;
    std::vector<std::string> raw_responses;
    std::string fallback;
};

class DecisionBackend {
public:
    virtual ~DecisionBackend() = default;
    virtual DecisionOutcome decide(const DecisionRequest& request, const DecisionContext& context) = 0;
};

// Scripted oracle policy. Ranks waypoint options by straight-line distance of
// their target to the goal, skipping targets near positions it already backed
// out of; stops once the geodesic distance is within the success threshold;
// backs up when no remaining option makes progress.
class GreedyBackend final : public DecisionBackend {
public:
    static constexpr double kDeadEndRadius = 1.0;
    DecisionOutcome decide(const DecisionRequest& request, const DecisionContext& context) override;
};

// Validates the backend's answer against the offered ids.
DecisionOutcome decide(DecisionBackend& backend, const DecisionRequest& request, const DecisionContext& context);

struct Prediction {
    PolarHeatmap heatmap;
    std::vector<Waypoint> waypoints;
};

class WaypointSource {
public:
    virtual ~WaypointSource() = default;
    virtual Prediction predict(const FloorPlan& plan, const AgentPose& pose, int step) const = 0;
};

// Openings read from the rendered depth panorama.
class OracleWaypointSource final : public WaypointSource {
public:
    explicit OracleWaypointSource(DepthCamera camera = {}) : camera_(camera) {}
    Prediction predict(const FloorPlan& plan, const AgentPose& pose, int step) const override;

private:
    DepthCamera camera_;
};

class ToyPredictorSource final : public WaypointSource {
public:
    ToyPredictorSource(ToyPredictorParams params, std::uint64_t seed, DepthCamera camera = {})
        : params_(std::move(params)), seed_(seed), camera_(camera) {}
    Prediction predict(const FloorPlan& plan, const AgentPose& pose, int step) const override;

private:
    ToyPredictorParams params_;
    std::uint64_t seed_;
    DepthCamera camera_;
};

struct EpisodeOptions {
    int max_steps = kDefaultMaxSteps;
    double success_threshold = kSimSuccessThreshold;
    bool backtrack_enabled = true;
    bool attach_views = false;
    DepthCamera camera;
};

// render -> waypoints -> options -> decide -> apply, until Stop or max_steps.
EpisodeTrace run_episode(const FloorPlan& plan_world, const Episode& episode, DecisionBackend& backend,
                         const WaypointSource& predictor, const EpisodeOptions& options = {});

// Re-applies the recorded actions from the start pose and returns every pose.
std::vector<AgentPose> replay(const FloorPlan& plan_world, const EpisodeTrace& trace);

std::string sha256_hex(const std::string& text);
std::string base64_encode(const std::string& bytes);

}  // namespace waynav
