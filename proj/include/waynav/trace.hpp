#pragma once

#include <optional>
#include <string>
#include <vector>

#include "waynav/heatmap.hpp"
#include "waynav/world.hpp"

namespace waynav {

enum class ActionKind {
    move_to_waypoint,
    turn_slight_left,
    turn_sharp_left,
    turn_slight_right,
    turn_sharp_right,
    move_back,
    stop,
};

// Stable snake_case names used in prompts, traces and logs.
const char* action_kind_name(ActionKind kind);
ActionKind action_kind_from_name(const std::string& name);

struct DecisionResponse {
    std::string thought;
    std::string plan;
    std::string action_id;
};

struct StepRecord {
    int step = 0;  // 1-based
    AgentPose pose_before;
    AgentPose pose;
    std::string action_id;
    ActionKind kind = ActionKind::stop;
    std::optional<Vec2> target;  // move_to_waypoint only
    std::string action_text;
    bool collided = false;
    std::vector<std::string> options;  // "A. description"
    std::vector<Waypoint> waypoints;
    std::string request_digest;
    DecisionResponse response;
    std::vector<std::string> raw_responses;
    // "" when the first answer parsed; "reprompt" when the second did; "stop" when
    // both failed and the step fell back to Stop.
    std::string fallback;
};

struct EpisodeTrace {
    std::string episode_id;
    AgentPose start;
    Vec2 goal;
    std::string instruction;
    std::vector<StepRecord> steps;
    bool aborted = false;
    std::string abort_reason;
    // Not persisted in the JSONL trace; written next to it as PHM1 files.
    std::vector<PolarHeatmap> heatmaps;

    std::vector<AgentPose> poses() const;
    std::vector<std::string> actions() const;
    std::vector<bool> collisions() const;
    bool stopped() const { return !steps.empty() && steps.back().kind == ActionKind::stop; }
};

}  // namespace waynav
