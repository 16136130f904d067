#pragma once

// Procedural scenes: single rooms with door gaps for predictor training and
// evaluation, and trap-corridor layouts for the backtracking ablation.

#include <random>
#include <vector>

#include "waynav/heatmap.hpp"
#include "waynav/world.hpp"

namespace waynav::scenes {

struct RoomScene {
    FloorPlan plan;
    AgentPose pose;
    std::vector<Vec2> door_centres;
    // Visible door centres within 3 m, egocentric.
    std::vector<PolarPoint> gt_waypoints;
};

// A rectangular room with 1-5 door gaps inside an enclosed hall, optional
// clutter, labelled objects, and an agent pose that sees at least one door
// within waypoint range.
RoomScene random_room(std::mt19937_64& rng, bool clutter = true);

struct NavigationScene {
    FloorPlan plan;
    Episode episode;
};

// A dead-end corridor points at the goal; the real route leaves through a side
// door and loops around. `variant` selects length, width, mirroring and rotation.
NavigationScene trap_corridor(int variant);

// Egocentric door-centre waypoints visible from `pose`.
std::vector<PolarPoint> visible_door_waypoints(const FloorPlan& plan, const AgentPose& pose,
                                               const std::vector<Vec2>& door_centres);

}  // namespace waynav::scenes
