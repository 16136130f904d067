#pragma once

// Planar synthetic world: wall segments, labelled objects, raycasting, motion and
// geodesic distances.

#include <limits>
#include <string>
#include <vector>

#include "waynav/geometry.hpp"
#include "waynav/polar_geometry.hpp"

namespace waynav {

inline constexpr double kAgentRadius = 0.18;
inline constexpr double kGeodesicResolution = 0.05;
inline constexpr double kUnreachable = std::numeric_limits<double>::infinity();

struct Wall {
    Vec2 a;
    Vec2 b;
};

struct SceneObject {
    std::string label;
    Vec2 position;
    double radius = 0.2;
};

struct Bounds {
    double min_x = 0.0;
    double min_z = 0.0;
    double max_x = 0.0;
    double max_z = 0.0;

    bool contains(Vec2 p, double tol = 1e-9) const {
        return p.x >= min_x - tol && p.x <= max_x + tol && p.z >= min_z - tol && p.z <= max_z + tol;
    }
};

struct FloorPlan {
    Bounds bounds;
    std::vector<Wall> walls;
    std::vector<SceneObject> objects;

    // Throws ValidationError naming the offending item.
    void validate() const;
    // Distance from p to the nearest wall; +inf without walls.
    double clearance(Vec2 p) const;
};

struct AgentPose {
    double x = 0.0;
    double z = 0.0;
    double heading_deg = 0.0;

    Vec2 position() const { return {x, z}; }
    friend bool operator==(const AgentPose&, const AgentPose&) = default;
};

struct Episode {
    std::string id;
    AgentPose start;
    Vec2 goal;
    std::string instruction;
};

struct StepOutcome {
    AgentPose new_pose;
    bool collided = false;
    double distance_traveled = 0.0;
};

struct ObjectSighting {
    std::string label;
    double bearing_deg = 0.0;  // absolute
    double distance = 0.0;
};

// Distance to the nearest wall hit along a horizontal bearing, clamped to max_range.
double raycast(const FloorPlan& plan, Vec2 origin, double bearing_deg, double max_range);

DepthPanorama render_depth_panorama(const FloorPlan& plan, const AgentPose& pose, const DepthCamera& camera);

std::vector<ObjectSighting> visible_objects(const FloorPlan& plan, const AgentPose& pose, int view_index);

// Straight-line motion of the agent disc; stops at contact with clearance kept.
StepOutcome step_to(const AgentPose& pose, Vec2 target, const FloorPlan& plan);

// Occupancy grid of cells whose centre keeps the agent radius clear of walls,
// searched with 16-connected moves. Pairs with a clear straight segment return
// the straight-line length.
class GeodesicGrid {
public:
    explicit GeodesicGrid(const FloorPlan& plan, double resolution = kGeodesicResolution,
                          double agent_radius = kAgentRadius);

    // Shortest path length; kUnreachable when disconnected.
    double distance(Vec2 a, Vec2 b) const;
    // Distance from every cell to `source` (Dijkstra); used for repeated goal queries.
    std::vector<double> field_from(Vec2 source) const;
    // Distance from p to `source`, read from field_from(source).
    double lookup(const std::vector<double>& field, Vec2 source, Vec2 p) const;

    int cols() const { return cols_; }
    int rows() const { return rows_; }
    bool is_free(int cell) const { return free_[static_cast<std::size_t>(cell)] != 0; }
    Vec2 cell_centre(int cell) const;

private:
    int snap(Vec2 p) const;
    bool free_at(int col, int row) const;
    // Straight segment keeps the agent radius clear of every wall.
    bool line_of_sight(Vec2 a, Vec2 b) const;
    template <typename Visit>
    void for_each_move(int cell, Visit&& visit) const;

    const FloorPlan* plan_;
    double resolution_;
    double agent_radius_;
    int cols_ = 0;
    int rows_ = 0;
    std::vector<unsigned char> free_;
};

double geodesic_distance(const FloorPlan& plan, Vec2 a, Vec2 b);

// Geodesic distances from many points to one goal, sharing a single Dijkstra sweep.
// The plan must outlive the field.
class GoalDistanceField {
public:
    GoalDistanceField(const FloorPlan& plan, Vec2 goal);
    double at(Vec2 p) const;
    Vec2 goal() const { return goal_; }

private:
    Vec2 goal_;
    GeodesicGrid grid_;
    std::vector<double> field_;
};

}  // namespace waynav
