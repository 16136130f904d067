#pragma once

// Scene ingestion, JSONL traces and metrics files.

#include <iosfwd>
#include <string>
#include <vector>

#include "waynav/metrics.hpp"
#include "waynav/trace.hpp"
#include "waynav/world.hpp"

namespace waynav {

struct Scene {
    std::string name;
    FloorPlan plan;
    std::vector<Episode> episodes;
};

// Throws LoadError naming the offending field, or the episode id when its goal
// is unreachable from its start.
Scene parse_scene(const std::string& json_text);
Scene load_scene(const std::string& path);
std::string scene_to_json(const Scene& scene);

// Header line, one line per step, summary line.
void write_trace(std::ostream& out, const EpisodeTrace& trace);
// Throws LoadError naming the 1-based line.
EpisodeTrace read_trace(std::istream& in);
void save_trace(const std::string& path, const EpisodeTrace& trace);
EpisodeTrace load_trace(const std::string& path);

void write_metrics_jsonl(std::ostream& out, const std::vector<EpisodeMetrics>& episodes);
// One row per episode, then a "mean" row.
void write_metrics_csv(std::ostream& out, const std::vector<EpisodeMetrics>& episodes, const NavMetrics& mean);
void write_waypoint_csv(std::ostream& out, const std::vector<WaypointMetrics>& rows, const WaypointMetrics& mean);

// Fixed-precision rendering used by every CSV writer.
std::string format_number(double v);

}  // namespace waynav
