#include "waynav/harness.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "waynav/errors.hpp"

namespace waynav {

using nlohmann::json;

namespace {

const json& field(const json& obj, const char* key, const std::string& path) {
    if (!obj.is_object()) throw LoadError(path + ": expected an object");
    const auto it = obj.find(key);
    if (it == obj.end()) throw LoadError(path + "." + key + ": missing");
    return *it;
}

double number(const json& j, const std::string& path) {
    if (!j.is_number()) throw LoadError(path + ": expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw LoadError(path + ": not finite");
    return v;
}

std::string text(const json& j, const std::string& path) {
    if (!j.is_string()) throw LoadError(path + ": expected a string");
    return j.get<std::string>();
}

Vec2 point(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 2) throw LoadError(path + ": expected [x, z]");
    return {number(j[0], path + "[0]"), number(j[1], path + "[1]")};
}

const json& array(const json& j, const std::string& path) {
    if (!j.is_array()) throw LoadError(path + ": expected an array");
    return j;
}

json pose_json(const AgentPose& p) { return {{"x", p.x}, {"z", p.z}, {"heading", p.heading_deg}}; }

AgentPose pose_from(const json& j, const std::string& path) {
    return {number(field(j, "x", path), path + ".x"), number(field(j, "z", path), path + ".z"),
            number(field(j, "heading", path), path + ".heading")};
}

json vec_json(Vec2 v) { return json::array({v.x, v.z}); }

Vec2 xz(const json& j, const std::string& path) {
    return {number(field(j, "x", path), path + ".x"), number(field(j, "z", path), path + ".z")};
}

json xz_json(Vec2 v) { return {{"x", v.x}, {"z", v.z}}; }

}  // namespace

Scene parse_scene(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw LoadError(std::string("scene: invalid JSON: ") + e.what());
    }
    Scene s;
    s.name = root.contains("name") ? text(root["name"], "name") : "";
    const json& b = field(root, "bounds", "scene");
    s.plan.bounds = {number(field(b, "min_x", "bounds"), "bounds.min_x"), number(field(b, "min_z", "bounds"), "bounds.min_z"),
                     number(field(b, "max_x", "bounds"), "bounds.max_x"), number(field(b, "max_z", "bounds"), "bounds.max_z")};
    const json& walls = array(field(root, "walls", "scene"), "walls");
    for (std::size_t i = 0; i < walls.size(); ++i) {
        const std::string path = "walls[" + std::to_string(i) + "]";
        if (!walls[i].is_array() || walls[i].size() != 4) throw LoadError(path + ": expected [x1, z1, x2, z2]");
        s.plan.walls.push_back({{number(walls[i][0], path + "[0]"), number(walls[i][1], path + "[1]")},
                                {number(walls[i][2], path + "[2]"), number(walls[i][3], path + "[3]")}});
    }
    if (root.contains("objects")) {
        const json& objects = array(root["objects"], "objects");
        for (std::size_t i = 0; i < objects.size(); ++i) {
            const std::string path = "objects[" + std::to_string(i) + "]";
            SceneObject o;
            o.label = text(field(objects[i], "label", path), path + ".label");
            o.position = {number(field(objects[i], "x", path), path + ".x"), number(field(objects[i], "z", path), path + ".z")};
            o.radius = number(field(objects[i], "r", path), path + ".r");
            s.plan.objects.push_back(std::move(o));
        }
    }
    try {
        s.plan.validate();
    } catch (const ValidationError& e) {
        throw LoadError(e.what());
    }

    const json& episodes = array(field(root, "episodes", "scene"), "episodes");
    std::set<std::string> ids;
    for (std::size_t i = 0; i < episodes.size(); ++i) {
        const std::string path = "episodes[" + std::to_string(i) + "]";
        Episode e;
        e.id = text(field(episodes[i], "id", path), path + ".id");
        if (e.id.empty()) throw LoadError(path + ".id: empty");
        if (!ids.insert(e.id).second) throw LoadError(path + ".id: duplicate episode id '" + e.id + "'");
        e.start = pose_from(field(episodes[i], "start", path), path + ".start");
        e.goal = xz(field(episodes[i], "goal", path), path + ".goal");
        e.instruction = text(field(episodes[i], "instruction", path), path + ".instruction");
        s.episodes.push_back(std::move(e));
    }
    for (const auto& e : s.episodes) {
        double d = kUnreachable;
        try {
            d = geodesic_distance(s.plan, e.start.position(), e.goal);
        } catch (const PoseError& err) {
            throw LoadError("episode '" + e.id + "': " + err.what());
        }
        if (!std::isfinite(d)) throw LoadError("episode '" + e.id + "': goal is not reachable from the start");
    }
    return s;
}

Scene load_scene(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw LoadError("cannot open scene file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scene(ss.str());
}

std::string scene_to_json(const Scene& scene) {
    json root;
    root["name"] = scene.name;
    const Bounds& b = scene.plan.bounds;
    root["bounds"] = {{"min_x", b.min_x}, {"min_z", b.min_z}, {"max_x", b.max_x}, {"max_z", b.max_z}};
    root["walls"] = json::array();
    for (const auto& w : scene.plan.walls) root["walls"].push_back(json::array({w.a.x, w.a.z, w.b.x, w.b.z}));
    root["objects"] = json::array();
    for (const auto& o : scene.plan.objects)
        root["objects"].push_back({{"label", o.label}, {"x", o.position.x}, {"z", o.position.z}, {"r", o.radius}});
    root["episodes"] = json::array();
    for (const auto& e : scene.episodes)
        root["episodes"].push_back(
            {{"id", e.id}, {"start", pose_json(e.start)}, {"goal", xz_json(e.goal)}, {"instruction", e.instruction}});
    return root.dump(2) + "\n";
}

void write_trace(std::ostream& out, const EpisodeTrace& t) {
    json header{{"type", "header"},      {"episode_id", t.episode_id}, {"start", pose_json(t.start)},
                {"goal", vec_json(t.goal)}, {"instruction", t.instruction}};
    out << header.dump() << "\n";
    for (const auto& s : t.steps) {
        json action{{"id", s.action_id}, {"kind", action_kind_name(s.kind)}, {"text", s.action_text}};
        if (s.target) action["target"] = vec_json(*s.target);
        json waypoints = json::array();
        for (const auto& w : s.waypoints) waypoints.push_back(json::array({w.angle_bin, w.dist_bin, w.score}));
        json line{{"type", "step"},
                  {"step", s.step},
                  {"pose_before", pose_json(s.pose_before)},
                  {"pose", pose_json(s.pose)},
                  {"action", action},
                  {"collided", s.collided},
                  {"options", s.options},
                  {"waypoints", waypoints},
                  {"request_digest", s.request_digest},
                  {"response", {{"thought", s.response.thought}, {"plan", s.response.plan}, {"action", s.response.action_id}}},
                  {"raw_responses", s.raw_responses},
                  {"fallback", s.fallback}};
        out << line.dump() << "\n";
    }
    json summary{{"type", "summary"},
                 {"steps", t.steps.size()},
                 {"stopped", t.stopped()},
                 {"aborted", t.aborted},
                 {"abort_reason", t.abort_reason}};
    out << summary.dump() << "\n";
}

EpisodeTrace read_trace(std::istream& in) {
    EpisodeTrace t;
    std::string line;
    int line_no = 0;
    bool have_header = false;
    bool have_summary = false;
    int last_step = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::string where = "line " + std::to_string(line_no);
        try {
            if (have_summary) throw LoadError("content after the summary line");
            const json j = json::parse(line);
            const std::string type = text(field(j, "type", where), "type");
            if (type == "header") {
                if (have_header) throw LoadError("second header");
                t.episode_id = text(field(j, "episode_id", where), "episode_id");
                t.start = pose_from(field(j, "start", where), "start");
                t.goal = point(field(j, "goal", where), "goal");
                t.instruction = text(field(j, "instruction", where), "instruction");
                have_header = true;
            } else if (type == "step") {
                if (!have_header) throw LoadError("step before header");
                StepRecord s;
                s.step = field(j, "step", where).get<int>();
                if (s.step <= last_step) throw LoadError("step indices must increase");
                last_step = s.step;
                s.pose_before = pose_from(field(j, "pose_before", where), "pose_before");
                s.pose = pose_from(field(j, "pose", where), "pose");
                const json& a = field(j, "action", where);
                s.action_id = text(field(a, "id", "action"), "action.id");
                s.kind = action_kind_from_name(text(field(a, "kind", "action"), "action.kind"));
                s.action_text = text(field(a, "text", "action"), "action.text");
                if (a.contains("target")) s.target = point(a["target"], "action.target");
                s.collided = field(j, "collided", where).get<bool>();
                s.options = field(j, "options", where).get<std::vector<std::string>>();
                for (const auto& w : array(field(j, "waypoints", where), "waypoints"))
                    s.waypoints.push_back({w.at(0).get<int>(), w.at(1).get<int>(), w.at(2).get<double>()});
                s.request_digest = text(field(j, "request_digest", where), "request_digest");
                const json& r = field(j, "response", where);
                s.response = {text(field(r, "thought", "response"), "response.thought"),
                              text(field(r, "plan", "response"), "response.plan"),
                              text(field(r, "action", "response"), "response.action")};
                s.raw_responses = field(j, "raw_responses", where).get<std::vector<std::string>>();
                s.fallback = text(field(j, "fallback", where), "fallback");
                t.steps.push_back(std::move(s));
            } else if (type == "summary") {
                if (!have_header) throw LoadError("summary before header");
                t.aborted = field(j, "aborted", where).get<bool>();
                t.abort_reason = text(field(j, "abort_reason", where), "abort_reason");
                if (field(j, "steps", where).get<std::size_t>() != t.steps.size())
                    throw LoadError("summary step count does not match");
                have_summary = true;
            } else {
                throw LoadError("unknown record type '" + type + "'");
            }
        } catch (const LoadError& e) {
            throw LoadError("trace " + where + ": " + e.what());
        } catch (const json::exception& e) {
            throw LoadError("trace " + where + ": " + e.what());
        } catch (const ParseError& e) {
            throw LoadError("trace " + where + ": " + e.what());
        }
    }
    if (!have_header) throw LoadError("trace: missing header line");
    if (!have_summary) throw LoadError("trace line " + std::to_string(line_no) + ": missing summary line");
    return t;
}

void save_trace(const std::string& path, const EpisodeTrace& trace) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw LoadError("cannot write trace file '" + path + "'");
    write_trace(out, trace);
}

EpisodeTrace load_trace(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("cannot open trace file '" + path + "'");
    return read_trace(in);
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

namespace {

json metric_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string optional_cell(const std::optional<double>& v) { return v ? format_number(*v) : ""; }

}  // namespace

void write_metrics_jsonl(std::ostream& out, const std::vector<EpisodeMetrics>& episodes) {
    for (const auto& e : episodes) {
        json j{{"episode_id", e.episode_id},
               {"steps", e.steps},
               {"shortest", metric_json(e.shortest)},
               {"stopped", e.stopped},
               {"aborted", e.aborted},
               {"tl", metric_json(e.m.tl)},
               {"ne", metric_json(e.m.ne)},
               {"osr", e.m.osr},
               {"sr", e.m.sr},
               {"spl", e.m.spl},
               {"collisions", e.m.collisions}};
        out << j.dump() << "\n";
    }
}

void write_metrics_csv(std::ostream& out, const std::vector<EpisodeMetrics>& episodes, const NavMetrics& mean) {
    out << "episode_id,steps,tl,ne,osr,sr,spl,collisions\n";
    auto row = [&](const std::string& id, const std::string& steps, const NavMetrics& m) {
        out << id << ',' << steps << ',' << format_number(m.tl) << ',' << format_number(m.ne) << ','
            << format_number(m.osr) << ',' << format_number(m.sr) << ',' << format_number(m.spl) << ','
            << format_number(m.collisions) << "\n";
    };
    for (const auto& e : episodes) row(e.episode_id, std::to_string(e.steps), e.m);
    row("mean", "", mean);
}

void write_waypoint_csv(std::ostream& out, const std::vector<WaypointMetrics>& rows, const WaypointMetrics& mean) {
    out << "pose,delta,pct_open,d_c,d_h,s_way\n";
    auto row = [&](const std::string& id, const WaypointMetrics& m) {
        out << id << ',' << format_number(m.delta) << ',' << optional_cell(m.pct_open) << ',' << optional_cell(m.d_c)
            << ',' << optional_cell(m.d_h) << ',' << optional_cell(m.s_way) << "\n";
    };
    for (std::size_t i = 0; i < rows.size(); ++i) row(std::to_string(i), rows[i]);
    row("mean", mean);
}

}  // namespace waynav
