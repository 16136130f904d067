#include "waynav/navigator.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <random>
#include <regex>
#include <sstream>

#include "waynav/errors.hpp"

namespace waynav {

const char* action_kind_name(ActionKind kind) {
    switch (kind) {
        case ActionKind::move_to_waypoint: return "move_to_waypoint";
        case ActionKind::turn_slight_left: return "turn_slight_left";
        case ActionKind::turn_sharp_left: return "turn_sharp_left";
        case ActionKind::turn_slight_right: return "turn_slight_right";
        case ActionKind::turn_sharp_right: return "turn_sharp_right";
        case ActionKind::move_back: return "move_back";
        case ActionKind::stop: return "stop";
    }
    return "stop";
}

ActionKind action_kind_from_name(const std::string& name) {
    for (ActionKind k : {ActionKind::move_to_waypoint, ActionKind::turn_slight_left, ActionKind::turn_sharp_left,
                         ActionKind::turn_slight_right, ActionKind::turn_sharp_right, ActionKind::move_back,
                         ActionKind::stop})
        if (name == action_kind_name(k)) return k;
    throw ParseError("unknown action kind '" + name + "'");
}

std::vector<AgentPose> EpisodeTrace::poses() const {
    std::vector<AgentPose> out{start};
    for (const auto& s : steps) out.push_back(s.pose);
    return out;
}

std::vector<std::string> EpisodeTrace::actions() const {
    std::vector<std::string> out;
    for (const auto& s : steps) out.push_back(action_kind_name(s.kind));
    return out;
}

std::vector<bool> EpisodeTrace::collisions() const {
    std::vector<bool> out;
    for (const auto& s : steps) out.push_back(s.collided);
    return out;
}

namespace {

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string join(const std::vector<std::string>& items, const char* sep) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += sep;
        out += items[i];
    }
    return out;
}

// Signed angle in (-180, 180], positive to the right.
double signed_angle(double theta_deg) {
    const double a = wrap_degrees(theta_deg);
    return a > 180.0 ? a - 360.0 : a;
}

std::string direction_phrase(double theta_deg) {
    const double rel = signed_angle(theta_deg);
    const long deg = std::lround(std::abs(rel));
    if (deg < 15) return "straight ahead";
    if (deg > 165) return "behind you";
    return std::to_string(deg) + " degrees to your " + (rel > 0 ? "right" : "left");
}

std::vector<std::string> labels_in_view(const FloorPlan& plan, const AgentPose& pose, int view) {
    std::vector<std::string> out;
    for (const auto& s : visible_objects(plan, pose, view))
        if (std::find(out.begin(), out.end(), s.label) == out.end()) out.push_back(s.label);
    return out;
}

std::string option_letter(std::size_t index) {
    if (index >= 26) throw StateError("too many action options");
    return std::string(1, static_cast<char>('A' + index));
}

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

}  // namespace

std::vector<ActionOption> build_action_space(const std::vector<Waypoint>& waypoints, const AgentPose& pose,
                                             const FloorPlan& plan_world, const NavState& state,
                                             bool backtrack_enabled) {
    std::vector<ActionOption> options;
    const std::size_t n_way = std::min<std::size_t>(waypoints.size(), kMaxWaypoints);
    for (std::size_t i = 0; i < n_way; ++i) {
        ActionOption o;
        o.kind = ActionKind::move_to_waypoint;
        o.waypoint = waypoints[i];
        o.polar = polar_to_metric(waypoints[i]);
        const double bearing = pose.heading_deg + o.polar.theta_deg;
        o.target = pose.position() + unit_from_bearing(bearing) * o.polar.dist_m;
        const int view = static_cast<int>(std::lround(wrap_degrees(o.polar.theta_deg) / 30.0)) % kViews;
        o.scene_tags = labels_in_view(plan_world, pose, view);
        o.description = "Move " + fixed(o.polar.dist_m, 2) + " m " + direction_phrase(o.polar.theta_deg);
        o.description += o.scene_tags.empty() ? "; nothing notable in view" : "; in view: " + join(o.scene_tags, ", ");
        options.push_back(std::move(o));
    }
    const std::pair<ActionKind, const char*> turns[] = {
        {ActionKind::turn_slight_left, "Turn slight left (about 30 degrees)"},
        {ActionKind::turn_sharp_left, "Turn sharp left (about 90 degrees)"},
        {ActionKind::turn_slight_right, "Turn slight right (about 30 degrees)"},
        {ActionKind::turn_sharp_right, "Turn sharp right (about 90 degrees)"},
    };
    for (const auto& [kind, text] : turns) {
        ActionOption o;
        o.kind = kind;
        o.description = text;
        options.push_back(std::move(o));
    }
    if (backtrack_enabled && !state.backtrack_stack.empty()) {
        ActionOption o;
        o.kind = ActionKind::move_back;
        o.target = state.backtrack_stack.back().position();
        o.description = "Move back to the previous position, facing the opposite direction";
        options.push_back(std::move(o));
    }
    ActionOption stop;
    stop.kind = ActionKind::stop;
    stop.description = "Stop; the destination has been reached";
    options.push_back(std::move(stop));
    for (std::size_t i = 0; i < options.size(); ++i) options[i].id = option_letter(i);
    return options;
}

std::string task_description() {
    return "You are a navigation agent inside an indoor environment. Follow the instruction by choosing one "
           "action at a time. Check the previous plan, review the history of actions and observations, then "
           "pick the option that best advances the instruction.";
}

std::string format_reminder() {
    return "Your previous answer could not be read. Reply with exactly three lines:\n"
           "Thought: <reasoning>\nNew Plan: <plan>\nAction: <one option letter>";
}

std::vector<std::string> render_history(const std::vector<HistoryEntry>& history, int window) {
    std::vector<std::string> lines;
    const std::size_t keep = static_cast<std::size_t>(std::max(window, 0));
    const std::size_t skipped = history.size() > keep ? history.size() - keep : 0;
    if (skipped > 0) lines.push_back("(" + std::to_string(skipped) + " earlier steps omitted)");
    for (std::size_t i = skipped; i < history.size(); ++i) {
        const auto& h = history[i];
        std::string line = "Step " + std::to_string(h.step) + ": " + h.action_taken;
        if (h.collided) line += " (blocked by an obstacle)";
        line += h.scene_tags.empty() ? ". Observed: nothing notable." : ". Observed: " + join(h.scene_tags, ", ") + ".";
        lines.push_back(std::move(line));
    }
    return lines;
}

DecisionRequest assemble_prompt(const std::string& instruction, const NavState& state,
                                const std::vector<ActionOption>& options, int history_window) {
    if (options.empty()) throw ValidationError("assemble_prompt needs at least one option");
    DecisionRequest req;
    req.instruction = instruction;
    req.plan = state.plan.text.empty() ? kNoPlanSentinel : state.plan.text;
    req.history = render_history(state.history, history_window);
    for (const auto& o : options) req.options.emplace_back(o.id, o.description);

    std::ostringstream p;
    p << task_description() << "\n\n";
    p << "Instruction: " << req.instruction << "\n\n";
    p << "Previous Planning: " << req.plan << "\n\n";
    p << "History:\n";
    if (req.history.empty()) p << kNoPlanSentinel << "\n";
    for (const auto& line : req.history) p << line << "\n";
    p << "\nCurrent Action Options:\n";
    for (const auto& [id, text] : req.options) p << id << ". " << text << "\n";
    p << "\nAnswer in exactly this format:\n"
      << "Thought: <your reasoning>\n"
      << "New Plan: <updated step-by-step plan>\n"
      << "Action: <one option letter>\n";
    req.prompt = p.str();
    return req;
}

DecisionResponse parse_decision(const std::string& raw, const std::vector<std::string>& offered_ids) {
    if (trim(raw).empty()) throw ParseError("empty response");
    std::string text;
    text.reserve(raw.size());
    for (char c : raw)
        if (c != '*' && c != '`' && c != '#' && c != '_') text += c;

    static const std::regex label(R"((thought|new\s+plan|plan|action)\s*:)", std::regex::icase);
    struct Field {
        std::string name;
        std::size_t begin;
        std::size_t end;
    };
    std::vector<Field> fields;
    for (auto it = std::sregex_iterator(text.begin(), text.end(), label); it != std::sregex_iterator(); ++it) {
        std::string name = lower((*it)[1].str());
        if (name != "thought" && name != "plan" && name != "action") name = "plan";
        const auto pos = static_cast<std::size_t>(it->position());
        if (!fields.empty()) fields.back().end = pos;
        fields.push_back({name, pos + static_cast<std::size_t>(it->length()), text.size()});
    }

    DecisionResponse out;
    std::string action_text;
    bool have_action = false;
    for (const auto& f : fields) {
        std::string value = trim(text.substr(f.begin, f.end - f.begin));
        if (f.name == "thought" && out.thought.empty()) out.thought = value;
        if (f.name == "plan") out.plan = value;
        if (f.name == "action") {
            action_text = value;
            have_action = true;
        }
    }
    if (!have_action) throw ParseError("response has no Action field");

    static const char* const filler[] = {"option", "choice", "choose", "select", "i", "will", "take", "the",
                                         "action", "is", "letter", "my", "answer", "final"};
    std::vector<std::string> tokens;
    std::string cur;
    for (char c : action_text + " ") {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            cur += c;
        } else if (!cur.empty()) {
            tokens.push_back(cur);
            cur.clear();
        }
    }
    std::string letter;
    // a leading "I" followed by more words is the pronoun, not option I
    const bool pronoun = tokens.size() > 1 && tokens.front() == "I";
    if (!tokens.empty() && tokens.front().size() == 1 && !pronoun) {
        letter = tokens.front();
    } else {
        for (const auto& t : tokens) {
            const std::string lt = lower(t);
            if (std::find(std::begin(filler), std::end(filler), lt) != std::end(filler)) continue;
            if (t.size() == 1) letter = t;
            break;
        }
    }
    if (letter.empty() || !std::isalpha(static_cast<unsigned char>(letter[0])))
        throw ParseError("no option letter in Action field");
    letter[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(letter[0])));
    if (std::find(offered_ids.begin(), offered_ids.end(), letter) == offered_ids.end())
        throw ParseError("action '" + letter + "' is not an offered option");
    out.action_id = letter;
    return out;
}

NavState apply_action(const NavState& state, const ActionOption& option, const FloorPlan& plan_world) {
    NavState next = state;
    HistoryEntry entry;
    entry.step = state.step_count + 1;
    entry.kind = option.kind;
    entry.action_taken = option.description;
    entry.pose_before = state.pose;

    auto turn = [&](double delta) { next.pose.heading_deg = wrap_degrees(state.pose.heading_deg + delta); };
    switch (option.kind) {
        case ActionKind::move_to_waypoint: {
            const StepOutcome out = step_to(state.pose, option.target, plan_world);
            next.backtrack_stack.push_back(state.pose);
            next.pose = out.new_pose;
            entry.collided = out.collided;
            entry.scene_tags = option.scene_tags;
            break;
        }
        case ActionKind::turn_slight_left: turn(-kSlightTurnDeg); break;
        case ActionKind::turn_sharp_left: turn(-kSharpTurnDeg); break;
        case ActionKind::turn_slight_right: turn(kSlightTurnDeg); break;
        case ActionKind::turn_sharp_right: turn(kSharpTurnDeg); break;
        case ActionKind::move_back: {
            if (state.backtrack_stack.empty()) throw StateError("MoveBack with an empty backtrack stack");
            const AgentPose previous = state.backtrack_stack.back();
            next.backtrack_stack.pop_back();
            const StepOutcome out = step_to(state.pose, previous.position(), plan_world);
            next.pose = out.new_pose;
            if (out.distance_traveled <= 1e-12) next.pose.heading_deg = wrap_degrees(state.pose.heading_deg + 180.0);
            entry.collided = out.collided;
            break;
        }
        case ActionKind::stop: next.done = true; break;
    }
    if (option.kind != ActionKind::move_to_waypoint) entry.scene_tags = labels_in_view(plan_world, next.pose, 0);
    entry.pose_after = next.pose;
    next.step_count = state.step_count + 1;
    next.history.push_back(std::move(entry));
    return next;
}

namespace {

std::string render_answer(const DecisionResponse& r) {
    return "Thought: " + r.thought + "\nNew Plan: " + r.plan + "\nAction: " + r.action_id;
}

}  // namespace

DecisionOutcome GreedyBackend::decide(const DecisionRequest&, const DecisionContext& ctx) {
    if (!ctx.state || !ctx.options || !ctx.goal_field) throw BackendError("greedy backend needs a full context");
    const NavState& state = *ctx.state;
    const auto& options = *ctx.options;
    const Vec2 here = state.pose.position();
    const Vec2 goal = ctx.goal_field->goal();

    auto find_kind = [&](ActionKind k) -> const ActionOption* {
        for (const auto& o : options)
            if (o.kind == k) return &o;
        return nullptr;
    };

    DecisionOutcome out;
    const double geo = ctx.goal_field->at(here);
    const ActionOption* chosen = nullptr;
    if (geo <= ctx.success_threshold) {
        chosen = find_kind(ActionKind::stop);
        out.response.thought = "The goal is " + fixed(geo, 2) + " m away, within the success radius.";
        out.response.plan = "Stop here.";
    } else {
        std::vector<Vec2> dead_ends;
        for (const auto& h : state.history)
            if (h.kind == ActionKind::move_back) dead_ends.push_back(h.pose_before.position());
        const ActionOption* best = nullptr;
        double best_d = 0.0;
        for (const auto& o : options) {
            if (o.kind != ActionKind::move_to_waypoint) continue;
            const bool tabu = std::any_of(dead_ends.begin(), dead_ends.end(),
                                          [&](Vec2 d) { return distance(o.target, d) < kDeadEndRadius; });
            if (tabu) continue;
            const double d = distance(o.target, goal);
            if (!best || d < best_d) {
                best = &o;
                best_d = d;
            }
        }
        const double here_d = distance(here, goal);
        const ActionOption* back = find_kind(ActionKind::move_back);
        if (best && best_d < here_d - 1e-9) {
            chosen = best;
            out.response.thought = "Option " + best->id + " brings me closest to the goal.";
            out.response.plan = "Keep heading toward the goal.";
        } else if (back) {
            chosen = back;
            out.response.thought = "No remaining option makes progress; this looks like a dead end.";
            out.response.plan = "Back up and try another route.";
        } else if (best) {
            chosen = best;
            out.response.thought = "No option makes progress; taking the least detour.";
            out.response.plan = "Explore around the obstacle.";
        } else {
            chosen = find_kind(ActionKind::stop);
            out.response.thought = "No usable option is left.";
            out.response.plan = "Stop.";
        }
    }
    if (!chosen) throw BackendError("greedy backend found no usable option");
    out.response.action_id = chosen->id;
    out.raw_responses.push_back(render_answer(out.response));
    return out;
}

DecisionOutcome decide(DecisionBackend& backend, const DecisionRequest& request, const DecisionContext& context) {
    DecisionOutcome out = backend.decide(request, context);
    const bool offered = std::any_of(request.options.begin(), request.options.end(),
                                     [&](const auto& o) { return o.first == out.response.action_id; });
    if (!offered) throw BackendError("backend chose '" + out.response.action_id + "', which was not offered");
    return out;
}

Prediction OracleWaypointSource::predict(const FloorPlan& plan, const AgentPose& pose, int) const {
    const DepthPanorama pano = render_depth_panorama(plan, pose, camera_);
    const ShortestDistanceProfile profile = shortest_distance_profile(pano, camera_);
    Prediction p;
    p.heatmap = oracle_heatmap(profile);
    p.waypoints = nms(p.heatmap);
    return p;
}

Prediction ToyPredictorSource::predict(const FloorPlan& plan, const AgentPose& pose, int step) const {
    const DepthPanorama pano = render_depth_panorama(plan, pose, camera_);
    std::mt19937_64 rng(seed_ ^ (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(step + 1)));
    const PanoFeatures features = synth_features(pano, rng, params_.feature_dim);
    Prediction p;
    p.heatmap = predict_heatmap(features, params_);
    p.waypoints = nms(p.heatmap);
    return p;
}

namespace {

// Binary PGM of one depth view, 8-bit, near = bright.
std::string depth_view_pgm(const DepthImage& view) {
    std::string out = "P5\n" + std::to_string(view.width) + " " + std::to_string(view.height) + "\n255\n";
    for (int r = 0; r < view.height; ++r)
        for (int c = 0; c < view.width; ++c) {
            const double v = std::clamp(view.at(c, r) / kMaxDepthRange, 0.0, 1.0);
            out += static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * (1.0 - v))));
        }
    return out;
}

}  // namespace

EpisodeTrace run_episode(const FloorPlan& plan_world, const Episode& episode, DecisionBackend& backend,
                         const WaypointSource& predictor, const EpisodeOptions& options) {
    EpisodeTrace trace;
    trace.episode_id = episode.id;
    trace.start = episode.start;
    trace.goal = episode.goal;
    trace.instruction = episode.instruction;

    const GoalDistanceField field(plan_world, episode.goal);
    NavState state;
    state.pose = episode.start;

    for (int step = 0; step < options.max_steps && !state.done; ++step) {
        Prediction pred = predictor.predict(plan_world, state.pose, step);
        const auto action_space =
            build_action_space(pred.waypoints, state.pose, plan_world, state, options.backtrack_enabled);
        DecisionRequest request = assemble_prompt(episode.instruction, state, action_space);
        if (options.attach_views) {
            const DepthPanorama pano = render_depth_panorama(plan_world, state.pose, options.camera);
            for (const auto& o : action_space) {
                if (o.kind != ActionKind::move_to_waypoint) continue;
                const int view = static_cast<int>(std::lround(wrap_degrees(o.polar.theta_deg) / 30.0)) % kViews;
                request.images.push_back(
                    {o.id, "image/x-portable-graymap", base64_encode(depth_view_pgm(pano.views[view]))});
            }
        }
        DecisionContext ctx{&plan_world, &episode, &state, &action_space, &field, options.success_threshold};

        DecisionOutcome outcome;
        try {
            outcome = decide(backend, request, ctx);
        } catch (const BackendError& e) {
            trace.aborted = true;
            trace.abort_reason = e.what();
            break;
        }
        const auto it = std::find_if(action_space.begin(), action_space.end(),
                                     [&](const ActionOption& o) { return o.id == outcome.response.action_id; });
        NavState next = apply_action(state, *it, plan_world);
        if (!outcome.response.plan.empty()) next.plan.text = outcome.response.plan;

        StepRecord rec;
        rec.step = next.step_count;
        rec.pose_before = state.pose;
        rec.pose = next.pose;
        rec.action_id = it->id;
        rec.kind = it->kind;
        if (it->kind == ActionKind::move_to_waypoint || it->kind == ActionKind::move_back) rec.target = it->target;
        rec.action_text = it->description;
        rec.collided = next.history.back().collided;
        for (const auto& o : action_space) rec.options.push_back(o.id + ". " + o.description);
        rec.waypoints = pred.waypoints;
        rec.request_digest = sha256_hex(request.prompt);
        rec.response = outcome.response;
        rec.raw_responses = std::move(outcome.raw_responses);
        rec.fallback = outcome.fallback;
        trace.steps.push_back(std::move(rec));
        trace.heatmaps.push_back(pred.heatmap);
        state = std::move(next);
    }
    return trace;
}

std::vector<AgentPose> replay(const FloorPlan& plan_world, const EpisodeTrace& trace) {
    NavState state;
    state.pose = trace.start;
    std::vector<AgentPose> poses{state.pose};
    for (const auto& s : trace.steps) {
        ActionOption o;
        o.id = s.action_id;
        o.kind = s.kind;
        o.description = s.action_text;
        if (s.kind == ActionKind::move_to_waypoint) {
            if (!s.target) throw ValidationError("step " + std::to_string(s.step) + " has no move target");
            o.target = *s.target;
        }
        state = apply_action(state, o, plan_world);
        poses.push_back(state.pose);
    }
    return poses;
}

std::string sha256_hex(const std::string& text) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw Error("SHA-256 digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xF];
    }
    return out;
}

std::string base64_encode(const std::string& bytes) {
    std::string out(4 * ((bytes.size() + 2) / 3) + 1, '\0');
    const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                  reinterpret_cast<const unsigned char*>(bytes.data()), static_cast<int>(bytes.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

}  // namespace waynav
