#include "waynav/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "waynav/errors.hpp"

namespace waynav {

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

std::string escape_xml(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string render_trajectory_svg(const FloorPlan& plan, const std::vector<EpisodeTrace>& traces) {
    const Bounds& b = plan.bounds;
    const double s = kSvgPixelsPerMetre;
    const double width = (b.max_x - b.min_x) * s;
    const double height = (b.max_z - b.min_z) * s;
    // +z points up on the page.
    auto px = [&](Vec2 p) { return num((p.x - b.min_x) * s) + "," + num((b.max_z - p.z) * s); };
    auto x_of = [&](Vec2 p) { return num((p.x - b.min_x) * s); };
    auto y_of = [&](Vec2 p) { return num((b.max_z - p.z) * s); };

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\"" << num(height)
      << "\" viewBox=\"0 0 " << num(width) << " " << num(height) << "\">\n";
    o << "<rect x=\"0\" y=\"0\" width=\"" << num(width) << "\" height=\"" << num(height) << "\" fill=\"#ffffff\"/>\n";
    o << "<g id=\"walls\" stroke=\"#222222\" stroke-width=\"4\" stroke-linecap=\"round\">\n";
    for (const auto& w : plan.walls)
        o << "<line x1=\"" << x_of(w.a) << "\" y1=\"" << y_of(w.a) << "\" x2=\"" << x_of(w.b) << "\" y2=\"" << y_of(w.b)
          << "\"/>\n";
    o << "</g>\n<g id=\"objects\" fill=\"#8fbc8f\" font-size=\"10\">\n";
    for (const auto& obj : plan.objects)
        o << "<circle cx=\"" << x_of(obj.position) << "\" cy=\"" << y_of(obj.position) << "\" r=\""
          << num(obj.radius * s) << "\"><title>" << escape_xml(obj.label) << "</title></circle>\n";
    o << "</g>\n";
    for (const auto& t : traces) {
        const auto poses = t.poses();
        o << "<g id=\"episode-" << escape_xml(t.episode_id) << "\">\n";
        o << "<circle class=\"goal\" cx=\"" << x_of(t.goal) << "\" cy=\"" << y_of(t.goal) << "\" r=\"6\" fill=\"#2e8b57\"/>\n";
        o << "<circle class=\"start\" cx=\"" << x_of(t.start.position()) << "\" cy=\"" << y_of(t.start.position())
          << "\" r=\"5\" fill=\"#1e90ff\"/>\n";
        o << "<polyline fill=\"none\" stroke=\"#1e90ff\" stroke-width=\"2\" points=\"";
        for (std::size_t i = 0; i < poses.size(); ++i) o << (i ? " " : "") << px(poses[i].position());
        o << "\"/>\n";
        for (const auto& step : t.steps)
            if (step.collided)
                o << "<circle class=\"collision\" cx=\"" << x_of(step.pose.position()) << "\" cy=\""
                  << y_of(step.pose.position()) << "\" r=\"4\" fill=\"#dc143c\"/>\n";
        o << "</g>\n";
    }
    o << "</svg>\n";
    return o.str();
}

Rgb heat_colour(double v) {
    const double t = std::clamp(std::isfinite(v) ? v : 0.0, 0.0, 1.0);
    auto byte = [](double x) { return static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(x, 0.0, 1.0))); };
    return {byte(3.0 * t), byte(3.0 * t - 1.0), byte(3.0 * t - 2.0)};
}

RgbImage render_heatmap_image(const PolarHeatmap& heatmap, const std::vector<Waypoint>& waypoints, int size) {
    if (size < 25) throw ConfigError("heatmap image size must be at least 25 pixels");
    RgbImage img{size, size, std::vector<std::uint8_t>(static_cast<std::size_t>(size) * size * 3, 0)};
    const double c = 0.5 * (size - 1);
    const double px_per_m = c / kMaxWaypointDist;
    auto put = [&](int x, int y, Rgb rgb) {
        if (x < 0 || y < 0 || x >= size || y >= size) return;
        const std::size_t i = (static_cast<std::size_t>(y) * size + x) * 3;
        img.pixels[i] = rgb[0];
        img.pixels[i + 1] = rgb[1];
        img.pixels[i + 2] = rgb[2];
    };
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) {
            const Vec2 off{(x - c) / px_per_m, (c - y) / px_per_m};
            const double r = norm(off);
            if (r <= 0.0 || r > kMaxWaypointDist) continue;
            const int k = static_cast<int>(bearing_of(off) / kBinDegrees) % kAngleBins;
            const int j = std::clamp(static_cast<int>(std::ceil(r / kDistStep - 1e-9)) - 1, 0, kDistBins - 1);
            put(x, y, heat_colour(heatmap.at(k, j)));
        }
    for (const auto& w : waypoints) {
        const Vec2 off = polar_to_offset(polar_to_metric(w));
        const int x = static_cast<int>(std::lround(c + off.x * px_per_m));
        const int y = static_cast<int>(std::lround(c - off.z * px_per_m));
        for (int dy = -2; dy <= 2; ++dy)
            for (int dx = -2; dx <= 2; ++dx) put(x + dx, y + dy, {0, 255, 255});
    }
    return img;
}

std::string encode_ppm(const RgbImage& image) {
    std::string out = "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
    out.append(reinterpret_cast<const char*>(image.pixels.data()), image.pixels.size());
    return out;
}

}  // namespace waynav
