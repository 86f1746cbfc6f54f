#include "shelfscan/error.hpp"
#include "shelfscan/features.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace shelfscan {

using nlohmann::json;

bool FeaturePoint::operator==(const FeaturePoint& o) const {
    return x == o.x && y == o.y && scale == o.scale && orientation == o.orientation && descriptor == o.descriptor &&
           color.r == o.color.r && color.g == o.color.g && color.b == o.color.b && luminance == o.luminance;
}

namespace {

std::string point_error(std::size_t idx, const std::string& what) {
    return "feature point " + std::to_string(idx) + ": " + what;
}

}  // namespace

void validate_feature_set(const FeatureSet& fs) {
    if (fs.image_w < 1 || fs.image_h < 1) throw ParseError("feature set: image dimensions must be positive");
    if (fs.descriptor_len < 1) throw ParseError("feature set: descriptor_len must be positive");
    for (std::size_t i = 0; i < fs.points.size(); ++i) {
        const FeaturePoint& p = fs.points[i];
        if (static_cast<int>(p.descriptor.size()) != fs.descriptor_len) {
            throw ParseError(point_error(i, "descriptor length " + std::to_string(p.descriptor.size()) +
                                                " does not match descriptor_len " + std::to_string(fs.descriptor_len)));
        }
        if (!(p.x >= 0 && p.y >= 0 && p.x <= fs.image_w - 1 && p.y <= fs.image_h - 1)) {
            throw ParseError(point_error(i, "position outside the image bounds"));
        }
        if (!(p.scale > 0) || !std::isfinite(p.scale)) throw ParseError(point_error(i, "scale must be positive"));
        if (!(p.orientation >= 0 && p.orientation < 360)) {
            throw ParseError(point_error(i, "orientation must be in [0, 360)"));
        }
        for (float v : p.descriptor) {
            if (!(v >= 0) || !std::isfinite(v)) throw ParseError(point_error(i, "descriptor values must be non-negative"));
        }
        if (p.luminance < 0 || p.luminance > 255) throw ParseError(point_error(i, "luminance out of range"));
    }
}

std::string features_to_json(const FeatureSet& fs) {
    json doc;
    doc["source_id"] = fs.source_id;
    doc["width"] = fs.image_w;
    doc["height"] = fs.image_h;
    doc["descriptor_len"] = fs.descriptor_len;
    json pts = json::array();
    for (const FeaturePoint& p : fs.points) {
        pts.push_back({{"x", p.x},
                       {"y", p.y},
                       {"scale", p.scale},
                       {"orientation", p.orientation},
                       {"descriptor", p.descriptor},
                       {"rgb", {p.color.r, p.color.g, p.color.b}},
                       {"luminance", p.luminance}});
    }
    doc["points"] = std::move(pts);
    // nlohmann emits the shortest representation that round-trips exactly
    return doc.dump();
}

FeatureSet features_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("feature file is not valid JSON: ") + e.what());
    }
    FeatureSet fs;
    try {
        if (!doc.is_object()) throw ParseError("feature file: top level must be an object");
        fs.source_id = doc.at("source_id").get<std::string>();
        fs.image_w = doc.at("width").get<int>();
        fs.image_h = doc.at("height").get<int>();
        fs.descriptor_len = doc.at("descriptor_len").get<int>();
        const json& pts = doc.at("points");
        if (!pts.is_array()) throw ParseError("feature file: 'points' must be an array");
        fs.points.reserve(pts.size());
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const json& jp = pts[i];
            try {
                FeaturePoint p;
                p.x = jp.at("x").get<double>();
                p.y = jp.at("y").get<double>();
                p.scale = jp.at("scale").get<double>();
                p.orientation = jp.at("orientation").get<double>();
                p.descriptor = jp.at("descriptor").get<std::vector<float>>();
                const auto rgb = jp.at("rgb").get<std::vector<int>>();
                if (rgb.size() != 3) throw ParseError(point_error(i, "'rgb' must have three entries"));
                for (int v : rgb) {
                    if (v < 0 || v > 255) throw ParseError(point_error(i, "'rgb' entries must be in [0, 255]"));
                }
                p.color = make_color_sample(rgb[0], rgb[1], rgb[2]);
                p.luminance = jp.at("luminance").get<int>();
                fs.points.push_back(std::move(p));
            } catch (const json::exception& e) {
                throw ParseError(point_error(i, std::string("schema violation: ") + e.what()));
            }
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("feature file schema violation: ") + e.what());
    }
    validate_feature_set(fs);
    return fs;
}

void write_features(const FeatureSet& fs, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write feature file '" + path.string() + "'");
    out << features_to_json(fs) << '\n';
    if (!out) throw IoError("error writing feature file '" + path.string() + "'");
}

FeatureSet read_features(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open feature file '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return features_from_json(ss.str());
}

}  // namespace shelfscan
