#include "shelfscan/config.hpp"
#include "shelfscan/error.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace shelfscan {

using nlohmann::json;

namespace {

/// Reads known keys out of one JSON object and reports whatever is left.
class Section {
public:
    Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
        if (!j_.is_object()) throw ConfigError("config: '" + name_ + "' must be an object");
    }

    template <typename T>
    void read(const char* key, T& out) {
        seen_.insert(key);
        const auto it = j_.find(key);
        if (it == j_.end()) return;
        try {
            if constexpr (std::is_same_v<T, bool>) {
                if (!it->is_boolean()) throw ConfigError("");
            } else if constexpr (std::is_arithmetic_v<T>) {
                if (!it->is_number()) throw ConfigError("");
                if constexpr (std::is_integral_v<T>) {
                    if (!it->is_number_integer() && !it->is_number_unsigned()) throw ConfigError("");
                }
            } else {
                if (!it->is_string()) throw ConfigError("");
            }
            out = it->get<T>();
        } catch (const std::exception&) {
            throw ConfigError("config: '" + name_ + "." + key + "' has the wrong type");
        }
    }

    const json* child(const char* key) {
        seen_.insert(key);
        const auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    const std::string& name() const { return name_; }

    void finish() const {
        for (const auto& [key, value] : j_.items()) {
            if (!key.empty() && key[0] == '#') continue;
            if (!seen_.count(key)) throw ConfigError("config: unknown key '" + name_ + "." + key + "'");
        }
    }

private:
    const json& j_;
    std::string name_;
    std::set<std::string> seen_;
};

void read_extractor(const json& j, ExtractorConfig& c) {
    Section s(j, "extractor");
    s.read("octaves", c.octaves);
    s.read("scales_per_octave", c.scales_per_octave);
    s.read("contrast_threshold", c.contrast_threshold);
    s.read("edge_threshold", c.edge_threshold);
    s.read("base_sigma", c.base_sigma);
    s.read("assumed_blur", c.assumed_blur);
    s.read("upsample", c.upsample);
    s.finish();
}

void read_index(const json& j, IndexConfig& c) {
    Section s(j, "matching.index");
    s.read("trees", c.trees);
    s.read("checks", c.checks);
    s.read("seed", c.seed);
    s.finish();
}

void read_matching(const json& j, MatchConfig& c) {
    Section s(j, "matching");
    s.read("scale_quotient_min", c.scale_quotient_min);
    s.read("scale_quotient_max", c.scale_quotient_max);
    s.read("hue_threshold", c.hue_threshold);
    s.read("lightness_min", c.lightness_min);
    s.read("lightness_max", c.lightness_max);
    s.read("rgb_spread_min", c.rgb_spread_min);
    s.read("color_filter", c.color_filter);
    if (const json* idx = s.child("index")) read_index(*idx, c.index);
    s.finish();
}

const char* scale_reference_name(ScaleVarianceReference r) {
    return r == ScaleVarianceReference::MeanOfSquares ? "mean_of_squares" : "square_of_mean";
}

const char* ncc_rule_name(NccChannelRule r) {
    return r == NccChannelRule::AllChannels ? "all_channels" : "mean_of_channels";
}

const char* ncc_crop_name(NccCrop c) { return c == NccCrop::Rectified ? "rectified" : "axis_aligned"; }

void read_cascade(const json& j, CascadeConfig& c) {
    Section s(j, "cascade");
    s.read("min_votes", c.min_votes);
    s.read("adjacency_divisor", c.adjacency_divisor);
    s.read("scale_var_factor", c.scale_var_factor);
    s.read("rot_var_factor", c.rot_var_factor);
    s.read("hamming_reject_frac", c.hamming_reject_frac);
    s.read("ncc_threshold", c.ncc_threshold);
    s.read("ncc_patch", c.ncc_patch);
    std::string ref = scale_reference_name(c.scale_reference);
    s.read("scale_reference", ref);
    if (ref == "mean_of_squares") {
        c.scale_reference = ScaleVarianceReference::MeanOfSquares;
    } else if (ref == "square_of_mean") {
        c.scale_reference = ScaleVarianceReference::SquareOfMean;
    } else {
        throw ConfigError("config: cascade.scale_reference must be 'mean_of_squares' or 'square_of_mean'");
    }
    std::string rule = ncc_rule_name(c.ncc_rule);
    s.read("ncc_rule", rule);
    if (rule == "all_channels") {
        c.ncc_rule = NccChannelRule::AllChannels;
    } else if (rule == "mean_of_channels") {
        c.ncc_rule = NccChannelRule::MeanOfChannels;
    } else {
        throw ConfigError("config: cascade.ncc_rule must be 'all_channels' or 'mean_of_channels'");
    }
    std::string crop = ncc_crop_name(c.ncc_crop);
    s.read("ncc_crop", crop);
    if (crop == "rectified") {
        c.ncc_crop = NccCrop::Rectified;
    } else if (crop == "axis_aligned") {
        c.ncc_crop = NccCrop::AxisAligned;
    } else {
        throw ConfigError("config: cascade.ncc_crop must be 'rectified' or 'axis_aligned'");
    }
    if (const json* en = s.child("enabled")) {
        Section e(*en, "cascade.enabled");
        for (FilterId id : kAllFilters) {
            bool on = c.is_enabled(id);
            e.read(std::string(filter_name(id)).c_str(), on);
            c.set_enabled(id, on);
        }
        e.finish();
    }
    s.finish();
}

void read_pipeline(const json& j, PipelineConfig& c) {
    Section s(j, "pipeline");
    s.read("min_dim", c.min_dim);
    s.read("shrink", c.shrink);
    s.read("iou_threshold", c.iou_threshold);
    s.read("max_propositions", c.max_propositions);
    s.read("quality", c.quality);
    s.read("two_phase", c.two_phase);
    s.read("debug_dir", c.debug_dir);
    s.read("debug_sigma", c.debug_sigma);
    s.finish();
}

}  // namespace

RunConfig run_config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: not valid JSON: ") + e.what());
    }
    RunConfig cfg;
    Section root(j, "config");
    if (const json* e = root.child("extractor")) read_extractor(*e, cfg.extractor);
    if (const json* m = root.child("matching")) read_matching(*m, cfg.matching);
    if (const json* c = root.child("cascade")) read_cascade(*c, cfg.cascade);
    if (const json* p = root.child("pipeline")) read_pipeline(*p, cfg.pipeline);
    root.finish();
    try {
        validate(cfg);
    } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return run_config_from_json(ss.str());
}

std::string run_config_to_json(const RunConfig& cfg, int indent) {
    const auto& e = cfg.extractor;
    const auto& m = cfg.matching;
    const auto& c = cfg.cascade;
    const auto& p = cfg.pipeline;
    json enabled = json::object();
    for (FilterId id : kAllFilters) enabled[std::string(filter_name(id))] = c.is_enabled(id);
    json j = {
        {"extractor",
         {{"octaves", e.octaves},
          {"scales_per_octave", e.scales_per_octave},
          {"contrast_threshold", e.contrast_threshold},
          {"edge_threshold", e.edge_threshold},
          {"base_sigma", e.base_sigma},
          {"assumed_blur", e.assumed_blur},
          {"upsample", e.upsample}}},
        {"matching",
         {{"scale_quotient_min", m.scale_quotient_min},
          {"scale_quotient_max", m.scale_quotient_max},
          {"hue_threshold", m.hue_threshold},
          {"lightness_min", m.lightness_min},
          {"lightness_max", m.lightness_max},
          {"rgb_spread_min", m.rgb_spread_min},
          {"color_filter", m.color_filter},
          {"index", {{"trees", m.index.trees}, {"checks", m.index.checks}, {"seed", m.index.seed}}}}},
        {"cascade",
         {{"min_votes", c.min_votes},
          {"adjacency_divisor", c.adjacency_divisor},
          {"scale_var_factor", c.scale_var_factor},
          {"rot_var_factor", c.rot_var_factor},
          {"hamming_reject_frac", c.hamming_reject_frac},
          {"ncc_threshold", c.ncc_threshold},
          {"ncc_patch", c.ncc_patch},
          {"scale_reference", scale_reference_name(c.scale_reference)},
          {"ncc_rule", ncc_rule_name(c.ncc_rule)},
          {"ncc_crop", ncc_crop_name(c.ncc_crop)},
          {"enabled", enabled}}},
        {"pipeline",
         {{"min_dim", p.min_dim},
          {"shrink", p.shrink},
          {"iou_threshold", p.iou_threshold},
          {"max_propositions", p.max_propositions},
          {"quality", p.quality},
          {"two_phase", p.two_phase},
          {"debug_dir", p.debug_dir},
          {"debug_sigma", p.debug_sigma}}},
    };
    return j.dump(indent);
}

bool operator==(const RunConfig& a, const RunConfig& b) {
    return run_config_to_json(a, -1) == run_config_to_json(b, -1);
}

}  // namespace shelfscan
