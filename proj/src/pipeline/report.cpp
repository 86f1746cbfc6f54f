#include "shelfscan/error.hpp"
#include "shelfscan/pipeline.hpp"

#include <json.hpp>

namespace shelfscan {

using nlohmann::json;

namespace {

json rejections_json(const std::array<std::size_t, 6>& counts) {
    json j = json::object();
    for (FilterId id : kAllFilters) {
        const std::size_t c = counts[static_cast<int>(id) - 1];
        if (c) j[std::string(filter_name(id))] = c;
    }
    return j;
}

std::array<std::size_t, 6> rejections_from(const json& j) {
    std::array<std::size_t, 6> out{};
    for (FilterId id : kAllFilters) {
        const auto it = j.find(std::string(filter_name(id)));
        if (it != j.end()) out[static_cast<int>(id) - 1] = it->get<std::size_t>();
    }
    return out;
}

}  // namespace

std::string report_to_json(const DetectionReport& report, int indent) {
    json j;
    j["scene"] = report.scene_id;
    j["products"] = report.products;
    json occs = json::array();
    for (const Occurrence& o : report.occurrences) {
        occs.push_back({{"pattern", o.pattern_id},
                        {"entry", o.entry_id},
                        {"center", {o.envelope.center_x, o.envelope.center_y}},
                        {"size", {o.envelope.width, o.envelope.height}},
                        {"rotation", o.envelope.rotation},
                        {"adjacency_sum", o.adjacency_sum},
                        {"normalized_adjacency", o.normalized_adjacency},
                        {"phase", o.phase},
                        {"votes", o.vote_count}});
    }
    j["occurrences"] = std::move(occs);
    json diags = json::array();
    for (const PatternDiagnostics& d : report.diagnostics) {
        diags.push_back({{"entry", d.entry_id},
                         {"product", d.product_id},
                         {"phase", d.phase},
                         {"scale_step", d.scale_step},
                         {"pattern_size", {d.pattern_w, d.pattern_h}},
                         {"pattern_features", d.pattern_features},
                         {"votes", d.votes},
                         {"propositions", d.propositions},
                         {"propositions_tried", d.propositions_tried},
                         {"accepted", d.accepted},
                         {"rejected_pass1", rejections_json(d.rejections_pass1)},
                         {"rejected_pass2", rejections_json(d.rejections_pass2)}});
    }
    j["diagnostics"] = std::move(diags);
    return j.dump(indent);
}

DetectionReport report_from_json(const std::string& text) {
    DetectionReport r;
    try {
        const json j = json::parse(text);
        r.scene_id = j.at("scene").get<std::string>();
        r.products = j.value("products", std::vector<std::string>{});
        for (const json& o : j.at("occurrences")) {
            Occurrence occ;
            occ.pattern_id = o.at("pattern").get<std::string>();
            occ.entry_id = o.value("entry", occ.pattern_id);
            occ.envelope.center_x = o.at("center").at(0).get<double>();
            occ.envelope.center_y = o.at("center").at(1).get<double>();
            occ.envelope.width = o.at("size").at(0).get<double>();
            occ.envelope.height = o.at("size").at(1).get<double>();
            occ.envelope.rotation = o.at("rotation").get<double>();
            occ.adjacency_sum = o.at("adjacency_sum").get<double>();
            occ.normalized_adjacency = o.at("normalized_adjacency").get<double>();
            occ.phase = o.at("phase").get<int>();
            occ.vote_count = o.at("votes").get<int>();
            r.occurrences.push_back(std::move(occ));
        }
        if (const auto it = j.find("diagnostics"); it != j.end()) {
            for (const json& d : *it) {
                PatternDiagnostics pd;
                pd.entry_id = d.at("entry").get<std::string>();
                pd.product_id = d.at("product").get<std::string>();
                pd.phase = d.at("phase").get<int>();
                pd.scale_step = d.at("scale_step").get<int>();
                pd.pattern_w = d.at("pattern_size").at(0).get<int>();
                pd.pattern_h = d.at("pattern_size").at(1).get<int>();
                pd.pattern_features = d.at("pattern_features").get<std::size_t>();
                pd.votes = d.at("votes").get<std::size_t>();
                pd.propositions = d.at("propositions").get<std::size_t>();
                pd.propositions_tried = d.at("propositions_tried").get<std::size_t>();
                pd.accepted = d.at("accepted").get<std::size_t>();
                pd.rejections_pass1 = rejections_from(d.at("rejected_pass1"));
                pd.rejections_pass2 = rejections_from(d.at("rejected_pass2"));
                r.diagnostics.push_back(std::move(pd));
            }
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("detection report: ") + e.what());
    }
    return r;
}

}  // namespace shelfscan
