#include "pedlm/vision.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "httplib.h"
#include "json.hpp"

#include "pedlm/csv.hpp"

namespace pedlm {

using nlohmann::json;

const std::string& vision_prompt_text() {
    static const std::string kPrompt =
        "Describe the urban environment visible in this satellite image, focusing on: "
        "(1) road network layout and organization, (2) building density and types visible, "
        "(3) land use patterns you can identify, (4) spatial organization of the area.";
    return kPrompt;
}

int count_words(const std::string& text) {
    int n = 0;
    bool in_word = false;
    for (char c : text) {
        bool ws = c == ' ' || c == '\t' || c == '\n' || c == '\r';
        if (!ws && !in_word) ++n;
        in_word = !ws;
    }
    return n;
}

namespace {

std::string now_iso8601() {
    auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

const char* corridor_phrase(LandUse lu) {
    switch (lu) {
        case LandUse::commercial_residential: return "commercial corridor";
        case LandUse::educational_residential: return "school-adjacent corridor";
        case LandUse::office_residential: return "office-lined corridor";
        case LandUse::educational_office: return "campus and office corridor";
        case LandUse::greenspace_residential: return "tree-lined corridor";
    }
    return "corridor";
}

std::string building_sentence(LandUse lu, std::size_t variant) {
    switch (lu) {
        case LandUse::commercial_residential:
            return variant % 2 == 0
                       ? "Retail and service buildings with surface parking lots line both "
                         "sides, with convenience stores, clinics, and small businesses among "
                         "the identifiable structures."
                       : "Clearly identifiable retail and service buildings front the roadway, "
                         "and parking lots surround many establishments in an auto-oriented "
                         "layout.";
        case LandUse::educational_residential:
            return "School buildings and their larger footprints sit among detached "
                   "residential structures, so building density steps down quickly away from "
                   "the campus edge.";
        case LandUse::office_residential:
            return "Mid-rise office buildings cluster near the roadway while lower residential "
                   "structures fill the blocks behind, giving the frame a mixed building "
                   "density.";
        case LandUse::educational_office:
            return "Institutional and office buildings dominate the frame, with large "
                   "footprints, shared parking structures, and comparatively few small "
                   "residential buildings.";
        case LandUse::greenspace_residential:
            return "Detached residential buildings of modest footprint sit between stretches "
                   "of open green space, keeping overall building density low.";
    }
    return "Buildings of mixed size line the corridor.";
}

std::string land_use_sentence(LandUse lu) {
    switch (lu) {
        case LandUse::commercial_residential:
            return "Land use patterns in the frame mix commercial parcels along the main road "
                   "with residential blocks immediately behind them.";
        case LandUse::educational_residential:
            return "Land use patterns combine an educational campus with surrounding "
                   "residential streets and scattered neighborhood services.";
        case LandUse::office_residential:
            return "Land use patterns pair office development along the corridor with "
                   "residential subdivisions on the adjoining streets.";
        case LandUse::educational_office:
            return "Land use patterns combine educational facilities with office development, "
                   "leaving little purely residential frontage in view.";
        case LandUse::greenspace_residential:
            return "Land use patterns alternate between public green space and residential "
                   "parcels, with few commercial destinations visible.";
    }
    return "Land use patterns are mixed.";
}

const char* kFillers[] = {
    "Driveways and curb cuts interrupt the sidewalk edge at several points along the "
    "corridor.",
    "Parking areas occupy much of the ground between building fronts and the moving lanes.",
    "The surrounding street grid is coarse, with long distances between marked crossing "
    "opportunities.",
    "Crosswalk markings are visible at the nearest signalized intersection near the corner "
    "of the image.",
    "Landscaped buffers separate the walkway from moving traffic along part of the frontage.",
    "Rooftops of one- and two-story structures dominate the built fabric visible in the "
    "tile.",
    "Utility corridors and open lots leave occasional gaps in the street wall along the "
    "roadway.",
    "Pedestrian desire lines are suggested by worn paths connecting parking areas to the "
    "main road.",
    "Block faces are irregular in length, reflecting incremental development over time.",
    "The roadway alignment is straight through the frame, offering long sight distances in "
    "both directions.",
};

}  // namespace

VisionDescription stub_description(const SiteRecord& site, std::uint64_t seed) {
    Rng rng(derive_seed(seed, "vision:" + site.site_id));
    const std::size_t variant = static_cast<std::size_t>(rng.below(4));

    std::vector<std::string> sentences;

    // (1) road network layout and organization
    std::string lanes_phrase;
    if (site.lanes >= 6)
        lanes_phrase = "a wide multi-lane arterial of " + std::to_string(site.lanes) +
                       " travel lanes";
    else if (site.lanes >= 4)
        lanes_phrase = "a multi-lane roadway of " + std::to_string(site.lanes) + " travel lanes";
    else
        lanes_phrase = "a modest road of " + std::to_string(site.lanes) + " travel lanes";
    sentences.push_back("The image shows a " + std::string(corridor_phrase(site.land_use)) +
                        " along " + site.location_name + " organized around " + lanes_phrase +
                        " with several intersecting local streets.");
    sentences.push_back(
        "The road network layout is linear, with posted speeds of " +
        std::to_string(site.speed_limit) + " mph and " +
        (site.raised_median
             ? std::string("a raised median dividing the opposing directions of travel.")
             : std::string("no median separating the opposing directions of travel.")));

    // (2) building density and types
    sentences.push_back(building_sentence(site.land_use, variant));

    // (3) land use patterns
    sentences.push_back(land_use_sentence(site.land_use));
    sentences.push_back(site.transit_station
                            ? "A public transit station with a marked bus stop stands within "
                              "the frame, anchoring foot traffic to the corridor."
                            : "No transit facilities are visible within the frame, so foot "
                              "traffic is generated mainly by the adjacent parcels.");

    // (4) spatial organization
    sentences.push_back(
        "Sidewalks about " + std::to_string(site.sidewalk_width) +
        " feet wide follow both curb lines, and the spatial organization of the area "
        "concentrates pedestrian movement along the main road rather than the side streets.");
    sentences.push_back(variant % 2 == 0
                            ? "Overall the scene suggests steady pedestrian activity within a "
                              "moderately developed urban setting."
                            : "Overall the arrangement indicates routine pedestrian movement "
                              "through a moderately developed urban setting.");

    std::string text;
    for (const auto& s : sentences) {
        if (!text.empty()) text.push_back(' ');
        text += s;
    }

    // pad with rotating filler sentences until the 150-word floor is met
    const std::size_t n_fillers = sizeof(kFillers) / sizeof(kFillers[0]);
    std::size_t next = static_cast<std::size_t>(rng.below(n_fillers));
    while (count_words(text) < 150) {
        text.push_back(' ');
        text += kFillers[next];
        next = (next + 1) % n_fillers;
    }

    VisionDescription d;
    d.site_id = site.site_id;
    d.text = std::move(text);
    d.word_count = count_words(d.text);
    d.source = VisionSource::stub;
    d.retrieved_at = now_iso8601();
    return d;
}

std::vector<std::string> validate_description(const VisionDescription& d) {
    std::vector<std::string> warnings;
    if (d.word_count < 100 || d.word_count > 300)
        warnings.push_back("length: " + std::to_string(d.word_count) +
                           " words outside the expected 100-300 range");

    std::string lower;
    lower.reserve(d.text.size());
    for (char c : d.text) lower.push_back(static_cast<char>(std::tolower(c)));
    auto mentions_any = [&](std::initializer_list<const char*> keys) {
        for (const char* k : keys)
            if (lower.find(k) != std::string::npos) return true;
        return false;
    };
    if (!mentions_any({"road", "lane", "street", "corridor"}))
        warnings.push_back("coverage: no mention of road network layout");
    if (!mentions_any({"building", "density", "structure"}))
        warnings.push_back("coverage: no mention of building density or types");
    if (!mentions_any({"land use", "residential", "commercial", "retail", "office",
                       "green space", "educational"}))
        warnings.push_back("coverage: no mention of land use patterns");
    if (!mentions_any({"spatial organization", "arrangement", "organized", "layout"}))
        warnings.push_back("coverage: no mention of spatial organization");
    return warnings;
}

// ----------------------------- external service -----------------------------

namespace {

struct ParsedUrl {
    std::string scheme_host_port;  // httplib client target
    std::string path;
};

ParsedUrl parse_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw ConfigError("endpoint_url must start with http:// or https://: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    ParsedUrl p;
    if (path_start == std::string::npos) {
        p.scheme_host_port = url;
        p.path = "/";
    } else {
        p.scheme_host_port = url.substr(0, path_start);
        p.path = url.substr(path_start);
    }
    return p;
}

}  // namespace

std::string parse_chat_completion_text(const std::string& body, const std::string& endpoint) {
    json j = json::parse(body, nullptr, false);
    if (j.is_discarded())
        throw MalformedResponseError("malformed response from " + endpoint +
                                     ": body is not valid JSON");
    if (j.contains("choices") && j["choices"].is_array() && !j["choices"].empty()) {
        const auto& c = j["choices"][0];
        if (c.contains("message") && c["message"].contains("content") &&
            c["message"]["content"].is_string())
            return c["message"]["content"].get<std::string>();
        if (c.contains("text") && c["text"].is_string()) return c["text"].get<std::string>();
    }
    throw MalformedResponseError("malformed response from " + endpoint +
                                 ": no text payload at choices[0]");
}

VisionDescription fetch_description(const VisionServiceConfig& cfg, const SiteRecord& site,
                                    const std::string& audit_dir) {
    if (cfg.timeout_s <= 0) throw ConfigError("vision service timeout must be > 0");
    ParsedUrl url = parse_url(cfg.endpoint_url);

    httplib::Client client(url.scheme_host_port);
    client.set_connection_timeout(std::chrono::milliseconds(
        static_cast<int>(cfg.timeout_s * 1000)));
    client.set_read_timeout(std::chrono::milliseconds(static_cast<int>(cfg.timeout_s * 1000)));

    httplib::Headers headers;
    if (!cfg.api_key_env_var.empty()) {
        const char* key = std::getenv(cfg.api_key_env_var.c_str());
        if (!key || !*key)
            throw ConfigError("vision service credential missing: environment variable " +
                              cfg.api_key_env_var + " is not set");
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    json body = {
        {"model", cfg.model_name},
        {"messages",
         {{{"role", "user"},
           {"content",
            {{{"type", "text"}, {"text", vision_prompt_text()}},
             {{"type", "image_url"}, {"image_url", {{"url", cfg.image_reference}}}}}}}}},
        {"max_tokens", 512},
    };

    auto res = client.Post(url.path, headers, body.dump(), "application/json");
    if (!res) {
        std::ostringstream msg;
        msg << "transport failure contacting " << cfg.endpoint_url << ": "
            << httplib::to_string(res.error());
        throw TransportError(msg.str());
    }
    if (res->status < 200 || res->status >= 300)
        throw TransportError("vision service " + cfg.endpoint_url + " returned status " +
                             std::to_string(res->status));

    if (!audit_dir.empty()) {
        std::filesystem::create_directories(audit_dir);
        write_text_file(audit_dir + "/" + site.site_id + ".response.json", res->body);
    }

    VisionDescription d;
    d.site_id = site.site_id;
    d.text = parse_chat_completion_text(res->body, cfg.endpoint_url);
    d.word_count = count_words(d.text);
    d.source = VisionSource::external;
    d.retrieved_at = now_iso8601();
    return d;
}

// ----------------------------- cache -----------------------------

void save_description_cache(const std::string& path, const std::vector<VisionDescription>& ds) {
    std::ostringstream out;
    for (const auto& d : ds) {
        json j = {{"site_id", d.site_id},
                  {"source", d.source == VisionSource::stub ? "stub" : "external"},
                  {"text", d.text},
                  {"retrieved_at", d.retrieved_at}};
        out << j.dump() << "\n";
    }
    write_text_file(path, out.str());
}

std::vector<VisionDescription> load_description_cache(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open vision cache: " + path);
    std::vector<VisionDescription> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) throw DataError("vision cache: invalid JSON line in " + path);
        VisionDescription d;
        d.site_id = j.at("site_id").get<std::string>();
        d.text = j.at("text").get<std::string>();
        d.source = j.at("source").get<std::string>() == "external" ? VisionSource::external
                                                                   : VisionSource::stub;
        d.retrieved_at = j.value("retrieved_at", "");
        d.word_count = count_words(d.text);
        out.push_back(std::move(d));
    }
    return out;
}

}  // namespace pedlm
