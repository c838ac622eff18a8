#include "pedlm/prompting.hpp"

#include <algorithm>
#include <sstream>

#include "json.hpp"

#include "pedlm/csv.hpp"

namespace pedlm {

using nlohmann::json;

const char* component_display_name(PromptComponentKind k) {
    switch (k) {
        case PromptComponentKind::pedestrian_demographics: return "Pedestrian Demographics";
        case PromptComponentKind::traffic_control: return "Traffic Control";
        case PromptComponentKind::roadway_geometry: return "Roadway Geometry";
        case PromptComponentKind::built_environment_vision: return "Built Environment (Vision)";
        case PromptComponentKind::land_use_transit: return "Land Use & Transit";
        case PromptComponentKind::environmental_conditions: return "Environmental Conditions";
        case PromptComponentKind::domain_knowledge_context: return "Domain Knowledge Context";
    }
    return "?";
}

const std::string& Prompt::component_text(PromptComponentKind k) const {
    for (const auto& [kind, text] : components)
        if (kind == k) return text;
    throw DataError(std::string("prompt has no component ") + component_display_name(k));
}

void Prompt::set_component_text(PromptComponentKind k, std::string text) {
    for (auto& [kind, t] : components)
        if (kind == k) {
            t = std::move(text);
            return;
        }
    throw DataError(std::string("prompt has no component ") + component_display_name(k));
}

// ----------------------------- display strings -----------------------------

namespace {

const char* display(AgeGroup v) {
    switch (v) {
        case AgeGroup::child: return "child";
        case AgeGroup::adult: return "adult";
        case AgeGroup::senior: return "senior";
        case AgeGroup::unsure: return "unsure";
    }
    return "?";
}

const char* display(Gender v) {
    switch (v) {
        case Gender::male: return "male";
        case Gender::female: return "female";
        case Gender::unsure: return "unsure";
    }
    return "?";
}

const char* display(WalkingContext v) {
    return v == WalkingContext::alone ? "alone" : "in a group";
}

const char* display(Weather v) {
    switch (v) {
        case Weather::clear_sunny: return "clear or sunny";
        case Weather::partly_cloudy: return "partly cloudy";
        case Weather::cloudy: return "cloudy";
        case Weather::rain_drizzle: return "rain or drizzle";
    }
    return "?";
}

const char* display(GreenOnsetInterval v) {
    switch (v) {
        case GreenOnsetInterval::zero: return "0 seconds";
        case GreenOnsetInterval::short_1_85s: return "1 to 85 seconds";
        case GreenOnsetInterval::long_gt85s: return "more than 85 seconds";
        case GreenOnsetInterval::missing: return "unknown";
    }
    return "?";
}

const char* display(GreenInterval v) {
    switch (v) {
        case GreenInterval::zero: return "0 seconds";
        case GreenInterval::short_1_40s: return "1 to 40 seconds";
        case GreenInterval::long_gt40s: return "more than 40 seconds";
        case GreenInterval::missing: return "unknown";
    }
    return "?";
}

const char* display(LandUse v) {
    switch (v) {
        case LandUse::educational_residential: return "educational and residential";
        case LandUse::commercial_residential: return "commercial and residential";
        case LandUse::office_residential: return "office and residential";
        case LandUse::educational_office: return "educational and office";
        case LandUse::greenspace_residential: return "green space and residential";
    }
    return "?";
}

const char* yes_no(bool v) { return v ? "yes" : "no"; }
const char* present_absent(bool v) { return v ? "present" : "absent"; }

std::string demographics_text(const PedestrianObservation& o) {
    std::string t;
    t += "Age group: " + std::string(display(o.age_group)) + "\n";
    t += "Gender: " + std::string(display(o.gender)) + "\n";
    t += "Walking context: " + std::string(display(o.walking_context));
    return t;
}

std::string environmental_text(const PedestrianObservation& o) {
    std::string t;
    t += "Weather condition: " + std::string(display(o.weather)) + "\n";
    t += "Lighting at intersection: " + std::string(present_absent(o.lighting_intersection)) + "\n";
    t += "Lighting at mid-block: " + std::string(present_absent(o.lighting_midblock));
    return t;
}

std::string roadway_text(const SiteRecord& s) {
    std::string t;
    t += "Number of lanes at mid-block: " + std::to_string(s.lanes) + "\n";
    t += "Speed limit: " + std::to_string(s.speed_limit) + " mph\n";
    t += "Total width of sidewalk: " + std::to_string(s.sidewalk_width) + " ft\n";
    t += "Raised median: " + std::string(present_absent(s.raised_median));
    return t;
}

std::string traffic_text(const PedestrianObservation& o) {
    std::string t;
    t += "Time interval between consecutive onsets of green time for crossing: " +
         std::string(display(o.green_onset_interval)) + "\n";
    t += "Green interval for crossing: " + std::string(display(o.green_interval)) + "\n";
    t += "Pedestrian push-button available: " + std::string(yes_no(o.push_button_available)) + "\n";
    t += "Push-button affecting crossing time: ";
    t += o.push_button_affects_time.has_value() ? yes_no(*o.push_button_affects_time)
                                                : "not applicable";
    t += "\n";
    t += "Left turn protection phase: " + std::string(yes_no(o.left_turn_protection));
    return t;
}

std::string land_use_text(const SiteRecord& s) {
    std::string t;
    t += "Land use: " + std::string(display(s.land_use)) + "\n";
    t += "Public transit station: " + std::string(present_absent(s.transit_station));
    return t;
}

const char* kTaskInstruction =
    "Decide whether this pedestrian crosses at the intersection or at mid-block, where 0 "
    "means an intersection crossing and 1 means a mid-block crossing. Respond with exactly "
    "one token: <INTERSECTION> for an intersection crossing or <MIDBLOCK> for a mid-block "
    "crossing.";

}  // namespace

// ----------------------------- knowledge block -----------------------------

std::string knowledge_block(const KnowledgeConfig& cfg) {
    std::vector<std::string> sentences;
    if (cfg.individual_age)
        sentences.push_back(
            "Older adults typically demonstrate higher safety awareness and delay tolerance, "
            "which correlates with a lower probability of mid-block crossing.");
    if (cfg.individual_gender)
        sentences.push_back(
            "Male pedestrians exhibit a higher tendency for mid-block crossing compared to "
            "females.");
    if (cfg.individual_walking_context)
        sentences.push_back(
            "Pedestrians walking alone are statistically more likely to cross at mid-block "
            "locations than those walking in groups.");
    if (cfg.environment_weather)
        sentences.push_back(
            "Adverse weather conditions elevate the perceived cost of waiting at "
            "intersections, increasing the utility of mid-block crossing as a time-saving "
            "strategy.");
    if (cfg.environment_lighting)
        sentences.push_back(
            "Adequate sight distance and lighting encourage mid-block crossings by improving "
            "perceived safety.");
    if (cfg.environment_land_use_transit)
        sentences.push_back(
            "Certain land use interactions such as office-residential generate lower crossing "
            "demand, while pedestrian generators like bus stops concentrate crossing "
            "activities.");

    std::string out;
    for (const auto& s : sentences) {
        if (!out.empty()) out.push_back(' ');
        out += s;
    }
    return out;
}

// ----------------------------- prompt assembly -----------------------------

Prompt build_prompt(const PedestrianObservation& obs, const SiteRecord& site,
                    const VisionDescription& vision, const KnowledgeConfig& cfg,
                    std::vector<FewShotExample> few_shot) {
    if (obs.site_id != site.site_id)
        throw DataError("build_prompt: observation " + obs.obs_id + " belongs to site " +
                        obs.site_id + ", got site record " + site.site_id);
    if (vision.site_id != site.site_id)
        throw DataError("build_prompt: vision description is for site " + vision.site_id +
                        ", expected " + site.site_id);

    Prompt p;
    p.obs_id = obs.obs_id;
    p.components = {
        {PromptComponentKind::domain_knowledge_context, knowledge_block(cfg)},
        {PromptComponentKind::pedestrian_demographics, demographics_text(obs)},
        {PromptComponentKind::environmental_conditions, environmental_text(obs)},
        {PromptComponentKind::roadway_geometry, roadway_text(site)},
        {PromptComponentKind::traffic_control, traffic_text(obs)},
        {PromptComponentKind::land_use_transit, land_use_text(site)},
        {PromptComponentKind::built_environment_vision, vision.text},
    };
    p.task_instruction = kTaskInstruction;
    p.few_shot_examples = std::move(few_shot);
    return p;
}

std::string render_exemplar_body(const PedestrianObservation& obs, const SiteRecord& site) {
    std::string t;
    t += "### Pedestrian Demographics\n" + demographics_text(obs) + "\n";
    t += "### Environmental Conditions\n" + environmental_text(obs) + "\n";
    t += "### Roadway Geometry\n" + roadway_text(site) + "\n";
    t += "### Traffic Control\n" + traffic_text(obs) + "\n";
    t += "### Land Use & Transit\n" + land_use_text(site);
    return t;
}

std::string render(const Prompt& p) {
    std::string out;
    for (std::size_t i = 0; i < p.few_shot_examples.size(); ++i) {
        const auto& ex = p.few_shot_examples[i];
        out += "### Example " + std::to_string(i + 1) + "\n";
        out += ex.text + "\n";
        out += "Answer: " + ex.answer_token + "\n\n";
    }
    for (const auto& [kind, text] : p.components) {
        out += "### " + std::string(component_display_name(kind)) + "\n";
        out += text;
        out += "\n\n";
    }
    out += "### Task\n";
    out += p.task_instruction;
    return out;
}

const char* answer_token_string(Label label) {
    return label == Label::midblock ? kMidblockToken : kIntersectionToken;
}

// ----------------------------- vocabulary -----------------------------

std::vector<std::string> split_words(const std::string& text) {
    std::vector<std::string> words;
    std::string cur;
    for (char c : text) {
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
            if (!cur.empty()) {
                words.push_back(cur);
                cur.clear();
            }
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) words.push_back(cur);
    return words;
}

int Vocabulary::id(const std::string& token) const {
    auto it = token_to_id.find(token);
    return it == token_to_id.end() ? unk_id() : it->second;
}

int Vocabulary::require_id(const std::string& token) const {
    auto it = token_to_id.find(token);
    if (it == token_to_id.end()) throw DataError("token not in vocabulary: " + token);
    return it->second;
}

std::vector<int> Vocabulary::tokenize(const std::string& text) const {
    std::vector<int> ids;
    for (const auto& w : split_words(text)) ids.push_back(id(w));
    return ids;
}

std::string Vocabulary::detokenize(const std::vector<int>& ids) const {
    std::string out;
    for (int i : ids) {
        if (i < 0 || i >= size()) throw DataError("token id out of range: " + std::to_string(i));
        if (!out.empty()) out.push_back(' ');
        out += id_to_token[static_cast<std::size_t>(i)];
    }
    return out;
}

std::uint64_t Vocabulary::content_hash() const {
    std::uint64_t h = kFnvOffset;
    for (const auto& t : id_to_token) {
        h = fnv1a64(t, h);
        h = fnv1a64("\n", h);
    }
    return h;
}

Vocabulary build_vocabulary(const std::vector<std::string>& rendered_corpus) {
    if (rendered_corpus.empty()) throw DataError("build_vocabulary: empty corpus");
    Vocabulary v;
    for (const char* s : {kIntersectionToken, kMidblockToken, kPadToken, kUnkToken, kBosToken}) {
        v.token_to_id.emplace(s, v.size());
        v.id_to_token.emplace_back(s);
    }
    for (const auto& text : rendered_corpus)
        for (const auto& w : split_words(text))
            if (v.token_to_id.emplace(w, v.size()).second) v.id_to_token.push_back(w);
    return v;
}

void save_vocabulary(const Vocabulary& v, const std::string& path) {
    std::string out;
    for (const auto& t : v.id_to_token) {
        out += t;
        out.push_back('\n');
    }
    write_text_file(path, out);
}

Vocabulary load_vocabulary(const std::string& path) {
    std::istringstream in(read_text_file(path));
    Vocabulary v;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        v.token_to_id.emplace(line, v.size());
        v.id_to_token.push_back(line);
    }
    if (v.size() < 5 || v.id_to_token[0] != kIntersectionToken || v.id_to_token[4] != kBosToken)
        throw DataError("vocabulary file " + path + " does not start with the special tokens");
    return v;
}

std::string schema_coverage_text() {
    std::ostringstream out;
    PedestrianObservation o;
    SiteRecord s;
    s.site_id = "S00";
    o.site_id = "S00";
    s.location_name = "Schema Coverage";
    // enumerate every categorical value through the same templates
    for (int v = 0; v < 4; ++v) {
        o.age_group = static_cast<AgeGroup>(v);
        o.weather = static_cast<Weather>(v);
        o.green_onset_interval = static_cast<GreenOnsetInterval>(v);
        o.green_interval = static_cast<GreenInterval>(v);
        o.gender = static_cast<Gender>(v % 3);
        o.walking_context = v % 2 ? WalkingContext::alone : WalkingContext::group;
        o.lighting_intersection = v % 2;
        o.lighting_midblock = !(v % 2);
        o.push_button_available = v % 2;
        if (o.push_button_available)
            o.push_button_affects_time = v < 2;
        else
            o.push_button_affects_time.reset();
        o.left_turn_protection = v % 2;
        out << demographics_text(o) << "\n" << environmental_text(o) << "\n"
            << traffic_text(o) << "\n";
    }
    for (int lanes = 2; lanes <= 10; ++lanes) {
        s.lanes = lanes;
        s.speed_limit = 25 + 5 * (lanes % 3);
        s.sidewalk_width = 10 + lanes % 5;
        s.raised_median = lanes % 2;
        s.transit_station = !(lanes % 2);
        s.land_use = static_cast<LandUse>(lanes % 5);
        out << roadway_text(s) << "\n" << land_use_text(s) << "\n";
    }
    out << knowledge_block(KnowledgeConfig::all_on()) << "\n" << kTaskInstruction << "\n";
    out << "### Example 1 2 3 4 5 Answer: Task Domain Knowledge Context Pedestrian "
           "Demographics Environmental Conditions Roadway Geometry Traffic Control Land Use & "
           "Transit Built Environment (Vision)\n";
    out << "[Pedestrian Demographics: information withheld] [Traffic Control: information "
           "withheld] [Roadway Geometry: information withheld] [Built Environment (Vision): "
           "information withheld] [Land Use & Transit: information withheld] [Environmental "
           "Conditions: information withheld] [Domain Knowledge Context: information "
           "withheld]\n";
    return out.str();
}

// ----------------------------- truncation + tokenization -----------------------------

namespace {

std::string truncate_words(const std::string& text, int keep) {
    if (keep <= 0) return "";
    auto words = split_words(text);
    if (static_cast<int>(words.size()) <= keep) return text;
    std::string out;
    for (int i = 0; i < keep; ++i) {
        if (!out.empty()) out.push_back(' ');
        out += words[static_cast<std::size_t>(i)];
    }
    return out;
}

int rendered_token_count(const Prompt& p) {
    return static_cast<int>(split_words(render(p)).size());
}

}  // namespace

Prompt fit_prompt(const Prompt& p, int budget_tokens) {
    Prompt out = p;
    int len = rendered_token_count(out);
    if (len <= budget_tokens) return out;

    // vision text shrinks first
    {
        const std::string& vision = out.component_text(PromptComponentKind::built_environment_vision);
        int vision_words = static_cast<int>(split_words(vision).size());
        int keep = std::max(0, vision_words - (len - budget_tokens));
        out.set_component_text(PromptComponentKind::built_environment_vision,
                               truncate_words(vision, keep));
        len = rendered_token_count(out);
        if (len <= budget_tokens) return out;
    }

    // then the knowledge block; structured fields are never cut
    {
        const std::string& know = out.component_text(PromptComponentKind::domain_knowledge_context);
        int know_words = static_cast<int>(split_words(know).size());
        int keep = std::max(0, know_words - (len - budget_tokens));
        out.set_component_text(PromptComponentKind::domain_knowledge_context,
                               truncate_words(know, keep));
        len = rendered_token_count(out);
        if (len <= budget_tokens) return out;
    }

    throw DataError("prompt untruncatably long: structured template text alone is " +
                    std::to_string(len) + " tokens, budget " + std::to_string(budget_tokens));
}

TokenizedPrompt tokenize_for_training(const Prompt& p, const Vocabulary& v, Label gold,
                                      int max_seq_len) {
    Prompt fitted = fit_prompt(p, max_seq_len - 2);
    TokenizedPrompt tp;
    tp.obs_id = p.obs_id;
    tp.gold = gold;
    tp.tokens.push_back(v.bos_id());
    for (int id : v.tokenize(render(fitted))) tp.tokens.push_back(id);
    tp.target_token = gold == Label::midblock ? v.midblock_id() : v.intersection_id();
    tp.tokens.push_back(tp.target_token);
    tp.answer_mask.assign(tp.tokens.size(), 0);
    tp.answer_mask.back() = 1;
    return tp;
}

std::vector<int> tokenize_for_inference(const Prompt& p, const Vocabulary& v, int max_seq_len) {
    Prompt fitted = fit_prompt(p, max_seq_len - 2);
    std::vector<int> tokens;
    tokens.push_back(v.bos_id());
    for (int id : v.tokenize(render(fitted))) tokens.push_back(id);
    return tokens;
}

// ----------------------------- artifacts -----------------------------

void write_prompt_dump(const std::string& path, const std::vector<PromptDumpRecord>& records) {
    std::ostringstream out;
    for (const auto& r : records) {
        json comps = json::array();
        for (const auto& [kind, text] : r.components)
            comps.push_back({{"kind", component_display_name(kind)}, {"text", text}});
        json j = {{"obs_id", r.obs_id},
                  {"components", comps},
                  {"rendered", r.rendered},
                  {"tokens", r.tokens},
                  {"answer_mask", r.answer_mask},
                  {"target", r.target}};
        out << j.dump() << "\n";
    }
    write_text_file(path, out.str());
}

}  // namespace pedlm
