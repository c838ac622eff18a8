#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "json.hpp"

#include "pedlm/prompting.hpp"

using namespace pedlm;

namespace {

SiteRecord demo_site() {
    SiteRecord s;
    s.site_id = "S01";
    s.location_name = "Cedar Ave";
    s.lanes = 6;
    s.speed_limit = 30;
    s.raised_median = true;
    s.transit_station = true;
    s.sidewalk_width = 12;
    s.land_use = LandUse::commercial_residential;
    return s;
}

PedestrianObservation demo_obs() {
    PedestrianObservation o;
    o.obs_id = "O0001";
    o.site_id = "S01";
    o.age_group = AgeGroup::adult;
    o.gender = Gender::male;
    o.walking_context = WalkingContext::alone;
    o.weather = Weather::rain_drizzle;
    o.lighting_intersection = true;
    o.lighting_midblock = true;
    o.green_onset_interval = GreenOnsetInterval::short_1_85s;
    o.green_interval = GreenInterval::short_1_40s;
    o.push_button_available = true;
    o.push_button_affects_time = true;
    o.left_turn_protection = false;
    o.label = Label::midblock;
    return o;
}

Prompt demo_prompt(const KnowledgeConfig& cfg = KnowledgeConfig::all_on()) {
    static VisionDescription vision = stub_description(demo_site(), 9);
    return build_prompt(demo_obs(), demo_site(), vision, cfg);
}

}  // namespace

TEST_CASE("knowledge block emits one sentence per enabled flag") {
    std::string full = knowledge_block(KnowledgeConfig::all_on());
    // six priors, fixed order
    auto pos_age = full.find("delay tolerance");
    auto pos_gender = full.find("Male pedestrians");
    auto pos_context = full.find("walking alone");
    auto pos_weather = full.find("Adverse weather");
    auto pos_lighting = full.find("lighting encourage mid-block");
    auto pos_land = full.find("bus stops concentrate");
    CHECK(pos_age != std::string::npos);
    CHECK(pos_gender != std::string::npos);
    CHECK(pos_context != std::string::npos);
    CHECK(pos_weather != std::string::npos);
    CHECK(pos_lighting != std::string::npos);
    CHECK(pos_land != std::string::npos);
    CHECK(pos_age < pos_gender);
    CHECK(pos_gender < pos_context);
    CHECK(pos_context < pos_weather);
    CHECK(pos_weather < pos_lighting);
    CHECK(pos_lighting < pos_land);

    CHECK(knowledge_block(KnowledgeConfig::all_off()).empty());

    KnowledgeConfig age_only = KnowledgeConfig::all_off();
    age_only.individual_age = true;
    std::string one = knowledge_block(age_only);
    CHECK(one.find("delay tolerance") != std::string::npos);
    CHECK(one.find("Male pedestrians") == std::string::npos);

    // enabling any flag strictly extends the block
    KnowledgeConfig partial = KnowledgeConfig::all_off();
    std::size_t prev = knowledge_block(partial).size();
    for (bool* flag : {&partial.individual_age, &partial.individual_gender,
                       &partial.individual_walking_context, &partial.environment_weather,
                       &partial.environment_lighting, &partial.environment_land_use_transit}) {
        *flag = true;
        std::size_t len = knowledge_block(partial).size();
        CHECK(len > prev);
        prev = len;
    }
}

TEST_CASE("build_prompt fills every component in fixed order") {
    Prompt p = demo_prompt();
    REQUIRE(p.components.size() == 7);
    CHECK(p.components[0].first == PromptComponentKind::domain_knowledge_context);
    CHECK(p.components[1].first == PromptComponentKind::pedestrian_demographics);
    CHECK(p.components[2].first == PromptComponentKind::environmental_conditions);
    CHECK(p.components[3].first == PromptComponentKind::roadway_geometry);
    CHECK(p.components[4].first == PromptComponentKind::traffic_control);
    CHECK(p.components[5].first == PromptComponentKind::land_use_transit);
    CHECK(p.components[6].first == PromptComponentKind::built_environment_vision);

    const std::string& traffic = p.component_text(PromptComponentKind::traffic_control);
    CHECK(traffic.find("Time interval between consecutive onsets of green time") !=
          std::string::npos);
    CHECK(traffic.find("Green interval for crossing: 1 to 40 seconds") != std::string::npos);
    CHECK(traffic.find("Pedestrian push-button available: yes") != std::string::npos);
    CHECK(traffic.find("Push-button affecting crossing time: yes") != std::string::npos);
    CHECK(traffic.find("Left turn protection phase: no") != std::string::npos);

    // every field variable appears exactly once across the rendered text
    std::string rendered = render(p);
    for (const char* label :
         {"Age group:", "Gender:", "Walking context:", "Weather condition:",
          "Lighting at intersection:", "Lighting at mid-block:", "Number of lanes at mid-block:",
          "Speed limit:", "Total width of sidewalk:", "Raised median:",
          "Time interval between consecutive onsets of green time for crossing:",
          "Green interval for crossing:", "Pedestrian push-button available:",
          "Push-button affecting crossing time:", "Left turn protection phase:", "Land use:",
          "Public transit station:"}) {
        auto first = rendered.find(label);
        REQUIRE_MESSAGE(first != std::string::npos, label);
        CHECK(rendered.find(label, first + 1) == std::string::npos);
    }

    // binary-output directive closes the prompt
    CHECK(rendered.find("<INTERSECTION> for an intersection crossing or <MIDBLOCK>") !=
          std::string::npos);

    // determinism
    CHECK(render(demo_prompt()) == rendered);

    // knowledge ablation empties the component but keeps it present
    Prompt ablated = demo_prompt(KnowledgeConfig::all_off());
    CHECK(ablated.component_text(PromptComponentKind::domain_knowledge_context).empty());
    CHECK(ablated.components.size() == 7);

    // conditional field wording when push-button is unavailable
    auto obs2 = demo_obs();
    obs2.push_button_available = false;
    obs2.push_button_affects_time.reset();
    Prompt p2 = build_prompt(obs2, demo_site(), stub_description(demo_site(), 9),
                             KnowledgeConfig::all_on());
    CHECK(p2.component_text(PromptComponentKind::traffic_control)
              .find("Push-button affecting crossing time: not applicable") != std::string::npos);

    // mismatched ids rejected
    auto other_site = demo_site();
    other_site.site_id = "S02";
    CHECK_THROWS_AS(build_prompt(demo_obs(), other_site, stub_description(other_site, 9),
                                 KnowledgeConfig::all_on()),
                    DataError);
}

TEST_CASE("render places few-shot exemplars before the query") {
    Prompt p = demo_prompt();
    CHECK(render(p).find("### Example") == std::string::npos);

    for (int i = 0; i < 5; ++i) {
        FewShotExample ex;
        ex.text = render_exemplar_body(demo_obs(), demo_site());
        ex.answer_token = i % 2 ? kMidblockToken : kIntersectionToken;
        ex.obs_id = "O" + std::to_string(100 + i);
        p.few_shot_examples.push_back(ex);
    }
    std::string rendered = render(p);
    for (int i = 1; i <= 5; ++i)
        CHECK(rendered.find("### Example " + std::to_string(i)) != std::string::npos);
    CHECK(rendered.find("### Example 5") < rendered.find("### Domain Knowledge Context"));
    CHECK(rendered.find("Answer: <MIDBLOCK>") != std::string::npos);
}

TEST_CASE("render is injective over distinct component texts") {
    Rng rng(123);
    auto random_text = [&]() {
        static const char* words[] = {"alpha", "beta", "gamma", "delta", "epsilon", "zeta"};
        std::string t;
        int n = 1 + static_cast<int>(rng.below(8));
        for (int i = 0; i < n; ++i) {
            if (!t.empty()) t.push_back(' ');
            t += words[rng.below(6)];
        }
        return t;
    };
    for (int trial = 0; trial < 200; ++trial) {
        Prompt a = demo_prompt();
        for (auto& [kind, text] : a.components) text = random_text();
        Prompt b = demo_prompt();
        b.components = a.components;
        // perturb one component of b
        auto idx = rng.below(7);
        b.components[idx].second = a.components[idx].second + " tail";
        CHECK(render(a) != render(b));
        Prompt c = demo_prompt();
        c.components = a.components;
        CHECK(render(a) == render(c));
    }
}

TEST_CASE("vocabulary round trips and keeps special ids stable") {
    Prompt p = demo_prompt();
    Vocabulary v = build_vocabulary({render(p), "mid-block crossing near mid-block"});

    CHECK(v.id_to_token[0] == kIntersectionToken);
    CHECK(v.id_to_token[1] == kMidblockToken);
    CHECK(v.id_to_token[2] == kPadToken);
    CHECK(v.id_to_token[3] == kUnkToken);
    CHECK(v.id_to_token[4] == kBosToken);

    // hyphenated words are single entries
    CHECK(v.token_to_id.count("mid-block") == 1);

    // round trip over single-spaced template text
    std::string t = "Gender: male Walking context: alone mid-block crossing";
    CHECK(v.detokenize(v.tokenize(t)) == t);

    // out-of-vocabulary maps to <UNK>
    CHECK(v.tokenize("zebra")[0] == v.unk_id());

    auto path = (std::filesystem::temp_directory_path() / "pedlm_vocab.txt").string();
    save_vocabulary(v, path);
    Vocabulary loaded = load_vocabulary(path);
    CHECK(loaded.id_to_token == v.id_to_token);
    CHECK(loaded.content_hash() == v.content_hash());
    std::remove(path.c_str());

    CHECK_THROWS_AS(build_vocabulary({}), DataError);
}

TEST_CASE("tokenize_for_training masks exactly the answer token") {
    Prompt p = demo_prompt();
    Vocabulary v = build_vocabulary({render(p), schema_coverage_text()});

    auto tp = tokenize_for_training(p, v, Label::midblock, 512);
    CHECK(tp.target_token == v.midblock_id());
    CHECK(tp.tokens.back() == v.midblock_id());
    CHECK(tp.tokens.front() == v.bos_id());
    int mask_sum = 0;
    for (std::size_t i = 0; i < tp.answer_mask.size(); ++i) {
        mask_sum += tp.answer_mask[i];
        if (i + 1 < tp.answer_mask.size()) CHECK(tp.answer_mask[i] == 0);
    }
    CHECK(mask_sum == 1);
    CHECK(tp.answer_mask.back() == 1);
    CHECK(tp.tokens.size() <= 512);
    CHECK(tp.tokens.size() == tp.answer_mask.size());

    auto tp0 = tokenize_for_training(p, v, Label::intersection, 512);
    CHECK(tp0.target_token == v.intersection_id());
}

TEST_CASE("truncation removes vision first, then knowledge, never fields") {
    // inflate the vision text to exactly 600 words
    auto site = demo_site();
    VisionDescription big = stub_description(site, 1);
    while (count_words(big.text) < 600) big.text += " " + big.text.substr(0, 120);
    {
        auto words = split_words(big.text);
        words.resize(600);
        std::string t;
        for (const auto& w : words) {
            if (!t.empty()) t.push_back(' ');
            t += w;
        }
        big.text = t;
        big.word_count = count_words(big.text);
    }

    Prompt p = build_prompt(demo_obs(), site, big, KnowledgeConfig::all_on());
    Vocabulary v = build_vocabulary({render(p), schema_coverage_text()});

    Prompt original = p;
    auto tp = tokenize_for_training(p, v, Label::midblock, 512);
    CHECK(tp.tokens.size() == 512);

    Prompt fitted = fit_prompt(p, 510);
    // vision shrank
    CHECK(split_words(fitted.component_text(PromptComponentKind::built_environment_vision)).size() <
          600);
    // knowledge and structured components intact at this budget
    CHECK(fitted.component_text(PromptComponentKind::domain_knowledge_context) ==
          original.component_text(PromptComponentKind::domain_knowledge_context));
    CHECK(fitted.component_text(PromptComponentKind::traffic_control) ==
          original.component_text(PromptComponentKind::traffic_control));

    // tighter budget: vision gone entirely, knowledge partially cut
    Prompt tight = fit_prompt(p, 180);
    CHECK(tight.component_text(PromptComponentKind::built_environment_vision).empty());
    CHECK(tight.component_text(PromptComponentKind::traffic_control) ==
          original.component_text(PromptComponentKind::traffic_control));
    CHECK(split_words(tight.component_text(PromptComponentKind::domain_knowledge_context)).size() <
          split_words(original.component_text(PromptComponentKind::domain_knowledge_context)).size());

    // below the structured floor: untruncatable
    CHECK_THROWS_WITH_AS(fit_prompt(p, 40), doctest::Contains("untruncatably"), DataError);
}

TEST_CASE("prompt dump is valid JSONL") {
    Prompt p = demo_prompt();
    Vocabulary v = build_vocabulary({render(p)});
    auto tp = tokenize_for_training(p, v, Label::midblock, 512);

    PromptDumpRecord rec;
    rec.obs_id = p.obs_id;
    rec.components = p.components;
    rec.rendered = render(p);
    rec.tokens = tp.tokens;
    rec.answer_mask = tp.answer_mask;
    rec.target = tp.target_token;

    auto path = (std::filesystem::temp_directory_path() / "pedlm_prompts.jsonl").string();
    write_prompt_dump(path, {rec});
    std::ifstream in(path);
    std::string line;
    REQUIRE(std::getline(in, line));
    auto j = nlohmann::json::parse(line);
    CHECK(j.at("obs_id") == "O0001");
    CHECK(j.at("components").size() == 7);
    CHECK(j.at("target") == 1);
    std::remove(path.c_str());
}
