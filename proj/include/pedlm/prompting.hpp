#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pedlm/common.hpp"
#include "pedlm/corpus.hpp"
#include "pedlm/vision.hpp"

namespace pedlm {

// Fixed enumeration; order matches the attribution report rows.
enum class PromptComponentKind : int {
    pedestrian_demographics = 0,
    traffic_control,
    roadway_geometry,
    built_environment_vision,
    land_use_transit,
    environmental_conditions,
    domain_knowledge_context,
};

inline constexpr int kNumPromptComponents = 7;

const char* component_display_name(PromptComponentKind k);

// Behavioral-prior switches; category-level ablation toggles groups of these.
struct KnowledgeConfig {
    bool individual_age = true;
    bool individual_gender = true;
    bool individual_walking_context = true;
    bool environment_weather = true;
    bool environment_lighting = true;
    bool environment_land_use_transit = true;

    static KnowledgeConfig all_on() { return {}; }
    static KnowledgeConfig all_off() { return {false, false, false, false, false, false}; }
    static KnowledgeConfig individual_only() { return {true, true, true, false, false, false}; }
    static KnowledgeConfig environment_only() { return {false, false, false, true, true, true}; }
};

struct FewShotExample {
    std::string text;          // rendered exemplar body
    std::string answer_token;  // <INTERSECTION> or <MIDBLOCK>
    std::string obs_id;
};

struct Prompt {
    // fixed presentation order: knowledge, demographics, environmental,
    // roadway, traffic control, land use & transit, vision
    std::vector<std::pair<PromptComponentKind, std::string>> components;
    std::vector<FewShotExample> few_shot_examples;
    std::string task_instruction;
    std::string obs_id;

    const std::string& component_text(PromptComponentKind k) const;
    void set_component_text(PromptComponentKind k, std::string text);
};

// ----------------------------- vocabulary -----------------------------

inline constexpr const char* kIntersectionToken = "<INTERSECTION>";
inline constexpr const char* kMidblockToken = "<MIDBLOCK>";
inline constexpr const char* kPadToken = "<PAD>";
inline constexpr const char* kUnkToken = "<UNK>";
inline constexpr const char* kBosToken = "<BOS>";

struct Vocabulary {
    std::vector<std::string> id_to_token;
    std::unordered_map<std::string, int> token_to_id;

    int size() const { return static_cast<int>(id_to_token.size()); }
    int id(const std::string& token) const;          // <UNK> fallback
    int require_id(const std::string& token) const;  // throws if absent

    int intersection_id() const { return 0; }
    int midblock_id() const { return 1; }
    int pad_id() const { return 2; }
    int unk_id() const { return 3; }
    int bos_id() const { return 4; }

    std::vector<int> tokenize(const std::string& text) const;
    std::string detokenize(const std::vector<int>& ids) const;

    std::uint64_t content_hash() const;
};

std::vector<std::string> split_words(const std::string& text);

Vocabulary build_vocabulary(const std::vector<std::string>& rendered_corpus);
void save_vocabulary(const Vocabulary& v, const std::string& path);
Vocabulary load_vocabulary(const std::string& path);

// Deterministic text enumerating every template phrase and numeric range of
// the record schema, so vocabularies cover the domain language without
// touching held-out data.
std::string schema_coverage_text();

// ----------------------------- prompt construction -----------------------------

std::string knowledge_block(const KnowledgeConfig& cfg);

Prompt build_prompt(const PedestrianObservation& obs, const SiteRecord& site,
                    const VisionDescription& vision, const KnowledgeConfig& cfg,
                    std::vector<FewShotExample> few_shot = {});

// Compact exemplar body: the five structured components only.
std::string render_exemplar_body(const PedestrianObservation& obs, const SiteRecord& site);

std::string render(const Prompt& p);

const char* answer_token_string(Label label);

// ----------------------------- tokenization for training -----------------------------

struct TokenizedPrompt {
    std::vector<int> tokens;
    std::vector<std::uint8_t> answer_mask;  // true exactly at the answer position
    int target_token = 0;
    std::string obs_id;
    Label gold = Label::intersection;
};

// Truncation order when the rendered prompt exceeds the budget: vision text
// first, then the knowledge block, never the structured fields.
Prompt fit_prompt(const Prompt& p, int budget_tokens);

TokenizedPrompt tokenize_for_training(const Prompt& p, const Vocabulary& v, Label gold,
                                      int max_seq_len = 512);

// Prompt-only token sequence (BOS + body, no answer) for inference.
std::vector<int> tokenize_for_inference(const Prompt& p, const Vocabulary& v,
                                        int max_seq_len = 512);

// ----------------------------- artifacts -----------------------------

struct PromptDumpRecord {
    std::string obs_id;
    std::vector<std::pair<PromptComponentKind, std::string>> components;
    std::string rendered;
    std::vector<int> tokens;
    std::vector<std::uint8_t> answer_mask;
    int target = 0;
};

void write_prompt_dump(const std::string& path, const std::vector<PromptDumpRecord>& records);

}  // namespace pedlm
