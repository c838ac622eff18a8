#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pedlm/common.hpp"
#include "pedlm/corpus.hpp"

namespace pedlm {

enum class VisionSource { stub, external };

struct VisionDescription {
    std::string site_id;
    std::string text;
    int word_count = 0;  // whitespace-token count of text
    VisionSource source = VisionSource::stub;
    std::string retrieved_at;  // ISO-8601, set when produced
};

struct VisionServiceConfig {
    std::string endpoint_url;
    std::string model_name;
    std::string image_reference;  // pre-fetched image path or URL
    double timeout_s = 30.0;
    std::string api_key_env_var;  // empty = unauthenticated endpoint
};

// HTTP transport / status failures; message carries the endpoint context.
struct TransportError : std::runtime_error {
    explicit TransportError(const std::string& msg) : std::runtime_error(msg) {}
};

// Response arrived but the expected text payload is missing.
struct MalformedResponseError : DataError {
    explicit MalformedResponseError(const std::string& msg) : DataError(msg) {}
};

// The four-part instruction sent to the vision service.
const std::string& vision_prompt_text();

int count_words(const std::string& text);

// Deterministic template description covering road layout, building density,
// land use, and spatial organization; always 150-200 words.
VisionDescription stub_description(const SiteRecord& site, std::uint64_t seed);

// Chat-completion request against a vision-capable endpoint. When audit_dir
// is non-empty the raw response body is persisted beside the parsed text.
VisionDescription fetch_description(const VisionServiceConfig& cfg, const SiteRecord& site,
                                    const std::string& audit_dir = "");

// Soft checks only; returns human-readable warnings, never throws.
std::vector<std::string> validate_description(const VisionDescription& d);

// Cache file: one JSON record per line {site_id, source, text, retrieved_at}.
void save_description_cache(const std::string& path, const std::vector<VisionDescription>& ds);
std::vector<VisionDescription> load_description_cache(const std::string& path);

// Parses the first text payload out of a chat-completion response body.
std::string parse_chat_completion_text(const std::string& body, const std::string& endpoint);

}  // namespace pedlm
