#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "pedlm/common.hpp"

namespace pedlm {

// ----------------------------- enums -----------------------------

enum class LandUse {
    educational_residential,
    commercial_residential,
    office_residential,
    educational_office,
    greenspace_residential,
};

enum class AgeGroup { child, adult, senior, unsure };
enum class Gender { male, female, unsure };
enum class WalkingContext { alone, group };
enum class Weather { clear_sunny, partly_cloudy, cloudy, rain_drizzle };

// Signal-timing intervals carry an explicit `missing` variant; never imputed.
enum class GreenOnsetInterval { zero, short_1_85s, long_gt85s, missing };
enum class GreenInterval { zero, short_1_40s, long_gt40s, missing };

// 0 = intersection crossing, 1 = mid-block
enum class Label : int { intersection = 0, midblock = 1 };

const char* to_string(LandUse v);
const char* to_string(AgeGroup v);
const char* to_string(Gender v);
const char* to_string(WalkingContext v);
const char* to_string(Weather v);
const char* to_string(GreenOnsetInterval v);
const char* to_string(GreenInterval v);

LandUse land_use_from_string(const std::string& s);
AgeGroup age_group_from_string(const std::string& s);
Gender gender_from_string(const std::string& s);
WalkingContext walking_context_from_string(const std::string& s);
Weather weather_from_string(const std::string& s);
GreenOnsetInterval green_onset_from_string(const std::string& s);
GreenInterval green_interval_from_string(const std::string& s);

// ----------------------------- records -----------------------------

struct SiteRecord {
    std::string site_id;
    std::string location_name;
    int lanes = 2;              // 2..10
    int speed_limit = 25;       // mph, one of {25, 30, 35}
    bool raised_median = false;
    bool transit_station = false;
    int sidewalk_width = 10;    // feet, 10..14
    LandUse land_use = LandUse::educational_residential;
};

struct PedestrianObservation {
    std::string obs_id;
    std::string site_id;
    AgeGroup age_group = AgeGroup::adult;
    Gender gender = Gender::male;
    WalkingContext walking_context = WalkingContext::alone;
    Weather weather = Weather::clear_sunny;
    bool lighting_intersection = true;
    bool lighting_midblock = true;
    GreenOnsetInterval green_onset_interval = GreenOnsetInterval::short_1_85s;
    GreenInterval green_interval = GreenInterval::short_1_40s;
    bool push_button_available = true;
    // defined only when push_button_available
    std::optional<bool> push_button_affects_time = true;
    bool left_turn_protection = true;
    Label label = Label::intersection;
};

struct Corpus {
    std::vector<SiteRecord> sites;
    std::vector<PedestrianObservation> observations;

    const SiteRecord& site(const std::string& site_id) const;
    const PedestrianObservation& observation(const std::string& obs_id) const;
};

// Throws SchemaError naming the offending field (and row when given).
void validate_site(const SiteRecord& s, std::size_t row = 0);
void validate_observation(const PedestrianObservation& o, std::size_t row = 0);
void validate_corpus(const Corpus& c);

// ----------------------------- splits -----------------------------

enum class SplitStrategy { stratified_random, site_based };

struct SplitAssignment {
    std::unordered_set<std::string> train;
    std::unordered_set<std::string> validation;
    std::unordered_set<std::string> test;
    SplitStrategy strategy = SplitStrategy::stratified_random;
    std::uint64_t seed = 0;

    // site_based only
    std::vector<std::string> train_sites;
    std::vector<std::string> validation_sites;
    std::vector<std::string> test_sites;
    std::vector<std::string> unassigned_sites;

    bool contains(const std::string& obs_id) const {
        return train.count(obs_id) || validation.count(obs_id) || test.count(obs_id);
    }
};

// ----------------------------- generator config -----------------------------

// Ground-truth rule: P(midblock) = sigmoid(intercept + coefficients . x),
// with an optional per-site intercept offset ~ N(0, site_intercept_sd).
// The intercept is tuned by bisection at generation time so the marginal
// mid-block rate hits target_midblock_rate.
struct LabelRule {
    double coef_male = 2.2;
    double coef_alone = 1.8;
    double coef_senior = -2.4;
    double coef_lanes = -0.5;          // per lane, centered at lanes_center
    double lanes_center = 4.5;
    double coef_lighting_midblock = 1.6;
    double coef_weather_adverse = 1.8;  // scaled by adversity in [0, 1]
    double site_intercept_sd = 0.0;
    double target_midblock_rate = 0.377;
};

// weather adversity score used by the label rule
double weather_adversity(Weather w);

// linear predictor without the intercept or site offset
double label_rule_linear_term(const LabelRule& rule, const PedestrianObservation& o,
                              const SiteRecord& s);

// ----------------------------- operations -----------------------------

std::pair<std::vector<SiteRecord>, std::vector<PedestrianObservation>>
load_corpus(const std::string& sites_path, const std::string& observations_path);

void write_corpus(const std::vector<SiteRecord>& sites,
                  const std::vector<PedestrianObservation>& observations,
                  const std::string& sites_path, const std::string& observations_path);

std::string render_sites_csv(const std::vector<SiteRecord>& sites);
std::string render_observations_csv(const std::vector<PedestrianObservation>& observations);

struct SyntheticCorpus {
    std::vector<SiteRecord> sites;
    std::vector<PedestrianObservation> observations;
    double calibrated_intercept = 0.0;
    std::unordered_map<std::string, double> site_offsets;
};

SyntheticCorpus generate_synthetic(int n_sites, int n_obs, std::uint64_t seed,
                                   const LabelRule& rule = LabelRule{});

struct SplitRatios {
    double train = 0.70;
    double validation = 0.15;
    double test = 0.15;
};

SplitAssignment stratified_split(const std::vector<PedestrianObservation>& obs,
                                 SplitRatios ratios, std::uint64_t seed);

struct SiteCounts {
    int train = 22;
    int validation = 5;
    int test = 5;
};

SplitAssignment site_split(const std::vector<SiteRecord>& sites,
                           const std::vector<PedestrianObservation>& obs,
                           SiteCounts counts, std::uint64_t seed);

// largest-remainder allocation of n into parts proportional to weights
std::vector<int> largest_remainder_allocation(int n, const std::vector<double>& weights);

}  // namespace pedlm
