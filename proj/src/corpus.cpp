#include "pedlm/corpus.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "pedlm/csv.hpp"

namespace pedlm {

// ----------------------------- enum strings -----------------------------

const char* to_string(LandUse v) {
    switch (v) {
        case LandUse::educational_residential: return "educational_residential";
        case LandUse::commercial_residential: return "commercial_residential";
        case LandUse::office_residential: return "office_residential";
        case LandUse::educational_office: return "educational_office";
        case LandUse::greenspace_residential: return "greenspace_residential";
    }
    return "?";
}

const char* to_string(AgeGroup v) {
    switch (v) {
        case AgeGroup::child: return "child";
        case AgeGroup::adult: return "adult";
        case AgeGroup::senior: return "senior";
        case AgeGroup::unsure: return "unsure";
    }
    return "?";
}

const char* to_string(Gender v) {
    switch (v) {
        case Gender::male: return "male";
        case Gender::female: return "female";
        case Gender::unsure: return "unsure";
    }
    return "?";
}

const char* to_string(WalkingContext v) {
    return v == WalkingContext::alone ? "alone" : "group";
}

const char* to_string(Weather v) {
    switch (v) {
        case Weather::clear_sunny: return "clear_sunny";
        case Weather::partly_cloudy: return "partly_cloudy";
        case Weather::cloudy: return "cloudy";
        case Weather::rain_drizzle: return "rain_drizzle";
    }
    return "?";
}

const char* to_string(GreenOnsetInterval v) {
    switch (v) {
        case GreenOnsetInterval::zero: return "zero";
        case GreenOnsetInterval::short_1_85s: return "short_1_85s";
        case GreenOnsetInterval::long_gt85s: return "long_gt85s";
        case GreenOnsetInterval::missing: return "missing";
    }
    return "?";
}

const char* to_string(GreenInterval v) {
    switch (v) {
        case GreenInterval::zero: return "zero";
        case GreenInterval::short_1_40s: return "short_1_40s";
        case GreenInterval::long_gt40s: return "long_gt40s";
        case GreenInterval::missing: return "missing";
    }
    return "?";
}

namespace {

[[noreturn]] void bad_enum(const std::string& column, const std::string& value) {
    throw SchemaError("invalid value \"" + value + "\" for column \"" + column + "\"");
}

}  // namespace

LandUse land_use_from_string(const std::string& s) {
    if (s == "educational_residential") return LandUse::educational_residential;
    if (s == "commercial_residential") return LandUse::commercial_residential;
    if (s == "office_residential") return LandUse::office_residential;
    if (s == "educational_office") return LandUse::educational_office;
    if (s == "greenspace_residential") return LandUse::greenspace_residential;
    bad_enum("land_use", s);
}

AgeGroup age_group_from_string(const std::string& s) {
    if (s == "child") return AgeGroup::child;
    if (s == "adult") return AgeGroup::adult;
    if (s == "senior") return AgeGroup::senior;
    if (s == "unsure") return AgeGroup::unsure;
    bad_enum("age_group", s);
}

Gender gender_from_string(const std::string& s) {
    if (s == "male") return Gender::male;
    if (s == "female") return Gender::female;
    if (s == "unsure") return Gender::unsure;
    bad_enum("gender", s);
}

WalkingContext walking_context_from_string(const std::string& s) {
    if (s == "alone") return WalkingContext::alone;
    if (s == "group") return WalkingContext::group;
    bad_enum("walking_context", s);
}

Weather weather_from_string(const std::string& s) {
    if (s == "clear_sunny") return Weather::clear_sunny;
    if (s == "partly_cloudy") return Weather::partly_cloudy;
    if (s == "cloudy") return Weather::cloudy;
    if (s == "rain_drizzle") return Weather::rain_drizzle;
    bad_enum("weather", s);
}

GreenOnsetInterval green_onset_from_string(const std::string& s) {
    if (s == "zero") return GreenOnsetInterval::zero;
    if (s == "short_1_85s") return GreenOnsetInterval::short_1_85s;
    if (s == "long_gt85s") return GreenOnsetInterval::long_gt85s;
    if (s == "missing") return GreenOnsetInterval::missing;
    bad_enum("green_onset_interval", s);
}

GreenInterval green_interval_from_string(const std::string& s) {
    if (s == "zero") return GreenInterval::zero;
    if (s == "short_1_40s") return GreenInterval::short_1_40s;
    if (s == "long_gt40s") return GreenInterval::long_gt40s;
    if (s == "missing") return GreenInterval::missing;
    bad_enum("green_interval", s);
}

// ----------------------------- validation -----------------------------

namespace {

std::string row_suffix(std::size_t row) {
    return row ? " (row " + std::to_string(row) + ")" : "";
}

}  // namespace

void validate_site(const SiteRecord& s, std::size_t row) {
    if (s.site_id.empty())
        throw SchemaError("column \"site_id\": must be non-empty" + row_suffix(row));
    if (s.lanes < 2 || s.lanes > 10)
        throw SchemaError("column \"lanes\": value " + std::to_string(s.lanes) +
                          " outside [2, 10]" + row_suffix(row));
    if (s.speed_limit != 25 && s.speed_limit != 30 && s.speed_limit != 35)
        throw SchemaError("column \"speed_limit_mph\": value " + std::to_string(s.speed_limit) +
                          " not in {25, 30, 35}" + row_suffix(row));
    if (s.sidewalk_width < 10 || s.sidewalk_width > 14)
        throw SchemaError("column \"sidewalk_width_ft\": value " +
                          std::to_string(s.sidewalk_width) + " outside [10, 14]" +
                          row_suffix(row));
}

void validate_observation(const PedestrianObservation& o, std::size_t row) {
    if (o.obs_id.empty())
        throw SchemaError("column \"obs_id\": must be non-empty" + row_suffix(row));
    if (o.site_id.empty())
        throw SchemaError("column \"site_id\": must be non-empty" + row_suffix(row));
    if (!o.push_button_available && o.push_button_affects_time.has_value())
        throw SchemaError(
            "column \"push_button_affects_time\": must be absent when "
            "push_button_available is false" + row_suffix(row));
    if (o.push_button_available && !o.push_button_affects_time.has_value())
        throw SchemaError(
            "column \"push_button_affects_time\": required when push_button_available is true" +
            row_suffix(row));
}

void validate_corpus(const Corpus& c) {
    std::unordered_set<std::string> site_ids;
    for (std::size_t i = 0; i < c.sites.size(); ++i) {
        validate_site(c.sites[i], i + 2);
        if (!site_ids.insert(c.sites[i].site_id).second)
            throw SchemaError("duplicate site_id \"" + c.sites[i].site_id + "\"");
    }
    std::unordered_set<std::string> obs_ids;
    for (std::size_t i = 0; i < c.observations.size(); ++i) {
        const auto& o = c.observations[i];
        validate_observation(o, i + 2);
        if (!obs_ids.insert(o.obs_id).second)
            throw SchemaError("duplicate obs_id \"" + o.obs_id + "\"");
        if (!site_ids.count(o.site_id))
            throw SchemaError("obs \"" + o.obs_id + "\" references unknown site_id \"" +
                              o.site_id + "\"");
    }
}

const SiteRecord& Corpus::site(const std::string& site_id) const {
    for (const auto& s : sites)
        if (s.site_id == site_id) return s;
    throw DataError("unknown site_id \"" + site_id + "\"");
}

const PedestrianObservation& Corpus::observation(const std::string& obs_id) const {
    for (const auto& o : observations)
        if (o.obs_id == obs_id) return o;
    throw DataError("unknown obs_id \"" + obs_id + "\"");
}

// ----------------------------- csv io -----------------------------

namespace {

const std::vector<std::string> kSiteHeader = {
    "site_id", "location_name", "lanes", "speed_limit_mph", "raised_median",
    "transit_station", "sidewalk_width_ft", "land_use"};

const std::vector<std::string> kObsHeader = {
    "obs_id", "site_id", "age_group", "gender", "walking_context", "weather",
    "lighting_intersection", "lighting_midblock", "green_onset_interval", "green_interval",
    "push_button_available", "push_button_affects_time", "left_turn_protection", "label"};

bool parse_bool(const std::string& s, const char* column, std::size_t row) {
    if (s == "true") return true;
    if (s == "false") return false;
    throw SchemaError("column \"" + std::string(column) + "\": expected true/false, got \"" + s +
                      "\" (row " + std::to_string(row) + ")");
}

int parse_int(const std::string& s, const char* column, std::size_t row) {
    try {
        std::size_t pos = 0;
        int v = std::stoi(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw SchemaError("column \"" + std::string(column) + "\": expected integer, got \"" + s +
                          "\" (row " + std::to_string(row) + ")");
    }
}

void check_header(const std::vector<std::string>& got, const std::vector<std::string>& want,
                  const std::string& path) {
    if (got != want) {
        std::string w;
        for (std::size_t i = 0; i < want.size(); ++i) w += (i ? "," : "") + want[i];
        throw SchemaError("unexpected header in " + path + "; expected: " + w);
    }
}

}  // namespace

std::pair<std::vector<SiteRecord>, std::vector<PedestrianObservation>>
load_corpus(const std::string& sites_path, const std::string& observations_path) {
    CsvTable st = read_csv(sites_path);
    check_header(st.header, kSiteHeader, sites_path);
    std::vector<SiteRecord> sites;
    sites.reserve(st.rows.size());
    for (std::size_t i = 0; i < st.rows.size(); ++i) {
        const auto& r = st.rows[i];
        std::size_t row_no = i + 2;
        if (r.size() != kSiteHeader.size())
            throw SchemaError("sites row " + std::to_string(row_no) + ": expected " +
                              std::to_string(kSiteHeader.size()) + " fields, got " +
                              std::to_string(r.size()));
        SiteRecord s;
        s.site_id = r[0];
        s.location_name = r[1];
        s.lanes = parse_int(r[2], "lanes", row_no);
        s.speed_limit = parse_int(r[3], "speed_limit_mph", row_no);
        s.raised_median = parse_bool(r[4], "raised_median", row_no);
        s.transit_station = parse_bool(r[5], "transit_station", row_no);
        s.sidewalk_width = parse_int(r[6], "sidewalk_width_ft", row_no);
        s.land_use = land_use_from_string(r[7]);
        validate_site(s, row_no);
        sites.push_back(std::move(s));
    }

    CsvTable ot = read_csv(observations_path);
    check_header(ot.header, kObsHeader, observations_path);
    std::vector<PedestrianObservation> obs;
    obs.reserve(ot.rows.size());
    for (std::size_t i = 0; i < ot.rows.size(); ++i) {
        const auto& r = ot.rows[i];
        std::size_t row_no = i + 2;
        if (r.size() != kObsHeader.size())
            throw SchemaError("observations row " + std::to_string(row_no) + ": expected " +
                              std::to_string(kObsHeader.size()) + " fields, got " +
                              std::to_string(r.size()));
        PedestrianObservation o;
        o.obs_id = r[0];
        o.site_id = r[1];
        o.age_group = age_group_from_string(r[2]);
        o.gender = gender_from_string(r[3]);
        o.walking_context = walking_context_from_string(r[4]);
        o.weather = weather_from_string(r[5]);
        o.lighting_intersection = parse_bool(r[6], "lighting_intersection", row_no);
        o.lighting_midblock = parse_bool(r[7], "lighting_midblock", row_no);
        o.green_onset_interval = green_onset_from_string(r[8]);
        o.green_interval = green_interval_from_string(r[9]);
        o.push_button_available = parse_bool(r[10], "push_button_available", row_no);
        if (r[11].empty())
            o.push_button_affects_time.reset();
        else
            o.push_button_affects_time = parse_bool(r[11], "push_button_affects_time", row_no);
        o.left_turn_protection = parse_bool(r[12], "left_turn_protection", row_no);
        int lbl = parse_int(r[13], "label", row_no);
        if (lbl != 0 && lbl != 1)
            throw SchemaError("column \"label\": expected 0 or 1, got " + std::to_string(lbl) +
                              " (row " + std::to_string(row_no) + ")");
        o.label = static_cast<Label>(lbl);
        validate_observation(o, row_no);
        obs.push_back(std::move(o));
    }

    Corpus c{sites, obs};
    validate_corpus(c);
    return {std::move(sites), std::move(obs)};
}

std::string render_sites_csv(const std::vector<SiteRecord>& sites) {
    std::string out = join_csv_row(kSiteHeader) + "\n";
    for (const auto& s : sites) {
        out += join_csv_row({s.site_id, s.location_name, std::to_string(s.lanes),
                             std::to_string(s.speed_limit), s.raised_median ? "true" : "false",
                             s.transit_station ? "true" : "false",
                             std::to_string(s.sidewalk_width), to_string(s.land_use)});
        out.push_back('\n');
    }
    return out;
}

std::string render_observations_csv(const std::vector<PedestrianObservation>& obs) {
    std::string out = join_csv_row(kObsHeader) + "\n";
    for (const auto& o : obs) {
        std::string affects =
            o.push_button_affects_time.has_value()
                ? (*o.push_button_affects_time ? "true" : "false")
                : "";
        out += join_csv_row({o.obs_id, o.site_id, to_string(o.age_group), to_string(o.gender),
                             to_string(o.walking_context), to_string(o.weather),
                             o.lighting_intersection ? "true" : "false",
                             o.lighting_midblock ? "true" : "false",
                             to_string(o.green_onset_interval), to_string(o.green_interval),
                             o.push_button_available ? "true" : "false", affects,
                             o.left_turn_protection ? "true" : "false",
                             std::to_string(static_cast<int>(o.label))});
        out.push_back('\n');
    }
    return out;
}

void write_corpus(const std::vector<SiteRecord>& sites,
                  const std::vector<PedestrianObservation>& observations,
                  const std::string& sites_path, const std::string& observations_path) {
    write_text_file(sites_path, render_sites_csv(sites));
    write_text_file(observations_path, render_observations_csv(observations));
}

// ----------------------------- synthetic generator -----------------------------

std::vector<int> largest_remainder_allocation(int n, const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    std::vector<int> alloc(weights.size(), 0);
    std::vector<std::pair<double, std::size_t>> rema;
    int assigned = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        double target = n * weights[i] / total;
        alloc[i] = static_cast<int>(std::floor(target));
        assigned += alloc[i];
        rema.push_back({target - alloc[i], i});
    }
    std::stable_sort(rema.begin(), rema.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (int k = 0; k < n - assigned; ++k) alloc[rema[static_cast<std::size_t>(k)].second]++;
    return alloc;
}

double weather_adversity(Weather w) {
    switch (w) {
        case Weather::clear_sunny: return 0.0;
        case Weather::partly_cloudy: return 0.25;
        case Weather::cloudy: return 0.5;
        case Weather::rain_drizzle: return 1.0;
    }
    return 0.0;
}

double label_rule_linear_term(const LabelRule& rule, const PedestrianObservation& o,
                              const SiteRecord& s) {
    double z = 0.0;
    if (o.gender == Gender::male) z += rule.coef_male;
    if (o.walking_context == WalkingContext::alone) z += rule.coef_alone;
    if (o.age_group == AgeGroup::senior) z += rule.coef_senior;
    z += rule.coef_lanes * (s.lanes - rule.lanes_center);
    if (o.lighting_midblock) z += rule.coef_lighting_midblock;
    z += rule.coef_weather_adverse * weather_adversity(o.weather);
    return z;
}

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// marginal distributions mirrored from the field-study summary tables
struct Marginals {
    // site attributes
    std::vector<double> lanes_p = {0.18, 0.14, 0.25, 0.13, 0.18, 0.04, 0.04, 0.02, 0.02};  // 2..10
    std::vector<double> speed_p = {0.40, 0.43, 0.17};                                      // 25/30/35
    double raised_median_p = 0.37;
    double transit_p = 0.77;
    std::vector<double> sidewalk_p = {0.30, 0.25, 0.25, 0.15, 0.05};  // 10..14
    std::vector<double> land_use_p = {0.29, 0.23, 0.20, 0.14, 0.14};

    // observation attributes
    std::vector<double> age_p = {0.151, 0.815, 0.022, 0.012};
    std::vector<double> gender_p = {0.668, 0.306, 0.026};
    double alone_p = 0.633;
    std::vector<double> weather_p = {0.473, 0.301, 0.115, 0.111};
    double lighting_int_p = 0.849;
    double lighting_mid_p = 0.917;
    std::vector<double> green_onset_p = {0.087, 0.504, 0.402, 0.007};
    std::vector<double> green_interval_p = {0.087, 0.543, 0.362, 0.007};
    double push_avail_p = 0.831;
    double push_affects_p = 0.862;  // conditional on available
    double left_turn_p = 0.686;
};

const char* kStreetNames[] = {
    "Harbor Blvd",    "Cedar Ave",      "Granby St",     "Colonial Pkwy", "Tidewater Dr",
    "Mercury Rd",     "Poplar Ave",     "Landing Blvd",  "Chesapeake St", "Willow Rd",
    "Bayside Ave",    "Magnolia Blvd",  "Greenbrier Rd", "Laskin Ave",    "Indian River Rd",
    "Pembroke Blvd",  "Holland St",     "Kempsville Rd", "Providence St", "Lynnhaven Pkwy",
    "Witchduck Rd",   "Newtown Ave",    "Shore Dr",      "Atlantic Ave",  "Princess Anne Rd",
    "Ocean View Ave", "Ballentine Rd",  "Ingleside St",  "Sewells Ave",   "Warwick Blvd",
    "Jefferson Ave",  "Victory Rd",     "Denbigh Blvd",  "Oyster Point Rd", "Rochambeau Dr"};

// quota assignment: categorical values allocated by largest remainder,
// then shuffled so attributes are independent across sites
std::vector<int> quota_column(int n, const std::vector<double>& probs, Rng& rng) {
    std::vector<int> alloc = largest_remainder_allocation(n, probs);
    std::vector<int> column;
    column.reserve(static_cast<std::size_t>(n));
    for (std::size_t v = 0; v < alloc.size(); ++v)
        for (int k = 0; k < alloc[v]; ++k) column.push_back(static_cast<int>(v));
    rng.shuffle(column);
    return column;
}

}  // namespace

SyntheticCorpus generate_synthetic(int n_sites, int n_obs, std::uint64_t seed,
                                   const LabelRule& rule) {
    if (n_sites < 1) throw ConfigError("generate_synthetic: n_sites must be >= 1");
    if (n_obs < 1) throw ConfigError("generate_synthetic: n_obs must be >= 1");

    const Marginals m;
    SyntheticCorpus out;

    // sites: quota-matched marginals
    Rng site_rng(derive_seed(seed, "sites"));
    auto lanes_col = quota_column(n_sites, m.lanes_p, site_rng);
    auto speed_col = quota_column(n_sites, m.speed_p, site_rng);
    auto median_col = quota_column(n_sites, {1.0 - m.raised_median_p, m.raised_median_p}, site_rng);
    auto transit_col = quota_column(n_sites, {1.0 - m.transit_p, m.transit_p}, site_rng);
    auto sidewalk_col = quota_column(n_sites, m.sidewalk_p, site_rng);
    auto land_col = quota_column(n_sites, m.land_use_p, site_rng);

    out.sites.reserve(static_cast<std::size_t>(n_sites));
    for (int i = 0; i < n_sites; ++i) {
        SiteRecord s;
        s.site_id = "S" + std::string(i + 1 < 10 ? "0" : "") + std::to_string(i + 1);
        const char* street = kStreetNames[static_cast<std::size_t>(i) %
                                          (sizeof(kStreetNames) / sizeof(kStreetNames[0]))];
        s.location_name = std::string(street);
        if (i >= static_cast<int>(sizeof(kStreetNames) / sizeof(kStreetNames[0])))
            s.location_name += " " + std::to_string(i / 35 + 2);
        s.lanes = 2 + lanes_col[static_cast<std::size_t>(i)];
        s.speed_limit = 25 + 5 * speed_col[static_cast<std::size_t>(i)];
        s.raised_median = median_col[static_cast<std::size_t>(i)] == 1;
        s.transit_station = transit_col[static_cast<std::size_t>(i)] == 1;
        s.sidewalk_width = 10 + sidewalk_col[static_cast<std::size_t>(i)];
        s.land_use = static_cast<LandUse>(land_col[static_cast<std::size_t>(i)]);
        out.sites.push_back(std::move(s));
    }

    // per-site intercept offsets
    Rng effect_rng(derive_seed(seed, "site_effects"));
    for (const auto& s : out.sites)
        out.site_offsets[s.site_id] =
            rule.site_intercept_sd > 0.0 ? effect_rng.normal(0.0, rule.site_intercept_sd) : 0.0;

    // observations: iid draws from the marginal tables
    Rng obs_rng(derive_seed(seed, "observations"));
    out.observations.reserve(static_cast<std::size_t>(n_obs));
    int id_width = std::max<int>(4, static_cast<int>(std::to_string(n_obs).size()));
    for (int i = 0; i < n_obs; ++i) {
        PedestrianObservation o;
        std::string num = std::to_string(i + 1);
        o.obs_id = "O" + std::string(static_cast<std::size_t>(id_width) - num.size(), '0') + num;
        const auto& site = out.sites[obs_rng.below(static_cast<std::uint64_t>(n_sites))];
        o.site_id = site.site_id;
        o.age_group = static_cast<AgeGroup>(obs_rng.categorical(m.age_p));
        o.gender = static_cast<Gender>(obs_rng.categorical(m.gender_p));
        o.walking_context =
            obs_rng.bernoulli(m.alone_p) ? WalkingContext::alone : WalkingContext::group;
        o.weather = static_cast<Weather>(obs_rng.categorical(m.weather_p));
        o.lighting_intersection = obs_rng.bernoulli(m.lighting_int_p);
        o.lighting_midblock = obs_rng.bernoulli(m.lighting_mid_p);
        o.green_onset_interval = static_cast<GreenOnsetInterval>(obs_rng.categorical(m.green_onset_p));
        o.green_interval = static_cast<GreenInterval>(obs_rng.categorical(m.green_interval_p));
        o.push_button_available = obs_rng.bernoulli(m.push_avail_p);
        if (o.push_button_available)
            o.push_button_affects_time = obs_rng.bernoulli(m.push_affects_p);
        else
            o.push_button_affects_time.reset();
        o.left_turn_protection = obs_rng.bernoulli(m.left_turn_p);
        out.observations.push_back(std::move(o));
    }

    // intercept calibration by bisection on a fixed internal sample, so the
    // marginal mid-block rate matches the target for any coefficient choice
    {
        const int kCalibration = 100000;
        std::vector<double> z;
        z.reserve(kCalibration);
        Rng cal_rng(derive_seed(seed, "calibration"));
        for (int i = 0; i < kCalibration; ++i) {
            PedestrianObservation o;
            const auto& site = out.sites[cal_rng.below(static_cast<std::uint64_t>(n_sites))];
            o.age_group = static_cast<AgeGroup>(cal_rng.categorical(m.age_p));
            o.gender = static_cast<Gender>(cal_rng.categorical(m.gender_p));
            o.walking_context =
                cal_rng.bernoulli(m.alone_p) ? WalkingContext::alone : WalkingContext::group;
            o.weather = static_cast<Weather>(cal_rng.categorical(m.weather_p));
            o.lighting_midblock = cal_rng.bernoulli(m.lighting_mid_p);
            z.push_back(label_rule_linear_term(rule, o, site) +
                        out.site_offsets.at(site.site_id));
        }
        double lo = -30.0, hi = 30.0;
        for (int it = 0; it < 200; ++it) {
            double mid = 0.5 * (lo + hi);
            double rate = 0.0;
            for (double v : z) rate += sigmoid(mid + v);
            rate /= z.size();
            if (rate < rule.target_midblock_rate) lo = mid;
            else hi = mid;
        }
        out.calibrated_intercept = 0.5 * (lo + hi);
    }

    // labels
    Rng label_rng(derive_seed(seed, "labels"));
    std::unordered_map<std::string, const SiteRecord*> by_id;
    for (const auto& s : out.sites) by_id[s.site_id] = &s;
    for (auto& o : out.observations) {
        double z = out.calibrated_intercept + label_rule_linear_term(rule, o, *by_id.at(o.site_id)) +
                   out.site_offsets.at(o.site_id);
        o.label = label_rng.bernoulli(sigmoid(z)) ? Label::midblock : Label::intersection;
    }

    return out;
}

// ----------------------------- splits -----------------------------

SplitAssignment stratified_split(const std::vector<PedestrianObservation>& obs,
                                 SplitRatios ratios, std::uint64_t seed) {
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < obs.size(); ++i)
        (obs[i].label == Label::midblock ? pos : neg).push_back(i);
    if (pos.empty() || neg.empty())
        throw DataError("stratified_split: corpus must contain both labels");

    SplitAssignment split;
    split.strategy = SplitStrategy::stratified_random;
    split.seed = seed;

    Rng rng(derive_seed(seed, "stratified_split"));
    for (auto* cls : {&neg, &pos}) {
        rng.shuffle(*cls);
        // validation/test sizes rounded per class, train absorbs the residue;
        // keeps small partitions stratified even for tiny classes
        const int nc = static_cast<int>(cls->size());
        int n_val = static_cast<int>(std::llround(nc * ratios.validation));
        int n_test = static_cast<int>(std::llround(nc * ratios.test));
        if (n_val + n_test > nc) n_test = nc - n_val;
        int n_train = nc - n_val - n_test;
        std::size_t at = 0;
        for (int k = 0; k < n_train; ++k) split.train.insert(obs[(*cls)[at++]].obs_id);
        for (int k = 0; k < n_val; ++k) split.validation.insert(obs[(*cls)[at++]].obs_id);
        for (int k = 0; k < n_test; ++k) split.test.insert(obs[(*cls)[at++]].obs_id);
    }
    return split;
}

SplitAssignment site_split(const std::vector<SiteRecord>& sites,
                           const std::vector<PedestrianObservation>& obs, SiteCounts counts,
                           std::uint64_t seed) {
    const int needed = counts.train + counts.validation + counts.test;
    if (static_cast<int>(sites.size()) < needed)
        throw DataError("site_split: need at least " + std::to_string(needed) + " sites, have " +
                        std::to_string(sites.size()));

    SplitAssignment split;
    split.strategy = SplitStrategy::site_based;
    split.seed = seed;

    std::vector<std::string> ids;
    ids.reserve(sites.size());
    for (const auto& s : sites) ids.push_back(s.site_id);
    Rng rng(derive_seed(seed, "site_split"));
    rng.shuffle(ids);

    std::unordered_map<std::string, int> part_of;  // 0 train, 1 val, 2 test
    std::size_t at = 0;
    for (int k = 0; k < counts.train; ++k) {
        split.train_sites.push_back(ids[at]);
        part_of[ids[at++]] = 0;
    }
    for (int k = 0; k < counts.validation; ++k) {
        split.validation_sites.push_back(ids[at]);
        part_of[ids[at++]] = 1;
    }
    for (int k = 0; k < counts.test; ++k) {
        split.test_sites.push_back(ids[at]);
        part_of[ids[at++]] = 2;
    }
    while (at < ids.size()) split.unassigned_sites.push_back(ids[at++]);

    for (const auto& o : obs) {
        auto it = part_of.find(o.site_id);
        if (it == part_of.end()) continue;  // unassigned site: excluded, reported above
        if (it->second == 0) split.train.insert(o.obs_id);
        else if (it->second == 1) split.validation.insert(o.obs_id);
        else split.test.insert(o.obs_id);
    }
    return split;
}

}  // namespace pedlm
