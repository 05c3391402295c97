#include "gastmix/composition.hpp"

#include "gastmix/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>

namespace gastmix::composition {

using nlohmann::json;

MentionResult extract_mentions(const std::vector<corpus::Sentence>& sentences,
                               const std::vector<bool>& positive, const gazetteer::Gazetteer& g,
                               const std::unordered_map<std::string, ReviewMeta>& reviews) {
    if (sentences.size() != positive.size())
        throw DataError("extract_mentions: sentence/prediction size mismatch");
    MentionResult out;
    for (std::size_t i = 0; i < sentences.size(); ++i) {
        if (!positive[i]) continue;
        const auto spans = g.match(sentences[i]);
        if (spans.empty()) {
            ++out.unattributed;
            continue;
        }
        const auto rit = reviews.find(sentences[i].review_id);
        if (rit == reviews.end())
            throw DataError("extract_mentions: sentence references unknown review '" +
                            sentences[i].review_id + "'");
        std::set<std::string> countries;
        for (const auto& m : spans) countries.insert(g.terms()[m.term_index].country);
        for (const auto& c : countries) {
            MentionRecord r;
            r.business_id = rit->second.business_id;
            r.country = c;
            r.date = rit->second.date;
            r.sentence_id = sentences[i].sentence_id;
            out.records.push_back(std::move(r));
        }
    }
    return out;
}

Window parse_window(std::string_view name) {
    if (name == "all") return Window::All;
    if (name == "month") return Window::Month;
    if (name == "quarter") return Window::Quarter;
    throw DataError("unknown window: '" + std::string(name) + "' (expected all, month or quarter)");
}

std::string_view to_string(Window w) {
    switch (w) {
        case Window::All: return "all";
        case Window::Month: return "month";
        case Window::Quarter: return "quarter";
    }
    return "?";
}

namespace {

int days_in_month(int year, int month) {
    static const int days[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (month == 2 && ((year % 4 == 0 && year % 100 != 0) || year % 400 == 0)) return 29;
    return days[month - 1];
}

struct WindowKey {
    std::string label;
    std::optional<corpus::Date> start;
    std::optional<corpus::Date> end;
};

std::optional<WindowKey> window_key(const std::optional<corpus::Date>& date, Window w) {
    if (w == Window::All) return WindowKey{"all-time", std::nullopt, std::nullopt};
    if (!date) return std::nullopt;  // undated records only belong to all-time
    char buf[32];
    if (w == Window::Month) {
        std::snprintf(buf, sizeof(buf), "%04d-%02d", date->year, date->month);
        return WindowKey{buf, corpus::Date{date->year, date->month, 1},
                         corpus::Date{date->year, date->month, days_in_month(date->year, date->month)}};
    }
    const int q = (date->month - 1) / 3 + 1;
    std::snprintf(buf, sizeof(buf), "%04d-Q%d", date->year, q);
    const int first = (q - 1) * 3 + 1;
    const int last = first + 2;
    return WindowKey{buf, corpus::Date{date->year, first, 1},
                     corpus::Date{date->year, last, days_in_month(date->year, last)}};
}

} // namespace

std::vector<CompositionEstimate> aggregate(const std::vector<MentionRecord>& records, Window window,
                                           std::size_t min_support) {
    std::map<std::pair<std::string, std::string>, CompositionEstimate> groups;
    for (const auto& r : records) {
        const auto key = window_key(r.date, window);
        if (!key) continue;
        auto& est = groups[{r.business_id, key->label}];
        if (est.business_id.empty()) {
            est.business_id = r.business_id;
            est.window = key->label;
            est.window_start = key->start;
            est.window_end = key->end;
        }
        est.counts[r.country]++;
        est.support++;
    }
    std::vector<CompositionEstimate> out;
    for (auto& [key, est] : groups) {
        if (est.support < min_support) continue;
        for (const auto& [country, count] : est.counts) {
            est.shares[country] = static_cast<double>(count) / static_cast<double>(est.support);
        }
        out.push_back(std::move(est));
    }
    return out;  // map iteration is already (business_id, window)-sorted
}

std::unordered_map<std::string, LatLon> load_locations(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open locations file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw DataError(path + ": missing header");
    std::unordered_map<std::string, LatLon> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::size_t c1 = line.find(',');
        const std::size_t c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
        if (c2 == std::string::npos)
            throw DataError(path + ":" + std::to_string(line_no) + ": expected business_id,lat,lon");
        LatLon ll;
        const std::string id = line.substr(0, c1);
        auto parse_num = [&](std::size_t from, std::size_t to, double& v) {
            auto [p, ec] = std::from_chars(line.data() + from, line.data() + to, v);
            if (ec != std::errc() || p != line.data() + to)
                throw DataError(path + ":" + std::to_string(line_no) + ": bad coordinate");
        };
        parse_num(c1 + 1, c2, ll.lat);
        parse_num(c2 + 1, line.size(), ll.lon);
        out[id] = ll;
    }
    return out;
}

GeoJsonExport export_geojson(const std::vector<CompositionEstimate>& estimates,
                             const std::unordered_map<std::string, LatLon>& locations) {
    if (estimates.empty()) throw DataError("export_geojson: no estimates");
    GeoJsonExport out;
    json features = json::array();
    for (const auto& est : estimates) {
        const auto it = locations.find(est.business_id);
        if (it == locations.end()) {
            out.unplaced.push_back(est);
            continue;
        }
        const LatLon ll = it->second;
        if (std::abs(ll.lat) > 90.0 || std::abs(ll.lon) > 180.0)
            throw DataError("export_geojson: invalid coordinates for business '" + est.business_id + "'");
        json props{{"business_id", est.business_id},
                   {"window", est.window},
                   {"support", est.support},
                   {"shares", est.shares}};
        if (est.window_start) props["window_start"] = est.window_start->iso();
        if (est.window_end) props["window_end"] = est.window_end->iso();
        features.push_back(json{{"type", "Feature"},
                                {"geometry", json{{"type", "Point"},
                                                  // GeoJSON positions are [lon, lat]
                                                  {"coordinates", json::array({ll.lon, ll.lat})}}},
                                {"properties", std::move(props)}});
    }
    out.geojson = json{{"type", "FeatureCollection"}, {"features", std::move(features)}}.dump(2) + "\n";
    return out;
}

} // namespace gastmix::composition
