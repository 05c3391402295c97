#ifndef GASTMIX_COMPOSITION_HPP
#define GASTMIX_COMPOSITION_HPP

#include "gastmix/corpus.hpp"
#include "gastmix/gazetteer.hpp"

#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace gastmix::composition {

struct ReviewMeta {
    std::string business_id;
    std::optional<corpus::Date> date;
};

struct MentionRecord {
    std::string business_id;
    std::string country;  // alpha-2, from the matched term
    std::optional<corpus::Date> date;
    std::uint64_t sentence_id = 0;
};

struct MentionResult {
    std::vector<MentionRecord> records;
    std::size_t unattributed = 0;  // positive sentences without any match span
};

// One record per distinct country among the match spans of each positive
// sentence; repeated terms for the same country within a sentence count once.
MentionResult extract_mentions(const std::vector<corpus::Sentence>& sentences,
                               const std::vector<bool>& positive, const gazetteer::Gazetteer& g,
                               const std::unordered_map<std::string, ReviewMeta>& reviews);

enum class Window { All, Month, Quarter };

Window parse_window(std::string_view name);
std::string_view to_string(Window w);

struct CompositionEstimate {
    std::string business_id;
    std::string window;  // "all-time", "2019-07", "2019-Q3"
    std::optional<corpus::Date> window_start;  // inclusive
    std::optional<corpus::Date> window_end;    // inclusive
    std::map<std::string, std::size_t> counts; // country -> mentions
    std::map<std::string, double> shares;      // country -> count / support
    std::size_t support = 0;
};

// Groups records by (business, window); groups with support below
// min_support are suppressed. Undated records only ever fall into the
// all-time window. Output is sorted by (business_id, window).
std::vector<CompositionEstimate> aggregate(const std::vector<MentionRecord>& records, Window window,
                                           std::size_t min_support);

struct LatLon {
    double lat = 0;
    double lon = 0;
};

// Locations CSV: business_id,lat,lon with a header row.
std::unordered_map<std::string, LatLon> load_locations(const std::string& path);

struct GeoJsonExport {
    std::string geojson;  // RFC 7946 FeatureCollection, one Point per estimate
    std::vector<CompositionEstimate> unplaced;  // estimates without coordinates
};

GeoJsonExport export_geojson(const std::vector<CompositionEstimate>& estimates,
                             const std::unordered_map<std::string, LatLon>& locations);

} // namespace gastmix::composition

#endif
