#ifndef GASTMIX_TESTS_GEOJSON_VALIDATOR_HPP
#define GASTMIX_TESTS_GEOJSON_VALIDATOR_HPP

// Test-side RFC 7946 structural validator, written against the RFC and kept
// independent of the exporter: it re-parses the serialized text and checks
// the rules the exporter is supposed to obey.

#include <json.hpp>

#include <string>
#include <vector>

namespace geojson_validator {

struct Result {
    bool ok = true;
    std::vector<std::string> errors;

    void fail(const std::string& msg) {
        ok = false;
        errors.push_back(msg);
    }
};

inline void validate_position(const nlohmann::json& pos, Result& r) {
    if (!pos.is_array() || pos.size() < 2 || pos.size() > 3) {
        r.fail("position must be an array of 2 or 3 numbers");
        return;
    }
    for (const auto& c : pos) {
        if (!c.is_number()) {
            r.fail("position coordinates must be numbers");
            return;
        }
    }
    const double lon = pos[0].get<double>();
    const double lat = pos[1].get<double>();
    if (lon < -180.0 || lon > 180.0) r.fail("longitude out of range");
    if (lat < -90.0 || lat > 90.0) r.fail("latitude out of range");
}

inline void validate_geometry(const nlohmann::json& g, Result& r) {
    if (g.is_null()) return;  // null geometry is allowed for features
    if (!g.is_object() || !g.contains("type") || !g["type"].is_string()) {
        r.fail("geometry must be an object with a type");
        return;
    }
    const std::string type = g["type"].get<std::string>();
    static const char* kTypes[] = {"Point",           "MultiPoint",   "LineString",
                                   "MultiLineString", "Polygon",      "MultiPolygon",
                                   "GeometryCollection"};
    bool known = false;
    for (const char* t : kTypes) known = known || type == t;
    if (!known) {
        r.fail("unknown geometry type: " + type);
        return;
    }
    if (type == "GeometryCollection") {
        if (!g.contains("geometries") || !g["geometries"].is_array()) {
            r.fail("GeometryCollection needs a geometries array");
            return;
        }
        for (const auto& sub : g["geometries"]) validate_geometry(sub, r);
        return;
    }
    if (!g.contains("coordinates")) {
        r.fail(type + " needs coordinates");
        return;
    }
    if (type == "Point") {
        validate_position(g["coordinates"], r);
    } else if (type == "MultiPoint" || type == "LineString") {
        for (const auto& p : g["coordinates"]) validate_position(p, r);
    }  // deeper nesting unused by this project
}

inline void validate_feature(const nlohmann::json& f, Result& r) {
    if (!f.is_object()) {
        r.fail("feature must be an object");
        return;
    }
    if (!f.contains("type") || f["type"] != "Feature") r.fail("feature type must be 'Feature'");
    if (!f.contains("geometry")) r.fail("feature must have a geometry member (possibly null)");
    else validate_geometry(f["geometry"], r);
    if (!f.contains("properties")) r.fail("feature must have a properties member (possibly null)");
    else if (!f["properties"].is_object() && !f["properties"].is_null())
        r.fail("properties must be an object or null");
}

inline Result validate(const std::string& text) {
    Result r;
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        r.fail(std::string("not valid JSON: ") + e.what());
        return r;
    }
    if (!j.is_object() || !j.contains("type")) {
        r.fail("top level must be an object with a type");
        return r;
    }
    if (j["type"] == "FeatureCollection") {
        if (!j.contains("features") || !j["features"].is_array()) {
            r.fail("FeatureCollection needs a features array");
            return r;
        }
        for (const auto& f : j["features"]) validate_feature(f, r);
        // forbidden members per RFC 7946 section 7.1
        for (const char* banned : {"geometry", "properties", "coordinates"}) {
            if (j.contains(banned)) r.fail(std::string("FeatureCollection must not have '") + banned + "'");
        }
        return r;
    }
    if (j["type"] == "Feature") {
        validate_feature(j, r);
        return r;
    }
    validate_geometry(j, r);
    return r;
}

} // namespace geojson_validator

#endif
