#include "floodlens/geo.hpp"

#include "floodlens/csv.hpp"
#include "floodlens/text_utils.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>

namespace floodlens::geo {

using nlohmann::json;

namespace {

constexpr double kEarthRadiusKm = 6371.0;
constexpr double kDegToRad = 3.14159265358979323846 / 180.0;

void check_coords(LatLon p) {
    if (!(p.lat >= -90.0 && p.lat <= 90.0 && p.lon >= -180.0 && p.lon <= 180.0))
        throw std::domain_error("coordinates out of range");
}

} // namespace

double haversine_km(LatLon a, LatLon b) {
    check_coords(a);
    check_coords(b);
    const double lat1 = a.lat * kDegToRad, lat2 = b.lat * kDegToRad;
    const double dlat = (b.lat - a.lat) * kDegToRad;
    const double dlon = (b.lon - a.lon) * kDegToRad;
    const double s1 = std::sin(dlat / 2.0), s2 = std::sin(dlon / 2.0);
    const double h = s1 * s1 + std::cos(lat1) * std::cos(lat2) * s2 * s2;
    return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

namespace {

bool on_segment(LatLon p, LatLon a, LatLon b) {
    const double cross = (b.lon - a.lon) * (p.lat - a.lat) - (b.lat - a.lat) * (p.lon - a.lon);
    if (std::fabs(cross) > 1e-12) return false;
    return p.lat >= std::min(a.lat, b.lat) - 1e-12 && p.lat <= std::max(a.lat, b.lat) + 1e-12 &&
           p.lon >= std::min(a.lon, b.lon) - 1e-12 && p.lon <= std::max(a.lon, b.lon) + 1e-12;
}

} // namespace

bool point_in_zip(LatLon p, const ZipRegion& region) {
    bool inside = false;
    for (const auto& ring : region.rings) {
        if (ring.size() < 4) continue; // closed triangle minimum
        for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
            const LatLon a = ring[i], b = ring[i + 1];
            if (on_segment(p, a, b)) return true;
            if ((a.lat > p.lat) != (b.lat > p.lat)) {
                const double x_int = a.lon + (p.lat - a.lat) * (b.lon - a.lon) / (b.lat - a.lat);
                if (p.lon < x_int) inside = !inside;
            }
        }
    }
    return inside;
}

const SensorSite& nearest_sensor(const ZipRegion& region, const std::vector<SensorSite>& sensors) {
    if (sensors.empty()) throw std::invalid_argument("sensor list is empty");
    const SensorSite* best = nullptr;
    double best_d = 0.0;
    for (const auto& s : sensors) {
        const double d = haversine_km(region.centroid, s.location);
        if (!best || d < best_d || (d == best_d && s.sensor_id < best->sensor_id)) {
            best = &s;
            best_d = d;
        }
    }
    return *best;
}

TileQueryResult tiles_for_query(const ZipRegion& region, TimeWindow window,
                                const std::vector<ImageryTile>& tiles, double radius_km,
                                std::size_t min_tiles) {
    if (radius_km <= 0.0) throw std::invalid_argument("radius_km must be positive");
    if (min_tiles < 1) throw std::invalid_argument("min_tiles must be >= 1");

    struct Scored {
        const ImageryTile* tile;
        double dist;
    };
    std::vector<Scored> in_poly;
    std::vector<Scored> near;
    for (const auto& t : tiles) {
        const LatLon c = t.center();
        const double d = haversine_km(region.centroid, c);
        if (point_in_zip(c, region)) in_poly.push_back({&t, d});
        else if (d <= radius_km) near.push_back({&t, d});
    }

    auto by_dist_id = [](const Scored& a, const Scored& b) {
        if (a.dist != b.dist) return a.dist < b.dist;
        return a.tile->tile_id < b.tile->tile_id;
    };

    std::vector<Scored> picked;
    bool any_in_window = false;
    for (const auto& s : in_poly)
        if (window.contains(s.tile->acquired_at)) {
            picked.push_back(s);
            any_in_window = true;
        }
    if (!any_in_window && !in_poly.empty()) {
        // nearest acquisition pass: every in-polygon tile sharing the UTC day
        // of the temporally closest tile
        std::int64_t best_gap = window.distance_secs(in_poly.front().tile->acquired_at);
        std::int64_t best_day = day_of(in_poly.front().tile->acquired_at);
        for (const auto& s : in_poly) {
            const std::int64_t gap = window.distance_secs(s.tile->acquired_at);
            if (gap < best_gap) {
                best_gap = gap;
                best_day = day_of(s.tile->acquired_at);
            }
        }
        for (const auto& s : in_poly)
            if (day_of(s.tile->acquired_at) == best_day) picked.push_back(s);
    }

    TileQueryResult result;
    if (picked.size() < min_tiles) {
        result.fallback_used = true;
        std::sort(near.begin(), near.end(), by_dist_id);
        picked.insert(picked.end(), near.begin(), near.end());
    }
    std::sort(picked.begin(), picked.end(), by_dist_id);

    result.tiles.reserve(picked.size());
    for (const auto& s : picked) result.tiles.push_back(*s.tile);
    result.no_imagery = result.tiles.empty();
    return result;
}

namespace {

std::vector<LatLon> ring_from_geojson(const json& coords) {
    std::vector<LatLon> ring;
    ring.reserve(coords.size());
    for (const auto& v : coords) {
        // GeoJSON order is [lon, lat]
        ring.push_back({v.at(1).get<double>(), v.at(0).get<double>()});
    }
    if (!ring.empty() &&
        (ring.front().lat != ring.back().lat || ring.front().lon != ring.back().lon))
        ring.push_back(ring.front());
    return ring;
}

LatLon shoelace_centroid(const std::vector<LatLon>& ring) {
    double area2 = 0.0, cx = 0.0, cy = 0.0;
    for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
        const double x0 = ring[i].lon, y0 = ring[i].lat;
        const double x1 = ring[i + 1].lon, y1 = ring[i + 1].lat;
        const double w = x0 * y1 - x1 * y0;
        area2 += w;
        cx += (x0 + x1) * w;
        cy += (y0 + y1) * w;
    }
    if (std::fabs(area2) < 1e-12) {
        // degenerate ring: bounding-box center
        double min_lat = ring[0].lat, max_lat = ring[0].lat;
        double min_lon = ring[0].lon, max_lon = ring[0].lon;
        for (const auto& p : ring) {
            min_lat = std::min(min_lat, p.lat);
            max_lat = std::max(max_lat, p.lat);
            min_lon = std::min(min_lon, p.lon);
            max_lon = std::max(max_lon, p.lon);
        }
        return {(min_lat + max_lat) / 2.0, (min_lon + max_lon) / 2.0};
    }
    return {cy / (3.0 * area2), cx / (3.0 * area2)};
}

} // namespace

std::vector<ZipRegion> load_zip_regions_geojson(const std::filesystem::path& path) {
    json j = json::parse(read_file(path.string()));
    if (j.value("type", "") != "FeatureCollection")
        throw std::runtime_error(path.string() + ": not a GeoJSON FeatureCollection");
    std::vector<ZipRegion> regions;
    for (const auto& feat : j.at("features")) {
        ZipRegion region;
        region.zip = feat.at("properties").at("zip").get<std::string>();
        if (!feat.contains("geometry") || feat["geometry"].is_null()) continue;
        const auto& geom = feat["geometry"];
        const std::string type = geom.value("type", "");
        if (type == "Polygon") {
            for (const auto& ring : geom.at("coordinates"))
                region.rings.push_back(ring_from_geojson(ring));
        } else if (type == "MultiPolygon") {
            for (const auto& poly : geom.at("coordinates"))
                for (const auto& ring : poly) region.rings.push_back(ring_from_geojson(ring));
        } else {
            throw std::runtime_error(path.string() + ": unsupported geometry type " + type);
        }
        if (region.rings.empty() || region.rings.front().size() < 4)
            throw std::runtime_error(path.string() + ": degenerate polygon for zip " + region.zip);
        region.centroid = shoelace_centroid(region.rings.front());
        regions.push_back(std::move(region));
    }
    return regions;
}

std::vector<SensorSite> load_sensors_csv(const std::filesystem::path& path) {
    auto rows = parse_csv(read_file(path.string()));
    if (rows.empty()) throw std::runtime_error(path.string() + ": empty sensor file");
    std::map<std::string, SensorSite> sites;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() < 5) continue;
        auto when = parse_iso8601(row[3]);
        if (!when) continue;
        double lat, lon, precip;
        try {
            lat = std::stod(row[1]);
            lon = std::stod(row[2]);
            precip = std::stod(row[4]);
        } catch (const std::exception&) {
            continue;
        }
        if (precip < 0.0) continue;
        auto& site = sites[row[0]];
        site.sensor_id = row[0];
        site.location = {lat, lon};
        site.readings.push_back({*when, precip});
    }
    std::vector<SensorSite> out;
    out.reserve(sites.size());
    for (auto& [id, site] : sites) {
        std::sort(site.readings.begin(), site.readings.end(),
                  [](const SensorReading& a, const SensorReading& b) { return a.hour < b.hour; });
        // keep readings strictly increasing
        auto last = std::unique(site.readings.begin(), site.readings.end(),
                                [](const SensorReading& a, const SensorReading& b) {
                                    return a.hour == b.hour;
                                });
        site.readings.erase(last, site.readings.end());
        out.push_back(std::move(site));
    }
    return out;
}

std::vector<ImageryTile> load_tiles_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::vector<ImageryTile> tiles;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        json j = json::parse(line);
        ImageryTile t;
        t.tile_id = j.at("tile_id").get<std::string>();
        t.min_lat = j.at("min_lat").get<double>();
        t.min_lon = j.at("min_lon").get<double>();
        t.max_lat = j.at("max_lat").get<double>();
        t.max_lon = j.at("max_lon").get<double>();
        if (!(t.min_lat < t.max_lat && t.min_lon < t.max_lon))
            throw std::runtime_error("tile " + t.tile_id + ": bbox min must be below max");
        auto when = parse_iso8601(j.at("acquired_at").get<std::string>());
        if (!when) throw std::runtime_error("tile " + t.tile_id + ": bad acquired_at");
        t.acquired_at = *when;
        if (j.contains("caption_doc_id") && j["caption_doc_id"].is_string())
            t.caption_doc_id = j["caption_doc_id"].get<std::string>();
        if (j.contains("embedding_id") && j["embedding_id"].is_string())
            t.embedding_id = j["embedding_id"].get<std::string>();
        tiles.push_back(std::move(t));
    }
    return tiles;
}

} // namespace floodlens::geo
