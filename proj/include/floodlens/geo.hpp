#pragma once

#include "floodlens/time_utils.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace floodlens::geo {

struct LatLon {
    double lat = 0.0;
    double lon = 0.0;
};

// Great-circle distance on a sphere of radius 6371.0 km. Throws
// std::domain_error on out-of-range coordinates.
double haversine_km(LatLon a, LatLon b);

struct ZipRegion {
    std::string zip;
    // closed rings (first vertex repeated last); first ring is the outer one
    std::vector<std::vector<LatLon>> rings;
    LatLon centroid;
};

// Even-odd ray casting across all rings; boundary points count as inside.
bool point_in_zip(LatLon p, const ZipRegion& region);

struct SensorReading {
    UtcTime hour;
    double precip_in = 0.0;
};

struct SensorSite {
    std::string sensor_id;
    LatLon location;
    std::vector<SensorReading> readings; // strictly increasing in time
};

// Minimizes haversine distance from the region centroid; ties go to the
// lexicographically smallest sensor_id. Throws on an empty list.
const SensorSite& nearest_sensor(const ZipRegion& region, const std::vector<SensorSite>& sensors);

struct ImageryTile {
    std::string tile_id;
    double min_lat = 0.0, min_lon = 0.0, max_lat = 0.0, max_lon = 0.0;
    UtcTime acquired_at;
    std::optional<std::string> caption_doc_id;
    std::optional<std::string> embedding_id;

    LatLon center() const { return {(min_lat + max_lat) / 2.0, (min_lon + max_lon) / 2.0}; }
};

struct TileQueryResult {
    std::vector<ImageryTile> tiles; // ordered by (centroid distance, tile_id)
    bool fallback_used = false;     // radius search activated
    bool no_imagery = false;        // nothing found anywhere within radius
};

// In-polygon tiles within the window first (or the nearest acquisition pass
// when none fall inside the window); below min_tiles, a centroid radius
// search fills in, nearest first.
TileQueryResult tiles_for_query(const ZipRegion& region, TimeWindow window,
                                const std::vector<ImageryTile>& tiles, double radius_km = 5.0,
                                std::size_t min_tiles = 1);

// GeoJSON FeatureCollection with a "zip" property per feature; Polygon and
// MultiPolygon geometries (GeoJSON lon,lat vertex order).
std::vector<ZipRegion> load_zip_regions_geojson(const std::filesystem::path& path);

// CSV columns: sensor_id, lat, lon, hour, precip_in. Rows grouped per sensor,
// sorted by hour; duplicate hours or negative readings are dropped.
std::vector<SensorSite> load_sensors_csv(const std::filesystem::path& path);

// JSONL: tile_id, min_lat, min_lon, max_lat, max_lon, acquired_at,
// caption_doc_id?, embedding_id?
std::vector<ImageryTile> load_tiles_jsonl(const std::filesystem::path& path);

} // namespace floodlens::geo
