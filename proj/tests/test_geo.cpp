#include "floodlens/geo.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace floodlens;
using namespace floodlens::geo;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Second-source great-circle formula (Vincenty's special case for the
// sphere), numerically independent of the half-angle form under test.
double vincenty_sphere_km(LatLon a, LatLon b) {
    const double p1 = a.lat * kPi / 180.0, p2 = b.lat * kPi / 180.0;
    const double dl = (b.lon - a.lon) * kPi / 180.0;
    const double num = std::sqrt(std::pow(std::cos(p2) * std::sin(dl), 2) +
                                 std::pow(std::cos(p1) * std::sin(p2) -
                                              std::sin(p1) * std::cos(p2) * std::cos(dl),
                                          2));
    const double den = std::sin(p1) * std::sin(p2) + std::cos(p1) * std::cos(p2) * std::cos(dl);
    return 6371.0 * std::atan2(num, den);
}

// Winding-number point-in-polygon oracle.
bool winding_inside(LatLon p, const std::vector<LatLon>& ring) {
    auto is_left = [](LatLon a, LatLon b, LatLon pt) {
        return (b.lon - a.lon) * (pt.lat - a.lat) - (pt.lon - a.lon) * (b.lat - a.lat);
    };
    int wn = 0;
    for (size_t i = 0; i + 1 < ring.size(); ++i) {
        if (ring[i].lat <= p.lat) {
            if (ring[i + 1].lat > p.lat && is_left(ring[i], ring[i + 1], p) > 0) ++wn;
        } else {
            if (ring[i + 1].lat <= p.lat && is_left(ring[i], ring[i + 1], p) < 0) --wn;
        }
    }
    return wn != 0;
}

// Concave (L-shaped) fixture polygon, closed.
ZipRegion concave_region() {
    ZipRegion r;
    r.zip = "77000";
    r.rings = {{{0.0, 0.0},
                {0.0, 4.0},
                {2.0, 4.0},
                {2.0, 2.0},
                {4.0, 2.0},
                {4.0, 0.0},
                {0.0, 0.0}}};
    r.centroid = {1.5, 1.5};
    return r;
}

ImageryTile tile_at(std::string id, double lat, double lon, const char* ts,
                    double half_size = 0.01) {
    ImageryTile t;
    t.tile_id = std::move(id);
    t.min_lat = lat - half_size;
    t.max_lat = lat + half_size;
    t.min_lon = lon - half_size;
    t.max_lon = lon + half_size;
    t.acquired_at = *parse_iso8601(ts);
    return t;
}

} // namespace

TEST_CASE("haversine basics") {
    LatLon houston{29.7604, -95.3698};
    CHECK(haversine_km(houston, houston) == doctest::Approx(0.0));

    LatLon north{45.0, 10.0}, south{-45.0, -170.0}; // antipodal pair
    CHECK(haversine_km(north, south) == doctest::Approx(kPi * 6371.0).epsilon(1e-9));

    LatLon east{29.7604, -94.3698};
    const double expected = vincenty_sphere_km(houston, east);
    CHECK(haversine_km(houston, east) ==
          doctest::Approx(expected).epsilon(1e-6)); // relative tolerance

    CHECK_THROWS_AS(haversine_km({91.0, 0.0}, houston), std::domain_error);
    CHECK_THROWS_AS(haversine_km(houston, {0.0, 181.0}), std::domain_error);
}

TEST_CASE("haversine symmetry and triangle inequality on random triples") {
    std::mt19937_64 rng(64);
    std::uniform_real_distribution<double> lat(-89.0, 89.0), lon(-180.0, 180.0);
    for (int i = 0; i < 1000; ++i) {
        LatLon a{lat(rng), lon(rng)}, b{lat(rng), lon(rng)}, c{lat(rng), lon(rng)};
        CHECK(std::fabs(haversine_km(a, b) - haversine_km(b, a)) <= 1e-9);
        CHECK(haversine_km(a, c) <= haversine_km(a, b) + haversine_km(b, c) + 1e-9);
    }
}

TEST_CASE("point_in_zip agrees with the winding-number oracle") {
    auto region = concave_region();
    CHECK(point_in_zip({0.5, 0.5}, region));
    CHECK_FALSE(point_in_zip({3.0, 3.0}, region)); // inside bbox, outside the L
    CHECK_FALSE(point_in_zip({9.0, 9.0}, region)); // outside bbox

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> coord(-0.5, 4.5);
    int checked = 0;
    for (int i = 0; i < 400 && checked < 200; ++i) {
        LatLon p{coord(rng), coord(rng)};
        // skip points hugging an edge; the oracle and the boundary rule may
        // legitimately differ there
        bool near_edge = false;
        for (double edge : {0.0, 2.0, 4.0})
            if (std::fabs(p.lat - edge) < 1e-6 || std::fabs(p.lon - edge) < 1e-6)
                near_edge = true;
        if (near_edge) continue;
        ++checked;
        CHECK(point_in_zip(p, region) == winding_inside(p, region.rings[0]));
    }
    CHECK(checked >= 200);
}

TEST_CASE("point_in_zip counts boundary as inside") {
    auto region = concave_region();
    CHECK(point_in_zip({0.0, 1.0}, region));  // on an edge
    CHECK(point_in_zip({0.0, 0.0}, region));  // on a vertex
    CHECK(point_in_zip({2.0, 3.0}, region));  // on the notch edge
}

TEST_CASE("nearest_sensor picks the minimal centroid distance") {
    ZipRegion region = concave_region();
    std::vector<SensorSite> sensors;
    SensorSite one{"s1", {1.5, 1.5}, {}};
    sensors.push_back(one);
    CHECK(nearest_sensor(region, sensors).sensor_id == "s1");

    sensors.push_back({"s0", {1.5, 1.5}, {}}); // co-located: id tie-break
    CHECK(nearest_sensor(region, sensors).sensor_id == "s0");

    CHECK_THROWS_AS(nearest_sensor(region, {}), std::invalid_argument);
}

TEST_CASE("nearest_sensor matches an exhaustive scan over fixtures") {
    std::mt19937_64 rng(123);
    std::uniform_real_distribution<double> lat(29.0, 30.5), lon(-96.0, -94.5);
    std::vector<SensorSite> sensors;
    for (int i = 0; i < 15; ++i) {
        char id[8];
        std::snprintf(id, sizeof id, "g%02d", i);
        sensors.push_back({id, {lat(rng), lon(rng)}, {}});
    }
    for (int z = 0; z < 10; ++z) {
        ZipRegion region;
        region.zip = "77" + std::to_string(100 + z);
        region.centroid = {lat(rng), lon(rng)};
        region.rings = {{{region.centroid.lat - 0.01, region.centroid.lon - 0.01},
                         {region.centroid.lat - 0.01, region.centroid.lon + 0.01},
                         {region.centroid.lat + 0.01, region.centroid.lon + 0.01},
                         {region.centroid.lat - 0.01, region.centroid.lon - 0.01}}};
        const auto& picked = nearest_sensor(region, sensors);
        // brute-force re-scan
        const SensorSite* best = nullptr;
        double best_d = 1e18;
        for (const auto& s : sensors) {
            const double d = haversine_km(region.centroid, s.location);
            if (d < best_d || (d == best_d && best && s.sensor_id < best->sensor_id)) {
                best = &s;
                best_d = d;
            }
        }
        CHECK(picked.sensor_id == best->sensor_id);
        CHECK(haversine_km(region.centroid, picked.location) == doctest::Approx(best_d));
    }
}

TEST_CASE("tiles_for_query prefers in-polygon in-window tiles") {
    auto region = concave_region();
    std::vector<ImageryTile> tiles = {
        tile_at("in_poly", 1.0, 1.0, "2017-08-28T00:00:00Z"),
        tile_at("far_away", 60.0, 60.0, "2017-08-28T00:00:00Z"),
    };
    TimeWindow window{*parse_iso8601("2017-08-25"), *parse_iso8601("2017-09-01")};
    auto r = tiles_for_query(region, window, tiles, 5.0, 1);
    REQUIRE(r.tiles.size() == 1);
    CHECK(r.tiles[0].tile_id == "in_poly");
    CHECK_FALSE(r.fallback_used);
    CHECK_FALSE(r.no_imagery);
}

TEST_CASE("tiles_for_query radius fallback, nearest first") {
    ZipRegion region;
    region.zip = "77001";
    region.rings = {{{29.70, -95.40}, {29.70, -95.38}, {29.72, -95.38}, {29.72, -95.40},
                     {29.70, -95.40}}};
    region.centroid = {29.71, -95.39};
    std::vector<ImageryTile> tiles = {
        tile_at("near2", 29.74, -95.39, "2017-08-31T00:00:00Z", 0.001), // ~3.3 km
        tile_at("near1", 29.73, -95.39, "2017-08-31T00:00:00Z", 0.001), // ~2.2 km
        tile_at("near3", 29.75, -95.39, "2017-08-31T00:00:00Z", 0.001), // ~4.5 km
        tile_at("far", 30.2, -95.39, "2017-08-31T00:00:00Z", 0.001),    // way past 5 km
    };
    TimeWindow window{*parse_iso8601("2017-08-25"), *parse_iso8601("2017-09-01")};
    auto r = tiles_for_query(region, window, tiles, 5.0, 1);
    CHECK(r.fallback_used);
    REQUIRE(r.tiles.size() == 3);
    CHECK(r.tiles[0].tile_id == "near1");
    CHECK(r.tiles[1].tile_id == "near2");
    CHECK(r.tiles[2].tile_id == "near3");
    // distance-sort oracle
    double prev = -1.0;
    for (const auto& t : r.tiles) {
        const double d = haversine_km(region.centroid, t.center());
        CHECK(d >= prev);
        prev = d;
    }
}

TEST_CASE("tiles_for_query empty result is flagged") {
    auto region = concave_region();
    std::vector<ImageryTile> tiles = {tile_at("far", 60.0, 60.0, "2017-08-31T00:00:00Z")};
    TimeWindow window{*parse_iso8601("2017-08-25"), *parse_iso8601("2017-09-01")};
    auto r = tiles_for_query(region, window, tiles, 5.0, 1);
    CHECK(r.tiles.empty());
    CHECK(r.no_imagery);
    CHECK(r.fallback_used);
}

TEST_CASE("tiles_for_query falls back to the nearest acquisition pass") {
    auto region = concave_region();
    std::vector<ImageryTile> tiles = {
        tile_at("sep10", 1.0, 1.0, "2017-09-10T12:00:00Z"),
        tile_at("sep03a", 1.2, 1.2, "2017-09-03T10:00:00Z"),
        tile_at("sep03b", 0.8, 0.8, "2017-09-03T15:00:00Z"),
    };
    TimeWindow window{*parse_iso8601("2017-08-25"), *parse_iso8601("2017-09-01")};
    auto r = tiles_for_query(region, window, tiles, 5.0, 1);
    REQUIRE(r.tiles.size() == 2); // both tiles from the Sep 3 pass
    CHECK(r.tiles[0].tile_id == "sep03b");
    CHECK(r.tiles[1].tile_id == "sep03a");
    CHECK_FALSE(r.fallback_used);
}

TEST_CASE("fallback never activates when in-polygon supply meets min_tiles") {
    auto region = concave_region();
    std::vector<ImageryTile> tiles = {
        tile_at("a", 1.0, 1.0, "2017-08-28T00:00:00Z"),
        tile_at("b", 0.5, 0.5, "2017-08-29T00:00:00Z"),
        tile_at("outside_near", 3.0, 2.2, "2017-08-28T00:00:00Z"),
    };
    TimeWindow window{*parse_iso8601("2017-08-25"), *parse_iso8601("2017-09-01")};
    auto r = tiles_for_query(region, window, tiles, 500.0, 2);
    CHECK_FALSE(r.fallback_used);
    CHECK(r.tiles.size() == 2);
    for (const auto& t : r.tiles) CHECK(t.tile_id != "outside_near");
}

TEST_CASE("geojson, sensor csv and tile jsonl loaders") {
    testsup::TempDir tmp;
    testsup::write_file(tmp.path / "zips.geojson", R"({
      "type": "FeatureCollection",
      "features": [
        {"type": "Feature", "properties": {"zip": "77067"},
         "geometry": {"type": "Polygon", "coordinates":
           [[[-95.46, 29.93], [-95.42, 29.93], [-95.42, 29.97], [-95.46, 29.97], [-95.46, 29.93]]]}}
      ]})");
    auto regions = load_zip_regions_geojson(tmp.path / "zips.geojson");
    REQUIRE(regions.size() == 1);
    CHECK(regions[0].zip == "77067");
    CHECK(regions[0].rings[0].size() == 5);
    CHECK(regions[0].centroid.lat == doctest::Approx(29.95));
    CHECK(regions[0].centroid.lon == doctest::Approx(-95.44));
    CHECK(point_in_zip(regions[0].centroid, regions[0]));

    testsup::write_file(tmp.path / "sensors.csv",
                        "sensor_id,lat,lon,hour,precip_in\n"
                        "hcfcd_520,29.95,-95.44,2017-08-27T13:00:00Z,1.2\n"
                        "hcfcd_520,29.95,-95.44,2017-08-27T12:00:00Z,0.8\n"
                        "hcfcd_520,29.95,-95.44,2017-08-27T12:00:00Z,0.9\n"
                        "hcfcd_777,29.40,-95.10,2017-08-27T12:00:00Z,-1.0\n");
    auto sensors = load_sensors_csv(tmp.path / "sensors.csv");
    REQUIRE(sensors.size() == 1); // negative-only sensor dropped entirely
    CHECK(sensors[0].sensor_id == "hcfcd_520");
    REQUIRE(sensors[0].readings.size() == 2); // duplicate hour deduped
    CHECK(sensors[0].readings[0].precip_in == doctest::Approx(0.8));
    CHECK(sensors[0].readings[0].hour < sensors[0].readings[1].hour);

    testsup::write_file(tmp.path / "tiles.jsonl",
                        R"({"tile_id":"T1","min_lat":29.9,"min_lon":-95.5,"max_lat":30.0,)"
                        R"("max_lon":-95.4,"acquired_at":"2017-08-31T00:00:00Z","caption_doc_id":"cap1"})"
                        "\n");
    auto tiles = load_tiles_jsonl(tmp.path / "tiles.jsonl");
    REQUIRE(tiles.size() == 1);
    CHECK(tiles[0].caption_doc_id == "cap1");
    CHECK(tiles[0].center().lat == doctest::Approx(29.95));

    testsup::write_file(tmp.path / "bad_tiles.jsonl",
                        R"({"tile_id":"T2","min_lat":30.0,"min_lon":-95.5,"max_lat":29.9,)"
                        R"("max_lon":-95.4,"acquired_at":"2017-08-31T00:00:00Z"})"
                        "\n");
    CHECK_THROWS_AS(load_tiles_jsonl(tmp.path / "bad_tiles.jsonl"), std::runtime_error);
}
