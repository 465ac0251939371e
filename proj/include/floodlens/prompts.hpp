#pragma once

#include "floodlens/geo.hpp"
#include "floodlens/time_utils.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace floodlens::analyst {

enum class PromptMode { multimodal, text_only };

// Everything one analyst call gets to see headers for. All ids must exist in
// the backing stores; builders enforce the tweet cap.
struct EvidenceBundle {
    std::string zip;
    TimeWindow window;
    std::vector<std::pair<std::string, std::string>> tweets;    // (doc_id, text)
    std::vector<std::pair<std::string, std::string>> calls_311; // (doc_id, text)
    std::string sensor_id;
    std::vector<geo::SensorReading> sensor_rows;
    std::optional<std::string> fema_prior;
    std::string fema_ref; // kb ref id when a prior is present
    std::vector<std::pair<std::string, std::string>> captions; // (tile_id, caption)
    std::vector<std::string> tiles;

    bool has_id(std::string_view id) const;
    bool empty_evidence() const;
};

// Shipped template files, loaded once and served byte-identical. Assembly is
// a pure function of the bundle.
class PromptLibrary {
public:
    static PromptLibrary load(const std::filesystem::path& dir);

    const std::string& system_prompt(PromptMode mode) const;
    std::string user_prompt(const EvidenceBundle& bundle) const;
    // Same template plus the recession_observed request line the fusion
    // logic branches on.
    std::string visual_user_prompt(const EvidenceBundle& bundle) const;

    const std::string& query_parser_system() const { return query_parser_system_; }
    std::string query_parser_user(const std::string& message) const;

    std::uint64_t checksum(PromptMode mode) const; // fnv1a64 of the template bytes

private:
    std::string system_multimodal_;
    std::string system_text_only_;
    std::string user_template_;
    std::string query_parser_system_;
    std::string query_parser_user_;
};

std::string render_sensor_table(const std::string& sensor_id,
                                const std::vector<geo::SensorReading>& rows);

} // namespace floodlens::analyst
