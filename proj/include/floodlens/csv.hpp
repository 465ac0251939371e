#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace floodlens {

// Minimal RFC 4180 reader: quoted fields, embedded commas/quotes/newlines,
// CRLF line endings. Good enough for the sensor/ground-truth/corpus CSVs.
std::vector<std::vector<std::string>> parse_csv(std::string_view data);

std::string csv_escape(std::string_view field);

} // namespace floodlens
