#pragma once

#include <cstdint>
#include <string>

namespace elspot {

// Naive civil timestamps (no time zone), seconds since 1970-01-01 00:00:00.
// Accepts "YYYY-MM-DDTHH:MM:SS" and "YYYY-MM-DD HH:MM:SS" (seconds optional).
std::int64_t parse_timestamp(const std::string& s);
std::string format_timestamp(std::int64_t t);

// Minutes past midnight, used for same-clock-time alignment.
int minutes_of_day(std::int64_t t);

}  // namespace elspot
