#ifndef BLQ_REPORT_HPP
#define BLQ_REPORT_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace blq {

/// Tabular report emitted as CSV and JSON side by side. Column names carry
/// their unit suffix. `info` holds deterministic run context (counting
/// convention, parameters) and is written to both files; `meta` holds
/// non-deterministic context (timestamp) and only appears in the JSON so
/// the CSV and the JSON minus `meta` are byte-reproducible for fixed
/// seeds.
struct Report {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    std::map<std::string, std::string> info;
    std::map<std::string, std::string> meta;

    void add_row(std::vector<std::string> cells);

    /// Writes <base>.csv and <base>.json (a trailing .csv/.json on `base`
    /// is stripped first). Both writes are atomic.
    void write(const std::filesystem::path& base) const;

    static std::string num(double v);
    static std::string num(std::int64_t v);
};

/// Current UTC time, ISO-8601; reports put it in `meta`.
std::string utc_timestamp();

} // namespace blq

#endif // BLQ_REPORT_HPP
