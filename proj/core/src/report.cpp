#include "blq/report.hpp"

#include <cstdio>
#include <ctime>
#include <stdexcept>

#include <json.hpp>

#include "blq/dataset.hpp"

namespace blq {

void Report::add_row(std::vector<std::string> cells) {
    if (cells.size() != columns.size()) {
        throw std::invalid_argument("report row width does not match columns");
    }
    rows.push_back(std::move(cells));
}

std::string Report::num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

std::string Report::num(std::int64_t v) {
    return std::to_string(v);
}

namespace {

std::filesystem::path strip_report_ext(std::filesystem::path base) {
    std::string ext = base.extension().string();
    if (ext == ".csv" || ext == ".json") {
        base.replace_extension();
    }
    return base;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    atomic_write_file(path, std::span<const std::uint8_t>(
                                reinterpret_cast<const std::uint8_t*>(text.data()),
                                text.size()));
}

} // namespace

void Report::write(const std::filesystem::path& base) const {
    std::filesystem::path stem = strip_report_ext(base);

    std::string csv;
    for (const auto& [k, v] : info) {
        csv += "# " + k + ": " + v + "\n";
    }
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (columns[i].find(',') != std::string::npos) {
            throw std::invalid_argument("report column name contains a comma");
        }
        csv += columns[i];
        csv += i + 1 == columns.size() ? '\n' : ',';
    }
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (row[i].find(',') != std::string::npos) {
                throw std::invalid_argument("report cell contains a comma");
            }
            csv += row[i];
            csv += i + 1 == row.size() ? '\n' : ',';
        }
    }
    write_text(std::filesystem::path(stem).concat(".csv"), csv);

    nlohmann::json j;
    j["columns"] = columns;
    j["rows"] = rows;
    j["info"] = info;
    j["meta"] = meta;
    write_text(std::filesystem::path(stem).concat(".json"), j.dump(2) + "\n");
}

std::string utc_timestamp() {
    std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

} // namespace blq
