#pragma once

// Experiment reports: one row per measured case, serialized as CSV (stable bytes
// for a given config+seed; runtime metadata lives only in the JSON mirror).

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "errors.hpp"

namespace parapsi {

using json = nlohmann::json;

inline constexpr const char* kCsvHeader = "scenario,case,input_params,measured,theory,slope,stderr,verdict";

struct ReportRow {
    std::string case_id;
    std::string inputs;  // "key=value" pairs, space separated (keeps CSV quoting trivial)
    double measured = std::numeric_limits<double>::quiet_NaN();
    double theory = std::numeric_limits<double>::quiet_NaN();
    double slope = std::numeric_limits<double>::quiet_NaN();
    double stderr_slope = std::numeric_limits<double>::quiet_NaN();
    std::string verdict;  // pass | fail | info | excluded | refused
};

struct EstimateReport {
    std::string scenario;
    std::string grid_desc;
    std::uint64_t seed = 0;
    double runtime_sec = 0.0;  // JSON only, never in the CSV
    std::vector<ReportRow> rows;

    // "info"/"excluded" rows never gate; "refused" and "fail" do.
    bool all_pass() const {
        for (const auto& r : rows)
            if (r.verdict == "fail" || r.verdict == "refused") return false;
        return true;
    }

    ReportRow& add(ReportRow row) {
        rows.push_back(std::move(row));
        return rows.back();
    }
};

namespace detail {

inline std::string fmt_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

inline std::string csv_field(const std::string& s) {
    bool quote = s.find_first_of(",\"\n") != std::string::npos;
    if (!quote) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

}  // namespace detail

inline std::string to_csv(const EstimateReport& rep) {
    std::string out = kCsvHeader;
    out += '\n';
    for (const auto& r : rep.rows) {
        out += detail::csv_field(rep.scenario);
        out += ',';
        out += detail::csv_field(r.case_id);
        out += ',';
        out += detail::csv_field(r.inputs);
        out += ',';
        out += detail::fmt_double(r.measured);
        out += ',';
        out += detail::fmt_double(r.theory);
        out += ',';
        out += detail::fmt_double(r.slope);
        out += ',';
        out += detail::fmt_double(r.stderr_slope);
        out += ',';
        out += detail::csv_field(r.verdict);
        out += '\n';
    }
    return out;
}

inline json to_json(const EstimateReport& rep) {
    json rows = json::array();
    for (const auto& r : rep.rows) {
        rows.push_back({{"case", r.case_id},
                        {"input_params", r.inputs},
                        {"measured", r.measured},
                        {"theory", r.theory},
                        {"slope", r.slope},
                        {"stderr", r.stderr_slope},
                        {"verdict", r.verdict}});
    }
    return json{{"scenario", rep.scenario}, {"grid", rep.grid_desc},     {"seed", rep.seed},
                {"runtime_sec", rep.runtime_sec},  {"all_pass", rep.all_pass()}, {"rows", rows}};
}

inline void write_csv(const EstimateReport& rep, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw input_error("write_csv: cannot open " + path);
    out << to_csv(rep);
}

inline void write_json(const EstimateReport& rep, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw input_error("write_json: cannot open " + path);
    out << to_json(rep).dump(2) << '\n';
}

}  // namespace parapsi
