#include "spinfer/report.hpp"

#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "spinfer/errors.hpp"

namespace spinfer {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void Table::add_row(std::vector<std::string> row) {
    if (row.size() != columns.size()) throw SpecError("table: row width mismatch");
    rows.push_back(std::move(row));
}

std::string render_csv(const Table& t) {
    std::ostringstream out;
    out << "# schema: " << kCsvSchema << "\n";
    for (std::size_t c = 0; c < t.columns.size(); ++c)
        out << (c ? "," : "") << t.columns[c];
    out << "\n";
    for (const auto& row : t.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << row[c];
        out << "\n";
    }
    return out.str();
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw SpecError("cannot open output file: " + path);
    f << content;
    if (!f.flush()) throw SpecError("failed writing output file: " + path);
}

Table effect_table(const std::vector<EffectRow>& rows, bool with_wall) {
    Table t;
    t.columns = {"method", "n",  "seed",  "replicates", "tau", "theta",
                 "gamma",  "de", "de_se", "ie",         "ie_se"};
    if (with_wall) t.columns.push_back("wall_ms");
    for (const auto& r : rows) {
        std::string theta;
        for (std::size_t d = 0; d < r.theta.size(); ++d) {
            if (d) theta += ';';
            theta += format_double(r.theta[d]);
        }
        std::vector<std::string> row = {
            r.method, std::to_string(r.n), std::to_string(r.seed),
            std::to_string(r.replicates), format_double(r.tau), theta,
            format_double(r.gamma), format_double(r.de), format_double(r.de_se),
            format_double(r.ie), format_double(r.ie_se)};
        if (with_wall) row.push_back(format_double(r.wall_ms));
        t.add_row(std::move(row));
    }
    return t;
}

std::string render_sidecar(const std::vector<EffectRow>& rows) {
    nlohmann::json j;
    j["schema"] = kCsvSchema;
    std::time_t now = std::time(nullptr);
    char stamp[32];
    std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    j["created_at"] = stamp;
    nlohmann::json walls = nlohmann::json::array();
    for (const auto& r : rows) walls.push_back({{"method", r.method}, {"wall_ms", r.wall_ms}});
    j["wall_ms"] = walls;
    return j.dump(2) + "\n";
}

}  // namespace spinfer
