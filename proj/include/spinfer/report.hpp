#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace spinfer {

// bumped whenever column sets change; emitted as a comment line above the header
inline constexpr const char* kCsvSchema = "spinfer-csv-1";

// deterministic double formatting shared by every emitter ("%.12g")
std::string format_double(double v);

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> row);
};

// schema comment, header row, then data rows; '\n' endings, fields joined by
// commas (values must not contain commas or newlines)
std::string render_csv(const Table& t);

// renders fully in memory first so a failed run never leaves partial output
void write_text(const std::string& path, const std::string& content);

struct EffectRow {
    std::string method;
    int n = 0;
    std::uint64_t seed = 0;
    int replicates = 0;
    double tau = 0.0;
    std::vector<double> theta;
    double gamma = 0.0;
    double de = 0.0, de_se = 0.0;
    double ie = 0.0, ie_se = 0.0;
    double wall_ms = 0.0;  // sidecar only, keeps the CSV byte-deterministic
};

// with_wall appends a wall_ms column (bench output, exempt from determinism)
Table effect_table(const std::vector<EffectRow>& rows, bool with_wall = false);

// wall times and the creation timestamp live here, not in the CSV
std::string render_sidecar(const std::vector<EffectRow>& rows);

}  // namespace spinfer
