#include "mcausal/csv.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "mcausal/errors.hpp"

namespace mcausal {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream stream(line);
    while (std::getline(stream, field, ',')) fields.push_back(trim(field));
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

std::vector<std::vector<std::string>> read_rows(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw IngestError("cannot open " + path);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(file, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        rows.push_back(split_row(line));
    }
    if (rows.size() < 2) throw IngestError(path + ": need a header and at least one data row");
    return rows;
}

std::optional<double> parse_double(const std::string& s) {
    if (s.empty()) return std::nullopt;
    char* end = nullptr;
    const double value = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size()) return std::nullopt;
    return value;
}

bool iequals(const std::string& a, const char* b) {
    std::string lowered(a);
    std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return lowered == b;
}

}  // namespace

LandmarkTable read_landmarks_csv(const std::string& path) {
    const auto rows = read_rows(path);
    const auto& header = rows.front();
    const bool has_id = !header.empty() && iequals(header.front(), "id");
    const std::size_t value_cols = header.size() - (has_id ? 1 : 0);
    if (value_cols < 6 || value_cols % 2 != 0)
        throw IngestError(path + ": expected an even number (>= 6) of landmark columns, got " +
                          std::to_string(value_cols));

    LandmarkTable table;
    table.landmarks = static_cast<int>(value_cols / 2);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != header.size())
            throw IngestError(path + ": row " + std::to_string(r + 1) + " has " +
                              std::to_string(row.size()) + " fields, expected " +
                              std::to_string(header.size()));
        table.ids.push_back(has_id ? row.front() : std::to_string(r));
        Eigen::Matrix<double, Eigen::Dynamic, 2> shape(table.landmarks, 2);
        for (int j = 0; j < table.landmarks; ++j) {
            for (int axis = 0; axis < 2; ++axis) {
                const std::string& cell = row[(has_id ? 1 : 0) + 2 * j + axis];
                const auto value = parse_double(cell);
                if (!value)
                    throw IngestError(path + ": row " + std::to_string(r + 1) +
                                      ": non-numeric landmark value '" + cell + "'");
                shape(j, axis) = *value;
            }
        }
        table.shapes.push_back(std::move(shape));
    }
    return table;
}

UnitTable read_units_csv(const std::string& path) {
    const auto rows = read_rows(path);
    const auto& header = rows.front();
    if (header.size() < 2 || !iequals(header[0], "id") || !iequals(header[1], "z"))
        throw IngestError(path + ": header must start with 'id,z'");
    const std::size_t n_cov = header.size() - 2;
    const std::size_t n = rows.size() - 1;

    UnitTable table;
    table.ids.reserve(n);
    table.z.reserve(n);

    std::vector<std::vector<std::string>> raw(n_cov, std::vector<std::string>(n));
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != header.size())
            throw IngestError(path + ": row " + std::to_string(r + 1) + " has " +
                              std::to_string(row.size()) + " fields, expected " +
                              std::to_string(header.size()));
        table.ids.push_back(row[0]);
        if (row[1] != "0" && row[1] != "1")
            throw IngestError(path + ": row " + std::to_string(r + 1) +
                              ": z must be 0 or 1, got '" + row[1] + "'");
        table.z.push_back(row[1] == "1" ? 1 : 0);
        for (std::size_t j = 0; j < n_cov; ++j) raw[j][r - 1] = row[2 + j];
    }

    // Numeric columns pass through; anything else is one-hot encoded with the
    // lexicographically first level dropped.
    std::vector<Vec> columns;
    for (std::size_t j = 0; j < n_cov; ++j) {
        bool numeric = true;
        Vec column(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) {
            const auto value = parse_double(raw[j][i]);
            if (!value) {
                numeric = false;
                break;
            }
            column[static_cast<Eigen::Index>(i)] = *value;
        }
        if (numeric) {
            columns.push_back(std::move(column));
            table.covariate_names.push_back(header[2 + j]);
            continue;
        }
        std::set<std::string> levels(raw[j].begin(), raw[j].end());
        bool first = true;
        for (const auto& level : levels) {
            if (first) {  // reference level
                first = false;
                continue;
            }
            Vec indicator(static_cast<Eigen::Index>(n));
            for (std::size_t i = 0; i < n; ++i)
                indicator[static_cast<Eigen::Index>(i)] = raw[j][i] == level ? 1.0 : 0.0;
            columns.push_back(std::move(indicator));
            table.covariate_names.push_back(header[2 + j] + "=" + level);
        }
    }

    table.covariates.resize(static_cast<Eigen::Index>(n),
                            static_cast<Eigen::Index>(columns.size()));
    for (std::size_t j = 0; j < columns.size(); ++j)
        table.covariates.col(static_cast<Eigen::Index>(j)) = columns[j];
    return table;
}

std::vector<Unit> assemble_units(const UnitTable& units, const LandmarkTable& outcomes) {
    std::map<std::string, std::size_t> outcome_index;
    for (std::size_t i = 0; i < outcomes.ids.size(); ++i)
        outcome_index.emplace(outcomes.ids[i], i);

    std::vector<std::string> missing;
    for (const auto& id : units.ids)
        if (!outcome_index.count(id)) missing.push_back(id);
    std::set<std::string> unit_ids(units.ids.begin(), units.ids.end());
    std::vector<std::string> orphaned;
    for (const auto& id : outcomes.ids)
        if (!unit_ids.count(id)) orphaned.push_back(id);
    if (!missing.empty() || !orphaned.empty()) {
        std::ostringstream msg;
        msg << "unit/outcome id mismatch;";
        if (!missing.empty()) {
            msg << " units without outcomes:";
            for (const auto& id : missing) msg << " " << id;
            msg << ";";
        }
        if (!orphaned.empty()) {
            msg << " outcomes without units:";
            for (const auto& id : orphaned) msg << " " << id;
        }
        throw IngestError(msg.str());
    }

    std::vector<Unit> assembled;
    assembled.reserve(units.ids.size());
    for (std::size_t i = 0; i < units.ids.size(); ++i) {
        Unit unit;
        unit.id = units.ids[i];
        unit.z = units.z[i];
        unit.covariates = units.covariates.row(static_cast<Eigen::Index>(i)).transpose();
        unit.outcome = kendall_preshape(outcomes.shapes[outcome_index.at(unit.id)]);
        assembled.push_back(std::move(unit));
    }
    return assembled;
}

}  // namespace mcausal
