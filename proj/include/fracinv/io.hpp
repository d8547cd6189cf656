#pragma once

// CSV side files and run manifests.
// Numbers are written with %.17g so doubles round-trip exactly; comment lines
// start with '#'. Manifests carry no timestamps, so reruns are byte-identical.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fracinv/core.hpp"
#include "fracinv/errors.hpp"
#include "fracinv/report.hpp"

namespace fracinv {

using CsvHeader = std::vector<std::pair<std::string, std::string>>;

/// '#' lines echoing the problem setup: alpha, ell, T, N, M, right_bc.
inline CsvHeader problem_header(const ProblemConfig& c, int nx, int nt) {
    return {{"alpha", format_double(c.alpha)},
            {"ell", format_double(c.ell)},
            {"T", format_double(c.horizon)},
            {"N", std::to_string(nx)},
            {"M", std::to_string(nt)},
            {"right_bc", to_string(c.right_bc.kind)}};
}

inline std::string csv_text(const CsvHeader& header, const Table& table) {
    std::ostringstream os;
    for (const auto& [k, v] : header) os << "# " << k << " = " << v << "\n";
    for (std::size_t c = 0; c < table.columns.size(); ++c) os << (c ? "," : "") << table.columns[c];
    os << "\n";
    for (const auto& row : table.rows) {
        if (row.size() != table.columns.size())
            throw InvalidArgument("csv: row has " + std::to_string(row.size()) + " entries, expected " +
                                  std::to_string(table.columns.size()));
        for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << format_double(row[c]);
        os << "\n";
    }
    return os.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InvalidArgument("cannot write '" + path.string() + "'");
    f << text;
}

inline void write_csv(const std::filesystem::path& path, const CsvHeader& header, const Table& table) {
    write_text(path, csv_text(header, table));
}

/// Numeric rows of a CSV file; '#' lines and a non-numeric first line are skipped.
inline Table read_csv(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw InvalidArgument("cannot open CSV file '" + path.string() + "'");
    Table t;
    std::string line;
    int lineno = 0;
    bool first = true;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        std::vector<double> row;
        bool numeric = true;
        for (const auto& c : cells) {
            // strtod rather than stod: subnormals must round-trip too
            char* end = nullptr;
            const double v = std::strtod(c.c_str(), &end);
            if (end == c.c_str() || c.find_first_not_of(" \t\r", std::size_t(end - c.c_str())) != std::string::npos)
                numeric = false;
            row.push_back(v);
        }
        if (!numeric) {
            if (first) {
                t.columns = cells;
                first = false;
                continue;
            }
            throw InvalidArgument(path.string() + ": line " + std::to_string(lineno) + " is not numeric");
        }
        first = false;
        if (!t.rows.empty() && row.size() != t.rows.front().size())
            throw InvalidArgument(path.string() + ": line " + std::to_string(lineno) + " has a different column count");
        t.rows.push_back(std::move(row));
    }
    return t;
}

/// Piecewise-linear function through (x, value) pairs from the first two CSV columns,
/// constant beyond the ends.
inline ScalarFunction csv_profile(const std::filesystem::path& path) {
    const auto t = read_csv(path);
    if (t.rows.size() < 2 || t.rows.front().size() < 2)
        throw InvalidArgument(path.string() + ": need at least two rows with columns x,value");
    std::vector<double> xs, vs;
    for (const auto& r : t.rows) {
        if (!xs.empty() && !(r[0] > xs.back())) throw InvalidArgument(path.string() + ": x must be increasing");
        xs.push_back(r[0]);
        vs.push_back(r[1]);
    }
    return [xs, vs](double x) {
        if (x <= xs.front()) return vs.front();
        if (x >= xs.back()) return vs.back();
        const auto k = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), x) - xs.begin()) - 1;
        const double s = (x - xs[k]) / (xs[k + 1] - xs[k]);
        return (1.0 - s) * vs[k] + s * vs[k + 1];
    };
}

struct RunManifest {
    std::string subcommand;
    std::string config_path;
    std::string output_dir;
    std::uint64_t seed = 0;
    std::string version;
    std::string config_hash;
    std::vector<std::string> outputs;  ///< file names relative to output_dir

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["subcommand"] = subcommand;
        j["config"] = config_path;
        j["output_dir"] = output_dir;
        j["seed"] = seed;
        j["version"] = version;
        j["config_hash"] = config_hash;
        j["outputs"] = outputs;
        return j;
    }
};

/// Writes files into one directory and remembers each name for the manifest.
class OutputSink {
public:
    explicit OutputSink(std::filesystem::path dir) : dir_(std::move(dir)) {
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec) throw InvalidArgument("cannot create output directory '" + dir_.string() + "': " + ec.message());
    }

    const std::filesystem::path& dir() const noexcept { return dir_; }
    const std::vector<std::string>& written() const noexcept { return written_; }

    void csv(const std::string& name, const CsvHeader& header, const Table& table) {
        write_csv(dir_ / name, header, table);
        written_.push_back(name);
    }
    void json(const std::string& name, const nlohmann::ordered_json& j) {
        write_text(dir_ / name, j.dump(2) + "\n");
        written_.push_back(name);
    }
    void text(const std::string& name, const std::string& body) {
        write_text(dir_ / name, body);
        written_.push_back(name);
    }
    void manifest(RunManifest m) {
        m.output_dir = dir_.string();
        m.outputs = written_;
        write_text(dir_ / "manifest.json", m.to_json().dump(2) + "\n");
    }

private:
    std::filesystem::path dir_;
    std::vector<std::string> written_;
};

} // namespace fracinv
