#pragma once

// Experiment reports: scalar metrics with their thresholds, a config echo,
// free-form notes and raw curves. Serialized as JSON and as an aligned table.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace fracinv {

enum class Comparison { less_equal, less, greater, greater_equal, info };

inline const char* to_string(Comparison c) {
    switch (c) {
    case Comparison::less_equal: return "<=";
    case Comparison::less: return "<";
    case Comparison::greater: return ">";
    case Comparison::greater_equal: return ">=";
    case Comparison::info: return "info";
    }
    return "?";
}

struct Metric {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    Comparison comparison = Comparison::info;
    bool passed = true;
};

/// Columns of numbers destined for a CSV side file.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

/// %.17g, the format used for every numeric payload.
inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class ExperimentReport {
public:
    explicit ExperimentReport(std::string scenario = {}) : scenario_(std::move(scenario)) {}

    const std::string& scenario() const noexcept { return scenario_; }
    const std::vector<std::pair<std::string, std::string>>& config() const noexcept { return config_; }
    const std::vector<Metric>& metrics() const noexcept { return metrics_; }
    const std::vector<std::string>& notes() const noexcept { return notes_; }
    const std::vector<std::pair<std::string, Table>>& tables() const noexcept { return tables_; }

    void echo(const std::string& key, const std::string& value) { config_.emplace_back(key, value); }
    void echo(const std::string& key, double value) { echo(key, format_double(value)); }
    void note(std::string text) { notes_.push_back(std::move(text)); }
    void add_table(std::string name, Table t) { tables_.emplace_back(std::move(name), std::move(t)); }

    const Metric& add_metric(const std::string& name, double value, Comparison cmp, double threshold = 0.0) {
        bool ok = true;
        switch (cmp) {
        case Comparison::less_equal: ok = value <= threshold; break;
        case Comparison::less: ok = value < threshold; break;
        case Comparison::greater: ok = value > threshold; break;
        case Comparison::greater_equal: ok = value >= threshold; break;
        case Comparison::info: ok = true; break;
        }
        if (std::isnan(value)) ok = cmp == Comparison::info;
        metrics_.push_back({name, value, threshold, cmp, ok});
        return metrics_.back();
    }

    const Metric& metric(const std::string& name) const {
        for (const auto& m : metrics_)
            if (m.name == name) return m;
        throw std::out_of_range("ExperimentReport: no metric named " + name);
    }

    bool passed() const {
        return std::all_of(metrics_.begin(), metrics_.end(), [](const Metric& m) { return m.passed; });
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["scenario"] = scenario_;
        j["passed"] = passed();
        auto& cfg = j["config"] = nlohmann::ordered_json::object();
        for (const auto& [k, v] : config_) cfg[k] = v;
        auto& ms = j["metrics"] = nlohmann::ordered_json::array();
        for (const auto& m : metrics_) {
            nlohmann::ordered_json e;
            e["name"] = m.name;
            e["value"] = m.value;
            e["comparison"] = to_string(m.comparison);
            if (m.comparison != Comparison::info) e["threshold"] = m.threshold;
            e["passed"] = m.passed;
            ms.push_back(std::move(e));
        }
        j["notes"] = notes_;
        return j;
    }

    std::string to_text() const {
        std::size_t w = 6;
        for (const auto& m : metrics_) w = std::max(w, m.name.size());
        std::ostringstream os;
        os << "scenario: " << scenario_ << "\n";
        for (const auto& [k, v] : config_) os << "  " << k << " = " << v << "\n";
        char line[256];
        std::snprintf(line, sizeof line, "  %-*s  %-13s  %-4s  %-13s  %s\n", int(w), "metric", "value", "cmp",
                      "threshold", "result");
        os << line;
        for (const auto& m : metrics_) {
            char thr[32] = "-";
            if (m.comparison != Comparison::info) std::snprintf(thr, sizeof thr, "%.6e", m.threshold);
            std::snprintf(line, sizeof line, "  %-*s  %-13.6e  %-4s  %-13s  %s\n", int(w), m.name.c_str(), m.value,
                          to_string(m.comparison), thr,
                          m.comparison == Comparison::info ? "-" : (m.passed ? "PASS" : "FAIL"));
            os << line;
        }
        for (const auto& n : notes_) os << "  note: " << n << "\n";
        os << "  overall: " << (passed() ? "PASS" : "FAIL") << "\n";
        return os.str();
    }

private:
    std::string scenario_;
    std::vector<std::pair<std::string, std::string>> config_;
    std::vector<Metric> metrics_;
    std::vector<std::string> notes_;
    std::vector<std::pair<std::string, Table>> tables_;
};

} // namespace fracinv
