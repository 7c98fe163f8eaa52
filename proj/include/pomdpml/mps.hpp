#pragma once
// Fixed-format MPS writer with a deterministic 8-character name mangling
// and a JSON sidecar mapping mangled names back to the model's own.

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "pomdpml/lp_model.hpp"

namespace pomdpml {

struct MpsExport {
    std::string mps;
    std::string sidecar_json;
};

namespace detail {

inline std::string mps_name(char head, int index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%c%07d", head, index);
    return buf;
}

inline std::string mps_value(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

/// One data line with fields at the fixed MPS columns 2, 5, 15, 25, 40, 50.
inline std::string mps_line(const std::string& f1, const std::string& f2,
                            const std::string& f3 = "", const std::string& f4 = "",
                            const std::string& f5 = "", const std::string& f6 = "") {
    std::string line;
    auto put = [&line](std::size_t col, const std::string& s) {
        if (s.empty()) return;
        if (line.size() + 1 < col) line.append(col - 1 - line.size(), ' ');
        else if (!line.empty()) line.push_back(' ');
        line += s;
    };
    put(2, f1);
    put(5, f2);
    put(15, f3);
    put(25, f4);
    put(40, f5);
    put(50, f6);
    return line;
}

}  // namespace detail

/**
 * Renders the model as fixed-format MPS (ROWS/COLUMNS/RHS/RANGES/BOUNDS,
 * binary columns inside INTORG/INTEND markers, OBJSENSE MAX). Row i becomes
 * R%07d and column j C%07d; the sidecar JSON records the mapping.
 */
inline MpsExport export_mps(const LpModel& model, const std::string& problem_name = "POMDPML") {
    using detail::mps_line;
    using detail::mps_name;
    using detail::mps_value;

    std::string out;
    out += "NAME          " + problem_name + "\n";
    out += "OBJSENSE\n    MAX\n";
    out += "ROWS\n";
    out += mps_line("N", "OBJ") + "\n";
    for (int i = 0; i < model.n_rows(); ++i) {
        const char* sense = model.rows[i].sense == RowSense::Equal        ? "E"
                            : model.rows[i].sense == RowSense::LessEqual ? "L"
                                                                         : "G";
        out += mps_line(sense, mps_name('R', i)) + "\n";
    }

    // column-major view of the rows
    std::vector<std::vector<std::pair<int, double>>> by_col(model.n_cols());
    for (int i = 0; i < model.n_rows(); ++i)
        for (const auto& [col, v] : model.rows[i].coeffs)
            if (v != 0.0) by_col[col].push_back({i, v});

    out += "COLUMNS\n";
    bool in_intorg = false;
    int marker_count = 0;
    for (int j = 0; j < model.n_cols(); ++j) {
        if (model.cols[j].integral && !in_intorg) {
            out += mps_line("", "MARKER" + std::to_string(marker_count++), "'MARKER'", "",
                            "'INTORG'") +
                   "\n";
            in_intorg = true;
        } else if (!model.cols[j].integral && in_intorg) {
            out += mps_line("", "MARKER" + std::to_string(marker_count++), "'MARKER'", "",
                            "'INTEND'") +
                   "\n";
            in_intorg = false;
        }
        const std::string cname = mps_name('C', j);
        if (model.objective[j] != 0.0)
            out += mps_line("", cname, "OBJ", mps_value(model.objective[j])) + "\n";
        for (const auto& [row, v] : by_col[j])
            out += mps_line("", cname, mps_name('R', row), mps_value(v)) + "\n";
    }
    if (in_intorg)
        out += mps_line("", "MARKER" + std::to_string(marker_count++), "'MARKER'", "", "'INTEND'") +
               "\n";

    out += "RHS\n";
    for (int i = 0; i < model.n_rows(); ++i)
        if (model.rows[i].rhs != 0.0)
            out += mps_line("", "RHS", mps_name('R', i), mps_value(model.rows[i].rhs)) + "\n";

    out += "RANGES\n";
    out += "BOUNDS\n";
    for (int j = 0; j < model.n_cols(); ++j) {
        const auto& c = model.cols[j];
        const std::string cname = mps_name('C', j);
        if (c.integral) {
            out += mps_line("BV", "BND", cname) + "\n";
            continue;
        }
        if (!std::isfinite(c.lower))
            out += mps_line("MI", "BND", cname) + "\n";
        else if (c.lower != 0.0)
            out += mps_line("LO", "BND", cname, mps_value(c.lower)) + "\n";
        if (std::isfinite(c.upper)) out += mps_line("UP", "BND", cname, mps_value(c.upper)) + "\n";
    }
    out += "ENDATA\n";

    nlohmann::ordered_json side;
    side["format"] = "fixed-mps";
    side["objective_sense"] = "maximize";
    side["objective_row"] = "OBJ";
    nlohmann::ordered_json rows = nlohmann::ordered_json::object();
    for (int i = 0; i < model.n_rows(); ++i) rows[mps_name('R', i)] = model.rows[i].name;
    nlohmann::ordered_json cols = nlohmann::ordered_json::object();
    for (int j = 0; j < model.n_cols(); ++j) cols[mps_name('C', j)] = model.cols[j].name;
    side["rows"] = std::move(rows);
    side["columns"] = std::move(cols);

    MpsExport result;
    result.mps = std::move(out);
    result.sidecar_json = side.dump(2) + "\n";
    return result;
}

}  // namespace pomdpml
