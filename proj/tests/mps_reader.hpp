#pragma once
// Minimal MPS reader for round-trip tests of the writer. Understands the
// subset the writer emits: OBJSENSE MAX, E/L/G rows, INTORG/INTEND markers,
// RHS, empty RANGES, and UP/LO/MI/BV bounds.

#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "pomdpml/lp_model.hpp"

namespace testutil {

inline pomdpml::LpModel read_mps(const std::string& text) {
    using namespace pomdpml;
    std::istringstream in(text);
    std::string line;
    enum Section { None, Rows, Columns, Rhs, Ranges, Bounds } section = None;
    LpModel model;
    std::map<std::string, int> row_ids;
    std::map<std::string, int> col_ids;
    std::string obj_row;
    bool in_intorg = false;
    bool saw_objsense = false;

    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        if (line[0] != ' ') {
            std::string head;
            ls >> head;
            if (head == "NAME") continue;
            if (head == "OBJSENSE") { saw_objsense = true; section = None; continue; }
            if (head == "ROWS") { section = Rows; continue; }
            if (head == "COLUMNS") { section = Columns; continue; }
            if (head == "RHS") { section = Rhs; continue; }
            if (head == "RANGES") { section = Ranges; continue; }
            if (head == "BOUNDS") { section = Bounds; continue; }
            if (head == "ENDATA") break;
            continue;
        }
        std::vector<std::string> f;
        std::string tok;
        while (ls >> tok) f.push_back(tok);
        if (f.empty()) continue;
        if (saw_objsense && section == None && f[0] == "MAX") continue;
        switch (section) {
            case Rows: {
                if (f[0] == "N") { obj_row = f[1]; break; }
                RowSense sense = f[0] == "E" ? RowSense::Equal
                                : f[0] == "L" ? RowSense::LessEqual
                                              : RowSense::GreaterEqual;
                row_ids[f[1]] = model.n_rows();
                model.add_row(f[1], sense, 0.0);
                break;
            }
            case Columns: {
                if (f.size() >= 3 && f[1] == "'MARKER'") {
                    in_intorg = f.back() == "'INTORG'";
                    break;
                }
                const std::string& cname = f[0];
                if (!col_ids.count(cname)) {
                    col_ids[cname] = model.add_col(cname, 0.0, kInf, in_intorg);
                    if (in_intorg) model.cols[col_ids[cname]].upper = 1.0;
                }
                for (std::size_t i = 1; i + 1 < f.size() + 1 && i + 1 <= f.size(); i += 2) {
                    const std::string& rname = f[i];
                    const double v = std::stod(f[i + 1]);
                    if (rname == obj_row)
                        model.objective[col_ids[cname]] = v;
                    else
                        model.rows[row_ids.at(rname)].coeffs.push_back({col_ids[cname], v});
                }
                break;
            }
            case Rhs: {
                for (std::size_t i = 1; i + 1 <= f.size() - 1; i += 2)
                    model.rows[row_ids.at(f[i])].rhs = std::stod(f[i + 1]);
                break;
            }
            case Bounds: {
                const int j = col_ids.at(f[2]);
                if (f[0] == "UP") model.cols[j].upper = std::stod(f[3]);
                else if (f[0] == "LO") model.cols[j].lower = std::stod(f[3]);
                else if (f[0] == "MI") model.cols[j].lower = -kInf;
                else if (f[0] == "BV") { model.cols[j].lower = 0.0; model.cols[j].upper = 1.0; model.cols[j].integral = true; }
                break;
            }
            default: break;
        }
    }
    return model;
}

}  // namespace testutil
