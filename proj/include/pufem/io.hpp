#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pufem/analysis.hpp"

namespace pufem {

/// Shortest round-trip representation so CSV output is reproducible.
inline std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

/// Minimal CSV table: header first, rows of preformatted cells.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    void add_row(std::vector<std::string> cells) {
        if (cells.size() != header_.size()) throw std::logic_error("CsvTable: row width does not match header");
        rows_.push_back(std::move(cells));
    }

    std::size_t rows() const noexcept { return rows_.size(); }

    void write(std::ostream& os) const {
        const auto line = [&os](const std::vector<std::string>& cells) {
            for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
            os << "\n";
        };
        line(header_);
        for (const auto& r : rows_) line(r);
    }

    void write(const std::filesystem::path& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + path.string());
        write(out);
    }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

/// Study rows without wall time, so repeated runs give identical files.
inline CsvTable study_table(const StudyResult& r) {
    CsvTable t({"label", "method", "frequency[Hz]", "kh[-]", "elements", "p_edge", "p_internal", "q", "dofs",
                "multipliers", "error[%]", "kappa[wavelengths/element]", "tau[dofs/wavelength]",
                "condition_estimate[-]", "residual[-]", "ill_conditioned", "singular"});
    for (const auto& row : r.rows)
        t.add_row({row.label, row.method, format_number(row.frequency_hz), format_number(row.kh),
                   std::to_string(row.elements), std::to_string(row.p), std::to_string(row.p_internal),
                   std::to_string(row.q), std::to_string(row.dofs), std::to_string(row.multipliers),
                   format_number(row.error_percent), format_number(row.kappa), format_number(row.tau),
                   format_number(row.condition), format_number(row.residual), row.ill_conditioned ? "1" : "0",
                   row.singular ? "1" : "0"});
    return t;
}

inline CsvTable timing_table(const StudyResult& r) {
    CsvTable t({"row", "label", "frequency[Hz]", "dofs", "wall_time[s]"});
    for (std::size_t i = 0; i < r.rows.size(); ++i)
        t.add_row({std::to_string(i), r.rows[i].label, format_number(r.rows[i].frequency_hz),
                   std::to_string(r.rows[i].dofs), format_number(r.rows[i].wall_seconds)});
    return t;
}

inline CsvTable frf_table(const FrfResult& r) {
    CsvTable t({"frequency[Hz]", "point", "x[m]", "y[m]", "re_w[m]", "im_w[m]", "abs_w[m]", "re_w_ref[m]",
                "im_w_ref[m]", "abs_w_ref[m]"});
    for (const auto& s : r.samples) {
        const Complex ref = s.reference.value_or(Complex(std::nan(""), std::nan("")));
        t.add_row({format_number(s.frequency_hz), std::to_string(s.point), format_number(s.x), format_number(s.y),
                   format_number(s.w.real()), format_number(s.w.imag()), format_number(std::abs(s.w)),
                   format_number(ref.real()), format_number(ref.imag()),
                   s.reference ? format_number(std::abs(ref)) : "nan"});
    }
    return t;
}

}  // namespace pufem
