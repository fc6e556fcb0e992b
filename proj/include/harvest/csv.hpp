// Deterministic CSV output: comma separated, mandatory header, numbers in
// scientific notation with 9 significant digits and a '.' decimal point.
#pragma once

#include "harvest/errors.hpp"

#include <fmt/format.h>

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace harvest::csv {

/// Locale-independent "%.8e" rendering; negative zero prints as zero.
inline std::string format_number(double x) {
    if (x == 0.0)
        x = 0.0;
    return fmt::format("{:.8e}", x);
}

class Writer {
public:
    Writer(std::ostream &out, std::vector<std::string> header)
        : out_(out), columns_(header.size()) {
        detail::require(columns_ > 0, "csv header must not be empty");
        write_cells(header);
    }

    void row(const std::vector<double> &values) {
        std::vector<std::string> cells;
        cells.reserve(values.size());
        for (double v : values)
            cells.push_back(format_number(v));
        write_cells(cells);
    }

    /// Mixed text/number row; callers format numbers with format_number.
    void row(const std::vector<std::string> &cells) { write_cells(cells); }

private:
    void write_cells(const std::vector<std::string> &cells) {
        detail::require(cells.size() == columns_, "csv row width does not match header");
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i)
                out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }

    std::ostream &out_;
    std::size_t columns_;
};

} // namespace harvest::csv
