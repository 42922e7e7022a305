#include "coopscatter/csv.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace coop::csv {

std::string format(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[32];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc{}) {
        throw std::runtime_error("csv::format: to_chars failed");
    }
    return std::string(buf, end);
}

Writer::Writer(std::ostream& out, std::vector<std::string> header)
    : out_(out), width_(header.size()) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) out_ << ',';
        out_ << header[i];
    }
    out_ << '\n';
}

void Writer::separator() {
    if (column_ >= width_) {
        throw std::logic_error("csv::Writer: row wider than header");
    }
    if (column_++) out_ << ',';
}

Writer& Writer::cell(double value) {
    separator();
    out_ << format(value);
    return *this;
}

Writer& Writer::cell(long long value) {
    separator();
    out_ << value;
    return *this;
}

Writer& Writer::cell(std::string_view text) {
    separator();
    out_ << text;
    return *this;
}

void Writer::end_row() {
    if (column_ != width_) {
        throw std::logic_error("csv::Writer: row narrower than header");
    }
    out_ << '\n';
    column_ = 0;
    ++rows_;
}

}  // namespace coop::csv
