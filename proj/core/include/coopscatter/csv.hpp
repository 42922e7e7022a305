#pragma once

#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace coop::csv {

/// Shortest decimal string that round-trips to the same double. Non-finite
/// values are written as `nan`, `inf`, `-inf`.
std::string format(double value);

/// Minimal comma-separated writer: one header, then rows of equal width.
class Writer {
public:
    Writer(std::ostream& out, std::vector<std::string> header);

    Writer& cell(double value);
    Writer& cell(long long value);
    Writer& cell(std::string_view text);
    void end_row();

    std::size_t rows() const noexcept { return rows_; }

private:
    void separator();

    std::ostream& out_;
    std::size_t width_;
    std::size_t column_ = 0;
    std::size_t rows_ = 0;
};

}  // namespace coop::csv
