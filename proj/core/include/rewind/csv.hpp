// CSV dialect shared by every writer: comma separated, '.' decimal point,
// 17 significant digits, header row, LF line endings.
#pragma once

#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>
#include <type_traits>

namespace rewindlab::csv {

/// "%.17g"; round-trips every finite double.
std::string format(double x);

void write_header(std::ostream& os, std::initializer_list<std::string_view> columns);

/// Writes one field per argument, comma separated, then '\n'.
template <typename... Fields>
void write_row(std::ostream& os, const Fields&... fields) {
    bool first = true;
    auto emit = [&](const auto& f) {
        if (!first) os << ',';
        first = false;
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_floating_point_v<T>) {
            os << format(static_cast<double>(f));
        } else {
            os << f;
        }
    };
    (emit(fields), ...);
    os << '\n';
}

}  // namespace rewindlab::csv
