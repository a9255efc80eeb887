#include "rewind/csv.hpp"

#include <cstdio>

namespace rewindlab::csv {

std::string format(double x) {
    char buf[40];
    const int n = std::snprintf(buf, sizeof buf, "%.17g", x);
    return std::string(buf, static_cast<std::size_t>(n));
}

void write_header(std::ostream& os, std::initializer_list<std::string_view> columns) {
    bool first = true;
    for (auto c : columns) {
        if (!first) os << ',';
        first = false;
        os << c;
    }
    os << '\n';
}

}  // namespace rewindlab::csv
