#include "renorm/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "renorm/errors.hpp"

namespace renorm {

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0.0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", x);
    return buf;
}

namespace {

void write(std::ostringstream& os, const nlohmann::json& j, int indent, int depth) {
    const std::string pad = indent > 0 ? std::string(static_cast<std::size_t>(indent * (depth + 1)), ' ') : "";
    const std::string close = indent > 0 ? std::string(static_cast<std::size_t>(indent * depth), ' ') : "";
    const char* nl = indent > 0 ? "\n" : "";
    switch (j.type()) {
    case nlohmann::json::value_t::object: {
        if (j.empty()) {
            os << "{}";
            return;
        }
        os << '{' << nl;
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!first) os << ',' << nl;
            first = false;
            os << pad << nlohmann::json(it.key()).dump() << (indent > 0 ? ": " : ":");
            write(os, it.value(), indent, depth + 1);
        }
        os << nl << close << '}';
        return;
    }
    case nlohmann::json::value_t::array: {
        if (j.empty()) {
            os << "[]";
            return;
        }
        os << '[' << nl;
        bool first = true;
        for (const auto& v : j) {
            if (!first) os << ',' << nl;
            first = false;
            os << pad;
            write(os, v, indent, depth + 1);
        }
        os << nl << close << ']';
        return;
    }
    case nlohmann::json::value_t::number_float: {
        const double x = j.get<double>();
        os << (std::isfinite(x) ? format_number(x) : "null");
        return;
    }
    default:
        os << j.dump();
    }
}

} // namespace

std::string dump_json(const nlohmann::json& j, int indent) {
    std::ostringstream os;
    write(os, j, indent, 0);
    os << '\n';
    return os.str();
}

std::string dump_csv(const CsvTable& t) {
    std::ostringstream os;
    for (std::size_t i = 0; i < t.header.size(); ++i) os << (i ? "," : "") << t.header[i];
    os << '\n';
    const bool labelled = !t.labels.empty();
    if (labelled && t.labels.size() != t.rows.size()) throw DomainError("CSV label count does not match the rows");
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        if (row.size() + (labelled ? 1 : 0) != t.header.size())
            throw DomainError("CSV row width does not match the header");
        if (labelled) os << t.labels[r];
        for (std::size_t i = 0; i < row.size(); ++i) os << (i || labelled ? "," : "") << format_number(row[i]);
        os << '\n';
    }
    return os.str();
}

} // namespace renorm
