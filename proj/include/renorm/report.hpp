#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace renorm {

/// Fixed 17-significant-digit scientific formatting, independent of locale.
/// Non-finite values become "nan", "inf" or "-inf".
std::string format_number(double x);

/// Serialises JSON with every floating-point number in format_number form
/// (non-finite numbers become null). Object keys keep nlohmann's sorted order,
/// so equal documents give equal bytes.
std::string dump_json(const nlohmann::json& j, int indent = 2);

/// One CSV table: header plus rows of numbers, optionally preceded by a text
/// label column (used when `labels` is non-empty).
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::string> labels;
    std::vector<std::vector<double>> rows;
};

std::string dump_csv(const CsvTable& t);

} // namespace renorm
