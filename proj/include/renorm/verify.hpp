#pragma once

#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

namespace renorm {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    /// Measured quantities; contains no timings, so reports are reproducible.
    nlohmann::json data = nlohmann::json::object();
};

void to_json(nlohmann::json& j, const CriterionResult& c);

struct VerifyReport {
    std::vector<CriterionResult> criteria;
    bool all_pass() const;
};

void to_json(nlohmann::json& j, const VerifyReport& r);

/// Called after each criterion with its wall time in seconds.
using CriterionObserver = std::function<void(const CriterionResult&, double seconds)>;

/// Runs criteria 1-10 with the given worker cap.
VerifyReport run_criteria(int threads, const CriterionObserver& observe = {});

/// Runs criteria 1-10 three times (twice with `threads` workers, once with a
/// different worker count) and appends criterion 11, which requires the three
/// serialised reports to be byte-identical. The returned report is the first run.
VerifyReport run_verify(int threads, const CriterionObserver& observe = {});

/// Human-readable summary line for one criterion.
std::string summary_line(const CriterionResult& c);

} // namespace renorm
