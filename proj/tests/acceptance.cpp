// Runs the acceptance criteria and prints one PASS/FAIL line per criterion.

#include <cstdlib>
#include <iostream>

#include "renorm/verify.hpp"

int main() {
    int threads = 1;
    if (const char* env = std::getenv("RENORM_THREADS")) threads = std::max(1, std::atoi(env));
    const renorm::VerifyReport report = renorm::run_verify(threads, [](const renorm::CriterionResult& c, double secs) {
        std::cerr << "criterion " << c.id << " finished in " << secs << " s\n";
    });
    for (const auto& c : report.criteria) std::cout << renorm::summary_line(c) << '\n';
    if (!report.all_pass()) {
        for (const auto& c : report.criteria)
            if (!c.pass) std::cerr << "criterion " << c.id << " data: " << nlohmann::json(c.data).dump() << '\n';
        return 1;
    }
    return 0;
}
