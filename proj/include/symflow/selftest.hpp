#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace symflow::selftest {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string details;
};

struct Report {
    std::uint64_t seed = 0;
    std::vector<CriterionResult> criteria;
    bool all_pass = false;
};

// Full acceptance sweep. The last criterion regenerates the report of the
// others and byte-compares, so a run is self-checking for determinism.
Report run(std::uint64_t seed);

std::string to_text(const Report& report);
std::string to_json(const Report& report);

}  // namespace symflow::selftest
