#include "aggen/profile.hpp"

#include <cstdio>

namespace aggen {

std::string emit_profile_report(const PhaseProfile& p) {
    const struct {
        const char* label;
        double value;
    } lines[] = {
        {"phase 1 total", p.phase1_total},
        {"phase 2 total", p.phase2_total},
        {"phase 3 total", p.phase3_total},
        {"- comm prep", p.comm_prep},
        {"- transport send/recv", p.send_recv},
        {"- merging states", p.merging_states},
        {"- merging edges", p.merging_edges},
        {"total time", p.total_time},
    };

    std::string out;
    char buf[96];
    for (const auto& line : lines) {
        std::snprintf(buf, sizeof(buf), "%s: %.2f seconds\n", line.label, line.value);
        out += buf;
    }
    return out;
}

} // namespace aggen
