#pragma once

#include <cstdint>
#include <string>

namespace aggen {

// Wall-time breakdown of one generation run, mirroring the measured
// listing: three phase totals, the phase-3 sub-steps, and run counters.
struct PhaseProfile {
    double phase1_total = 0;
    double phase2_total = 0;
    double phase3_total = 0;
    double comm_prep = 0;
    double send_recv = 0;
    double merging_states = 0;
    double merging_edges = 0;
    double total_time = 0;

    std::uint64_t states = 0;
    std::uint64_t edges = 0;
    std::uint64_t duplicates_dropped = 0;
    std::uint64_t messages_sent = 0;
    std::uint64_t bytes_sent = 0;
};

// Fixed-order plain-text block, one "<label>: <value> seconds" line each:
// phase 1 total, phase 2 total, phase 3 total, - comm prep,
// - transport send/recv, - merging states, - merging edges, total time.
std::string emit_profile_report(const PhaseProfile& p);

} // namespace aggen
