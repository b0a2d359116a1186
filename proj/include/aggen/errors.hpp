#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

namespace aggen {

// Input spec failed validation; message carries the violation list.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An operation was called outside its contract (e.g. applying an exploit
// whose postconditions add nothing).
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Two distinct fact-sets produced the same StateKey. Fatal: dedup by key
// is only sound while this never happens.
class HashCollisionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A serialized partial graph failed structural checks (magic, version,
// checksum, state indices).
class CorruptPartialError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class TransportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Generation exceeded a configured capacity limit.
class ResourceLimitError : public std::runtime_error {
public:
    ResourceLimitError(const std::string& msg, std::uint64_t states)
        : std::runtime_error(msg), states_so_far(states) {}

    std::uint64_t states_so_far;
};

// A worker failed; identifies rank and phase for the abort diagnostic.
class WorkerError : public std::runtime_error {
public:
    WorkerError(int rank, const std::string& phase, const std::string& what)
        : std::runtime_error("worker rank " + std::to_string(rank) + " failed in " + phase +
                             ": " + what),
          rank(rank), phase(phase) {}

    int rank;
    std::string phase;
};

} // namespace aggen
