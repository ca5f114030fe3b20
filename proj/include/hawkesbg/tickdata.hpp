#pragma once

#include "hawkesbg/core.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace hawkesbg {

struct TickRecord {
    std::int64_t timestamp = 0;  // whole seconds since session open
    std::int64_t price = 0;
    std::int64_t volume = 0;
    std::string contract;
};

// Which earlier price change the sign rule compares against.
enum class SignReference {
    PreviousChange,       // previous transaction that changed the price (default)
    PreviousTransaction,  // immediately preceding raw transaction
};

struct SessionConfig {
    std::int64_t session_start = 0;
    std::int64_t session_end = 22200;  // 9:00-15:10
    std::int64_t tick_size = 5;
    std::uint64_t jitter_seed = 0;
    SignReference sign_reference = SignReference::PreviousChange;

    void validate() const;
};

// CSV with header "timestamp,price,volume,contract". Throws ParseError with
// the 1-based line number of the first bad row.
std::vector<TickRecord> read_ticks_csv(std::istream& in);

// Contract with the largest total volume; ties go to the lexicographically
// smallest id. Throws DomainError on an empty session.
std::string select_active_contract(std::span<const TickRecord> records);

// Market-movement filter for one contract's chronologically ordered records:
// drop records without a price change, then keep a change when its sign
// matches the reference change or its magnitude exceeds one tick.
// Returns the retained records.
std::vector<TickRecord> filter_movements(std::span<const TickRecord> records,
                                         const SessionConfig& cfg);

// Adds independent Uniform(-0.5, 0.5) offsets and sorts.
std::vector<double> jitter_timestamps(std::span<const std::int64_t> times, std::uint64_t seed);

struct MovementExtraction {
    EventSequence events{{}, ObservationWindow(0.0, 1.0)};
    std::string contract;
    std::size_t total_records = 0;
    std::size_t contract_records = 0;
    std::size_t retained = 0;
    double retained_fraction = 0.0;  // retained / contract_records (0 when empty)
};

// Whole pipeline: contract selection, filtering, jitter. The event window is
// the session widened by half a second on each side so jittered edge events
// stay inside.
MovementExtraction extract_movements(std::span<const TickRecord> records, const SessionConfig& cfg);

}  // namespace hawkesbg
