#include "hawkesbg/tickdata.hpp"

#include "hawkesbg/errors.hpp"
#include "hawkesbg/simulate.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>

namespace hawkesbg {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t pos = 0;
    while (true) {
        const std::size_t comma = line.find(',', pos);
        fields.push_back(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos
                                                                          : comma - pos));
        if (comma == std::string_view::npos) {
            break;
        }
        pos = comma + 1;
    }
    for (auto& f : fields) {
        while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) {
            f.remove_prefix(1);
        }
        while (!f.empty() && (f.back() == ' ' || f.back() == '\t' || f.back() == '\r')) {
            f.remove_suffix(1);
        }
    }
    return fields;
}

std::int64_t parse_int(std::string_view text, const char* field, std::size_t line) {
    std::int64_t value = 0;
    const auto result = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || result.ec != std::errc() || result.ptr != text.data() + text.size()) {
        throw ParseError(std::string("bad ") + field + " '" + std::string(text) + "'", line);
    }
    return value;
}

int sign(std::int64_t v) {
    return (v > 0) - (v < 0);
}

}  // namespace

void SessionConfig::validate() const {
    if (tick_size <= 0) {
        throw ConfigError("tick size must be positive");
    }
    if (session_end <= session_start) {
        throw ConfigError("session end must come after session start");
    }
}

std::vector<TickRecord> read_ticks_csv(std::istream& in) {
    std::vector<TickRecord> records;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        const auto fields = split_fields(line);
        if (!header_seen) {
            if (fields.size() != 4 || fields[0] != "timestamp" || fields[1] != "price" ||
                fields[2] != "volume" || fields[3] != "contract") {
                throw ParseError("expected header 'timestamp,price,volume,contract'", line_no);
            }
            header_seen = true;
            continue;
        }
        if (fields.size() != 4) {
            throw ParseError("expected 4 fields, got " + std::to_string(fields.size()), line_no);
        }
        TickRecord rec;
        rec.timestamp = parse_int(fields[0], "timestamp", line_no);
        rec.price = parse_int(fields[1], "price", line_no);
        rec.volume = parse_int(fields[2], "volume", line_no);
        rec.contract = std::string(fields[3]);
        if (rec.price <= 0) {
            throw ParseError("price must be positive", line_no);
        }
        if (rec.volume <= 0) {
            throw ParseError("volume must be positive", line_no);
        }
        if (rec.contract.empty()) {
            throw ParseError("empty contract id", line_no);
        }
        records.push_back(std::move(rec));
    }
    return records;
}

std::string select_active_contract(std::span<const TickRecord> records) {
    if (records.empty()) {
        throw DomainError("cannot select a contract from an empty session");
    }
    std::map<std::string, std::int64_t> volume;  // ordered: ties resolve to the smallest id
    for (const auto& r : records) {
        volume[r.contract] += r.volume;
    }
    auto best = volume.begin();
    for (auto it = volume.begin(); it != volume.end(); ++it) {
        if (it->second > best->second) {
            best = it;
        }
    }
    return best->first;
}

std::vector<TickRecord> filter_movements(std::span<const TickRecord> records,
                                         const SessionConfig& cfg) {
    cfg.validate();
    std::vector<TickRecord> kept;
    if (records.empty()) {
        return kept;
    }
    int reference_sign = 0;  // 0: no reference change yet
    for (std::size_t r = 1; r < records.size(); ++r) {
        if (records[r].timestamp < records[r - 1].timestamp) {
            throw DomainError("tick records must be in chronological order");
        }
        const std::int64_t change = records[r].price - records[r - 1].price;
        if (change == 0) {
            if (cfg.sign_reference == SignReference::PreviousTransaction) {
                reference_sign = 0;
            }
            continue;
        }
        const int s = sign(change);
        const bool same_direction = reference_sign != 0 && s == reference_sign;
        const bool large = std::abs(change) > cfg.tick_size;
        if (same_direction || large) {
            kept.push_back(records[r]);
        }
        reference_sign = s;
    }
    return kept;
}

std::vector<double> jitter_timestamps(std::span<const std::int64_t> times, std::uint64_t seed) {
    RandomStream rng(seed);
    std::vector<double> out;
    out.reserve(times.size());
    for (std::int64_t t : times) {
        out.push_back(static_cast<double>(t) + rng.uniform() - 0.5);
    }
    std::sort(out.begin(), out.end());
    return out;
}

MovementExtraction extract_movements(std::span<const TickRecord> records, const SessionConfig& cfg) {
    cfg.validate();
    MovementExtraction out;
    out.total_records = records.size();
    const ObservationWindow window(static_cast<double>(cfg.session_start) - 0.5,
                                   static_cast<double>(cfg.session_end) + 0.5);
    if (records.empty()) {
        out.events = EventSequence({}, window);
        return out;
    }
    out.contract = select_active_contract(records);
    std::vector<TickRecord> contract_records;
    for (const auto& r : records) {
        if (r.contract == out.contract) {
            if (r.timestamp < cfg.session_start || r.timestamp > cfg.session_end) {
                throw DomainError("tick at " + std::to_string(r.timestamp) +
                                  " s lies outside the session");
            }
            contract_records.push_back(r);
        }
    }
    out.contract_records = contract_records.size();
    const auto kept = filter_movements(contract_records, cfg);
    std::vector<std::int64_t> stamps;
    stamps.reserve(kept.size());
    for (const auto& r : kept) {
        stamps.push_back(r.timestamp);
    }
    auto times = jitter_timestamps(stamps, cfg.jitter_seed);
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (!(times[i] > times[i - 1])) {
            times[i] = std::nextafter(times[i - 1], INFINITY);
        }
    }
    out.retained = times.size();
    out.retained_fraction = out.contract_records > 0 ? static_cast<double>(out.retained) /
                                                           static_cast<double>(out.contract_records)
                                                     : 0.0;
    out.events = EventSequence(std::move(times), window);
    return out;
}

}  // namespace hawkesbg
