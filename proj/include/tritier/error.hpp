#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace tritier {

// Every failure surfaced by the library carries one of these codes so
// callers (and tests) can dispatch without string matching.
enum class Errc {
    io,                  // unreadable / unwritable file
    schema,              // malformed record (carries line / field context)
    validation,          // invariant violation on otherwise well-formed data
    unknown_culture,     // culture code outside the evaluated six
    excluded_culture,    // Mural records are rejected, not dropped
    count_mismatch,      // registry totals disagree with the shipped counts
    duplicate_id,
    sample_exceeds,      // stratified request larger than availability
    range,               // numeric value outside its documented interval
    length_mismatch,
    degenerate,          // zero-variance / single-category statistics input
    insufficient_data,
    parse_no_json,       // judge reply contained no JSON document
    parse_missing_key,
    parse_bad_value,     // non-numeric or out-of-range judge score
    payload_too_large,
    auth,
    transport,           // transient or fatal transport failure
    retries_exhausted,
    replay_miss,
    decode,              // undecodable image bytes
    budget,              // image cannot fit the byte budget above the size floor
    config,
    stage                // pipeline stage failure
};

inline const char* errc_name(Errc c) {
    switch (c) {
        case Errc::io: return "io";
        case Errc::schema: return "schema";
        case Errc::validation: return "validation";
        case Errc::unknown_culture: return "unknown_culture";
        case Errc::excluded_culture: return "excluded_culture";
        case Errc::count_mismatch: return "count_mismatch";
        case Errc::duplicate_id: return "duplicate_id";
        case Errc::sample_exceeds: return "sample_exceeds";
        case Errc::range: return "range";
        case Errc::length_mismatch: return "length_mismatch";
        case Errc::degenerate: return "degenerate";
        case Errc::insufficient_data: return "insufficient_data";
        case Errc::parse_no_json: return "parse_no_json";
        case Errc::parse_missing_key: return "parse_missing_key";
        case Errc::parse_bad_value: return "parse_bad_value";
        case Errc::payload_too_large: return "payload_too_large";
        case Errc::auth: return "auth";
        case Errc::transport: return "transport";
        case Errc::retries_exhausted: return "retries_exhausted";
        case Errc::replay_miss: return "replay_miss";
        case Errc::decode: return "decode";
        case Errc::budget: return "budget";
        case Errc::config: return "config";
        case Errc::stage: return "stage";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(Errc code, std::string message, bool retryable = false)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message),
          code_(code), retryable_(retryable) {}

    Errc code() const noexcept { return code_; }
    bool retryable() const noexcept { return retryable_; }

private:
    Errc code_;
    bool retryable_;
};

[[noreturn]] inline void fail(Errc code, std::string message) {
    throw Error(code, std::move(message));
}

}  // namespace tritier
