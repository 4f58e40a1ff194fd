#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "deepratio/sample.hpp"

namespace deepratio::lob {

enum Side : int { kBid = 0, kAsk = 1 };  // 0 = sell market order, 1 = buy market order

/// One market order with the level-1 book just before it. Prices are
/// integer price units; quantities are shares.
struct RawLobEvent {
    std::int64_t timestamp_us = 0;  // since session start
    int side = kBid;
    std::int64_t best_bid = 0;
    std::int64_t best_ask = 0;
    double qty_bid = 0.0;
    double qty_ask = 0.0;
    int mid_changed = 0;
};

struct LobCovariates {
    double imbalance = 0.0;     // (qB - qA) / (qB + qA)
    double last_sign = 1.0;     // -1 last trade on the bid side, +1 on the ask side
    double spread_ticks = 1.0;  // rounded, clipped to {1, 2, 3}
};

inline constexpr int kMaxSpreadTicks = 3;

/// Imbalance and clipped spread of a book state (last_sign left at +1).
LobCovariates book_covariates(const RawLobEvent& ev, std::int64_t tick_size = 1);

struct CovariateRecord {
    std::size_t index = 0;     // position in the raw stream
    LobCovariates covariates;
    bool sign_seeded = false;  // no previous trade in the session
};

struct CovariateResult {
    std::vector<CovariateRecord> records;  // accepted events only
    std::size_t rejected = 0;              // crossed books or empty queues
};

/// Causal covariates for one session: event n sees only the book just
/// before it and the side of event n-1. The session's first event gets the
/// seeded sign +1. Throws std::invalid_argument on an empty stream,
/// decreasing timestamps or an invalid side/mark.
CovariateResult compute_covariates(std::span<const RawLobEvent> events, std::int64_t tick_size = 1);

enum class SeededPolicy { keep, drop };

/// Events of one or more sessions as a 2-type, 2-mark sample with
/// x = (imbalance, last_sign, spread) and no separate mark covariates.
/// Sessions are laid end to end in time.
struct Session {
    std::vector<RawLobEvent> events;
    CovariateResult covariates;
};

MarkedPointSample to_marked_sample(std::span<const Session> sessions, SeededPolicy policy = SeededPolicy::keep);
MarkedPointSample to_marked_sample(std::span<const RawLobEvent> events, const CovariateResult& covariates,
                                   SeededPolicy policy = SeededPolicy::keep);

/// CSV with header timestamp_us,side,best_bid,best_ask,qty_bid,qty_ask,mid_changed.
/// Input is assumed de-duplicated upstream (one row per market order).
std::vector<RawLobEvent> read_lob_csv(const std::filesystem::path& path);
void write_lob_csv(std::span<const RawLobEvent> events, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Synthetic stream with a known conditional class law.

struct SyntheticLobConfig {
    double event_rate = 10.0;  // market orders per second
    double imb_theta = 0.5;    // clipped OU driving the imbalance
    double imb_sigma = 0.6;
    double imb_clip = 0.98;
    std::array<std::array<double, 3>, 3> spread_transition{{{0.60, 0.25, 0.15}, {0.25, 0.50, 0.25}, {0.15, 0.25, 0.60}}};  // uniform occupancy
    std::int64_t tick_size = 1;
};

/// p^{i,k}(x0, x1, x2) of the synthetic stream, in encode_class order.
std::array<double, 4> synthetic_class_probabilities(const LobCovariates& cov);

std::vector<RawLobEvent> synthesize_lob_stream(double horizon_seconds, std::uint64_t seed,
                                               const SyntheticLobConfig& config = {});

}  // namespace deepratio::lob
