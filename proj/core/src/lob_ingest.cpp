#include "deepratio/lob_ingest.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "deepratio/rng.hpp"
#include "deepratio/sim_core.hpp"
#include "text_util.hpp"

namespace deepratio::lob {

namespace {

constexpr const char* kHeader = "timestamp_us,side,best_bid,best_ask,qty_bid,qty_ask,mid_changed";

bool acceptable(const RawLobEvent& ev) {
    return ev.best_ask > ev.best_bid && ev.qty_bid > 0.0 && ev.qty_ask > 0.0;
}

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// damping of the imbalance/sign effects as the spread widens
double spread_damping(double spread) {
    if (spread < 1.5) return 1.0;
    if (spread < 2.5) return 0.6;
    return 0.35;
}

}  // namespace

LobCovariates book_covariates(const RawLobEvent& ev, std::int64_t tick_size) {
    if (tick_size <= 0) throw std::invalid_argument("tick_size must be positive");
    LobCovariates c;
    c.imbalance = (ev.qty_bid - ev.qty_ask) / (ev.qty_bid + ev.qty_ask);
    const double ticks = static_cast<double>(ev.best_ask - ev.best_bid) / static_cast<double>(tick_size);
    c.spread_ticks = std::clamp(std::round(ticks), 1.0, static_cast<double>(kMaxSpreadTicks));
    return c;
}

CovariateResult compute_covariates(std::span<const RawLobEvent> events, std::int64_t tick_size) {
    if (events.empty()) throw std::invalid_argument("compute_covariates: empty stream");
    CovariateResult out;
    out.records.reserve(events.size());
    for (std::size_t n = 0; n < events.size(); ++n) {
        const auto& ev = events[n];
        if (ev.side != kBid && ev.side != kAsk) throw std::invalid_argument("row " + std::to_string(n) + ": bad side");
        if (ev.mid_changed != 0 && ev.mid_changed != 1)
            throw std::invalid_argument("row " + std::to_string(n) + ": bad mid_changed flag");
        if (n > 0 && ev.timestamp_us < events[n - 1].timestamp_us)
            throw std::invalid_argument("row " + std::to_string(n) + ": timestamps decrease");
        if (!acceptable(ev)) {
            ++out.rejected;
            continue;
        }
        CovariateRecord rec;
        rec.index = n;
        rec.covariates = book_covariates(ev, tick_size);
        if (n == 0) {
            rec.sign_seeded = true;
            rec.covariates.last_sign = 1.0;
        } else {
            rec.covariates.last_sign = events[n - 1].side == kAsk ? 1.0 : -1.0;
        }
        out.records.push_back(rec);
    }
    return out;
}

MarkedPointSample to_marked_sample(std::span<const Session> sessions, SeededPolicy policy) {
    MarkedPointSample s;
    s.source = "lob";
    s.n_types = 2;
    s.n_marks = 2;
    s.d_x = 3;
    s.d_y = 0;
    double offset = 0.0;
    for (const auto& session : sessions) {
        if (session.events.empty()) continue;
        for (const auto& rec : session.covariates.records) {
            if (rec.sign_seeded && policy == SeededPolicy::drop) continue;
            const auto& ev = session.events.at(rec.index);
            const auto& c = rec.covariates;
            s.events.push_back(EventRecord{offset + static_cast<double>(ev.timestamp_us) * 1e-6, ev.side,
                                           ev.mid_changed, {c.imbalance, c.last_sign, c.spread_ticks}, {}});
        }
        offset += static_cast<double>(session.events.back().timestamp_us) * 1e-6;
    }
    s.horizon = offset > 0.0 ? offset : 1e-6;
    return s;
}

MarkedPointSample to_marked_sample(std::span<const RawLobEvent> events, const CovariateResult& covariates,
                                   SeededPolicy policy) {
    const Session session{{events.begin(), events.end()}, covariates};
    return to_marked_sample(std::span<const Session>(&session, 1), policy);
}

std::vector<RawLobEvent> read_lob_csv(const std::filesystem::path& path) {
    auto is = detail::open_in(path.string());
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error(path.string() + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kHeader) throw std::runtime_error(path.string() + ": unexpected header '" + line + "'");
    std::vector<RawLobEvent> out;
    std::size_t row = 1;
    while (std::getline(is, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        const auto cells = detail::split_csv_line(line);
        if (cells.size() != 7) throw std::runtime_error(path.string() + ":" + std::to_string(row) + ": expected 7 fields");
        RawLobEvent ev;
        ev.timestamp_us = std::stoll(cells[0]);
        ev.side = std::stoi(cells[1]);
        ev.best_bid = std::stoll(cells[2]);
        ev.best_ask = std::stoll(cells[3]);
        ev.qty_bid = detail::parse_double(cells[4]);
        ev.qty_ask = detail::parse_double(cells[5]);
        ev.mid_changed = std::stoi(cells[6]);
        out.push_back(ev);
    }
    return out;
}

void write_lob_csv(std::span<const RawLobEvent> events, const std::filesystem::path& path) {
    auto os = detail::open_out(path.string());
    os << kHeader << '\n';
    for (const auto& ev : events)
        os << ev.timestamp_us << ',' << ev.side << ',' << ev.best_bid << ',' << ev.best_ask << ','
           << detail::fmt17(ev.qty_bid) << ',' << detail::fmt17(ev.qty_ask) << ',' << ev.mid_changed << '\n';
}

std::array<double, 4> synthetic_class_probabilities(const LobCovariates& cov) {
    const double damp = spread_damping(cov.spread_ticks);
    const double p_buy = logistic((1.2 * cov.imbalance + 0.8 * cov.last_sign) * damp);
    // a buy depletes the ask queue, which is thin when the imbalance is high
    const double p_change_buy = logistic(-1.0 + 2.0 * cov.imbalance * damp);
    const double p_change_sell = logistic(-1.0 - 2.0 * cov.imbalance * damp);
    const double p_sell = 1.0 - p_buy;
    return {p_sell * (1.0 - p_change_sell), p_sell * p_change_sell, p_buy * (1.0 - p_change_buy),
            p_buy * p_change_buy};
}

std::vector<RawLobEvent> synthesize_lob_stream(double horizon_seconds, std::uint64_t seed,
                                               const SyntheticLobConfig& config) {
    if (!(horizon_seconds > 0.0)) throw std::invalid_argument("synthesize_lob_stream: horizon must be > 0");
    Rng rng(seed, stream::kLobSynth);
    const sim::OUParams imb{config.imb_theta, 0.0, config.imb_sigma};

    double t = 0.0;
    double z = std::sqrt(sim::ou_stationary_variance(imb)) * rng.gaussian();
    int spread_state = 0;  // 0,1,2 -> 1,2,3+ ticks
    std::int64_t bid = 100000;
    int last_side = -1;
    std::vector<RawLobEvent> out;
    out.reserve(static_cast<std::size_t>(horizon_seconds * config.event_rate * 1.1));

    while (true) {
        const double dt = rng.exponential(config.event_rate);
        if (t + dt > horizon_seconds) break;
        t += dt;
        z = sim::ou_transition(z, dt, imb, rng.gaussian());
        const double zc = std::clamp(z, -config.imb_clip, config.imb_clip);

        // book just before the order
        const double depth = 20.0 + std::floor(rng.uniform() * 181.0);
        double qb = std::round(depth * (1.0 + zc) / 2.0);
        qb = std::clamp(qb, 1.0, depth - 1.0);
        std::int64_t raw_spread = spread_state + 1;
        if (spread_state == 2) {
            const double u = rng.uniform();
            raw_spread = u < 0.7 ? 3 : (u < 0.9 ? 4 : 5);
        }
        RawLobEvent ev;
        ev.timestamp_us = static_cast<std::int64_t>(std::llround(t * 1e6));
        ev.best_bid = bid;
        ev.best_ask = bid + raw_spread * config.tick_size;
        ev.qty_bid = qb;
        ev.qty_ask = depth - qb;

        LobCovariates cov = book_covariates(ev, config.tick_size);
        cov.last_sign = last_side < 0 ? 1.0 : (last_side == kAsk ? 1.0 : -1.0);
        const auto probs = synthetic_class_probabilities(cov);
        double u = rng.uniform();
        int cls = 3;
        for (int c = 0; c < 4; ++c) {
            u -= probs[static_cast<std::size_t>(c)];
            if (u < 0.0) {
                cls = c;
                break;
            }
        }
        ev.side = cls / 2;
        ev.mid_changed = cls % 2;
        out.push_back(ev);

        last_side = ev.side;
        if (ev.mid_changed) bid += (ev.side == kAsk ? 1 : -1) * config.tick_size;
        const auto& row = config.spread_transition[static_cast<std::size_t>(spread_state)];
        const double v = rng.uniform();
        spread_state = v < row[0] ? 0 : (v < row[0] + row[1] ? 1 : 2);
    }
    return out;
}

}  // namespace deepratio::lob
