#include "deepratio/sample.hpp"

#include <stdexcept>
#include <string>

namespace deepratio {

std::vector<std::size_t> MarkedPointSample::class_counts() const {
    std::vector<std::size_t> counts(static_cast<std::size_t>(n_classes()), 0);
    for (const auto& ev : events) ++counts[static_cast<std::size_t>(encode_class(ev.type, ev.mark, n_marks))];
    return counts;
}

std::vector<double> joint_features(const EventRecord& ev) {
    std::vector<double> f;
    f.reserve(ev.x.size() + ev.y.size());
    f.insert(f.end(), ev.x.begin(), ev.x.end());
    f.insert(f.end(), ev.y.begin(), ev.y.end());
    return f;
}

std::span<const double> mark_features(const EventRecord& ev) {
    return ev.y.empty() ? std::span<const double>(ev.x) : std::span<const double>(ev.y);
}

void validate(const MarkedPointSample& sample, bool strict) {
    if (!(sample.horizon > 0.0)) throw std::invalid_argument("sample horizon must be positive");
    double prev = 0.0;
    for (std::size_t n = 0; n < sample.events.size(); ++n) {
        const auto& ev = sample.events[n];
        const bool ordered = strict ? ev.time > prev : ev.time >= prev;
        if (!ordered || ev.time > sample.horizon)
            throw std::invalid_argument("event " + std::to_string(n) + " out of order or outside (0, T]");
        if (ev.type < 0 || ev.type >= sample.n_types || ev.mark < 0 || ev.mark >= sample.n_marks)
            throw std::invalid_argument("event " + std::to_string(n) + " has invalid (type, mark)");
        if (ev.x.size() != sample.d_x || ev.y.size() != sample.d_y)
            throw std::invalid_argument("event " + std::to_string(n) + " has wrong covariate width");
        prev = ev.time;
    }
}

}  // namespace deepratio
