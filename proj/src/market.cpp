#include "spreadlab/market.hpp"

#include <cmath>
#include <stdexcept>

namespace spreadlab {

ValidationReport validate_model(const BidAskPath& path) {
    ValidationReport report;
    if (path.bid.size() < 2 || path.bid.size() != path.ask.size())
        throw std::invalid_argument("validate_model: malformed path");
    if (path.price_system && path.price_system->size() != path.bid.size())
        throw std::invalid_argument("validate_model: price system size mismatch");
    report.normalized = true;
    for (std::size_t k = 0; k < path.size(); ++k) {
        if (path.bid[k] > path.ask[k]) report.ordering_violations.push_back(k);
        if (path.price_system) {
            const double s = (*path.price_system)[k];
            if (s < path.bid[k] || s > path.ask[k]) report.price_violations.push_back(k);
        }
        if (path.bid[k] < 0.0 || path.ask[k] > 1.0) report.normalized = false;
    }
    report.valid = report.ordering_violations.empty() && report.price_violations.empty();
    return report;
}

SpreadStructure check_spread_assumption(const BidAskPath& path, std::size_t chatter_window) {
    SpreadStructure s;
    const std::size_t last = path.size() - 1;

    for (std::size_t k = 0; k <= last; ++k)
        if (path.spread(k) == 0.0) s.zero_set.push_back(k);

    // Grid dichotomy: a zero strictly before T either opens an excursion
    // (positive at the next sample) or is inner from the right.
    for (std::size_t k : s.zero_set) {
        if (k == last) continue;
        s.zero_classification.emplace_back(
            k, path.spread(k + 1) > 0.0 ? ZeroKind::ExcursionStart : ZeroKind::RightInner);
    }

    if (path.spread(0) > 0.0) s.excursion_starts.push_back(0);  // spread left limit at 0 is 0
    for (const auto& [k, kind] : s.zero_classification)
        if (kind == ZeroKind::ExcursionStart) s.excursion_starts.push_back(k);

    for (std::size_t start : s.excursion_starts) {
        // Scan for the first later index whose value or left limit is zero.
        // The scan begins one sample into the excursion so the start's own
        // zero does not terminate it.
        const std::size_t scan_from = (path.spread(start) > 0.0) ? start + 1 : start + 2;
        ExcursionInterval interval;
        interval.start = start;
        interval.end = last;
        interval.end_kind = EndKind::Horizon;
        for (std::size_t k = scan_from; k <= last; ++k) {
            if (path.spread(k) == 0.0) {
                interval.end = k;
                interval.end_kind = EndKind::HitZero;
                break;
            }
            if (path.spread(k - 1) == 0.0) {
                interval.end = k;
                interval.end_kind = EndKind::LeftLimitZero;
                break;
            }
        }
        s.excursions.push_back(interval);
    }

    for (std::size_t k = 1; k + 1 <= last; ++k) {
        if (path.spread(k) == 0.0 && path.spread(k - 1) > 0.0 && path.spread(k + 1) > 0.0)
            s.isolated_zeros.push_back(k);
    }
    for (std::size_t i = 0; i + 1 < s.isolated_zeros.size() && !s.chatter_flagged; ++i) {
        if (s.isolated_zeros[i + 1] - s.isolated_zeros[i] <= chatter_window)
            s.chatter_flagged = true;
    }
    s.assumption_ok = !s.chatter_flagged;

    // Certified threshold level n*: 2^-n* at or below every positive spread.
    double min_positive = 0.0;
    for (std::size_t k = 0; k <= last; ++k) {
        const double x = path.spread(k);
        if (x > 0.0 && (min_positive == 0.0 || x < min_positive)) min_positive = x;
    }
    int level = 0;
    if (min_positive > 0.0)
        while (std::ldexp(1.0, -level) > min_positive) ++level;
    s.certified_level = level;
    return s;
}

SpreadStructure excursion_cover(const BidAskPath& path, std::size_t chatter_window) {
    SpreadStructure s = check_spread_assumption(path, chatter_window);
    if (!s.assumption_ok)
        throw std::runtime_error("excursion_cover: spread assumption violated (chatter)");
    const std::size_t last = path.size() - 1;
    std::size_t k = 0;
    while (k <= last) {
        if (path.spread(k) == 0.0) {
            ZeroRun run{k, k};
            while (run.last + 1 <= last && path.spread(run.last + 1) == 0.0) ++run.last;
            s.zero_regime.push_back(run);
            k = run.last + 1;
        } else {
            ++k;
        }
    }
    return s;
}

std::vector<std::size_t> threshold_stopping_times(const BidAskPath& path, int level) {
    if (level < 0) throw std::invalid_argument("threshold_stopping_times: negative level");
    const double low = std::ldexp(1.0, -(level + 1));
    const double high = std::ldexp(1.0, -level);
    const std::size_t last = path.size() - 1;

    std::vector<std::size_t> taus{0};
    bool seeking_low = true;  // odd entries hit the low threshold
    std::size_t from = 0;
    while (true) {
        bool found = false;
        std::size_t hit = 0;
        // Odd entries scan from tau_{k-1} inclusive, even entries strictly after.
        const std::size_t begin = seeking_low ? from : from + 1;
        for (std::size_t k = begin; k <= last; ++k) {
            const double x = path.spread(k);
            if (seeking_low ? (x <= low) : (x >= high)) {
                hit = k;
                found = true;
                break;
            }
        }
        if (!found) break;
        taus.push_back(hit);
        from = hit;
        seeking_low = !seeking_low;
    }
    return taus;
}

int certified_threshold_level(const BidAskPath& path) {
    return check_spread_assumption(path).certified_level;
}

}  // namespace spreadlab
