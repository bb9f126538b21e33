#include "smm/schedule.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace smm {

namespace {

// Small relative slack so exact-boundary comparisons are not decided by the
// last bit of a floating-point power.
constexpr double kSlack = 1e-9;

std::int64_t poly_floor(double c1, double c2, std::int64_t k) {
    return static_cast<std::int64_t>(
        std::ceil(c2 * std::pow(static_cast<double>(k), 1.0 + 2.0 * c1) - kSlack));
}

}  // namespace

void GrowthSchedule::check_params() const {
    if (c1 <= 0.0 || c2 <= 0.0) throw std::invalid_argument("growth schedule: c1 and c2 must be positive");
    if (k_bar < 1) throw std::invalid_argument("growth schedule: k_bar must be at least 1");
    if (!(c3 < static_cast<double>(k_bar)))
        throw std::invalid_argument("growth schedule: c3 must be smaller than k_bar");
    if (N_init < 1) throw std::invalid_argument("growth schedule: N_init must be at least 1");
    if (horizon < 1) throw std::invalid_argument("growth schedule: horizon must be at least 1");
}

std::vector<std::int64_t> GrowthSchedule::generate() const {
    check_params();
    std::vector<std::int64_t> seq;
    seq.reserve(static_cast<std::size_t>(horizon));
    std::int64_t prev = N_init;
    for (std::int64_t k = 1; k <= horizon; ++k) {
        const std::int64_t floor_k = poly_floor(c1, c2, k);
        const std::int64_t n =
            (k <= k_bar) ? std::max(prev + k, floor_k) : std::max(prev + 1, floor_k);
        seq.push_back(n);
        prev = n;
    }
    const ScheduleCheck check = validate(seq);
    if (!check.ok) {
        std::ostringstream msg;
        msg << "growth schedule parameters are infeasible at k=" << check.first_bad_k << ": "
            << check.reason;
        throw std::invalid_argument(msg.str());
    }
    return seq;
}

ScheduleCheck GrowthSchedule::validate(const std::vector<std::int64_t>& seq) const {
    if (seq.empty()) throw std::invalid_argument("growth schedule: sequence must be nonempty");
    ScheduleCheck out;
    const std::int64_t len = static_cast<std::int64_t>(seq.size());
    for (std::int64_t k = k_bar + 1; k <= len; ++k) {
        const double nk = static_cast<double>(seq[static_cast<std::size_t>(k - 1)]);
        const double nprev = static_cast<double>(seq[static_cast<std::size_t>(k - 2)]);
        const double lower =
            std::max(nprev + 1.0, c2 * std::pow(static_cast<double>(k), 1.0 + 2.0 * c1));
        const double upper = nprev / (1.0 - c3 / static_cast<double>(k));
        std::ostringstream why;
        if (nk < lower - kSlack * (1.0 + lower)) {
            why << "N_" << k << "=" << seq[static_cast<std::size_t>(k - 1)]
                << " is below the lower bound " << lower;
        } else if (nk > upper + kSlack * (1.0 + upper)) {
            why << "N_" << k << "=" << seq[static_cast<std::size_t>(k - 1)]
                << " exceeds the ratio bound " << upper;
        } else {
            continue;
        }
        out.ok = false;
        out.first_bad_k = k;
        out.reason = why.str();
        return out;
    }
    return out;
}

}  // namespace smm
