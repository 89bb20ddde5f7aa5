#include "vpnsim/policy.hpp"

#include "vpnsim/error.hpp"

#include <string>

namespace vpnsim::policy {

std::optional<std::size_t> PathTable::index_of(std::string_view label) const
{
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (candidates[i].path.label == label) {
            return i;
        }
    }
    return std::nullopt;
}

std::optional<std::size_t> select_path(const PathTable& table, double demand_bps)
{
    if (!(demand_bps >= 0.0)) {
        throw InvalidArgument("demand must be >= 0");
    }
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < table.candidates.size(); ++i) {
        const CandidatePath& c = table.candidates[i];
        if (!c.alive || c.allocated_bps < demand_bps) {
            continue;
        }
        if (!best) {
            best = i;
            continue;
        }
        const CandidatePath& b = table.candidates[*best];
        if (c.allocated_bps < b.allocated_bps ||
            (c.allocated_bps == b.allocated_bps && c.path.label < b.path.label)) {
            best = i;
        }
    }
    return best;
}

std::optional<std::size_t> handle_path_failure(PathTable& table, std::string_view failed_label, double demand_bps)
{
    const auto idx = table.index_of(failed_label);
    if (!idx) {
        throw InvalidArgument("path '" + std::string(failed_label) + "' is not in the table");
    }
    table.candidates[*idx].alive = false;
    table.selected = select_path(table, demand_bps);
    return table.selected;
}

void restore_path(PathTable& table, std::string_view label)
{
    const auto idx = table.index_of(label);
    if (!idx) {
        throw InvalidArgument("path '" + std::string(label) + "' is not in the table");
    }
    table.candidates[*idx].alive = true;
}

}  // namespace vpnsim::policy
