#pragma once

#include "vpnsim/topology.hpp"

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

namespace vpnsim::policy {

struct CandidatePath {
    PathSpec path;
    double allocated_bps = 0.0;
    bool alive = true;
};

struct PathTable {
    std::vector<CandidatePath> candidates;
    std::optional<std::size_t> selected;

    std::optional<std::size_t> index_of(std::string_view label) const;
    const CandidatePath* selected_path() const { return selected ? &candidates[*selected] : nullptr; }
};

/// Best fit: the alive candidate with the smallest allocated bandwidth that
/// still covers `demand`; equal bandwidths resolve to the smaller label.
std::optional<std::size_t> select_path(const PathTable& table, double demand_bps);

/// Marks `failed_label` dead and reselects. The table's `selected` is
/// updated and returned.
std::optional<std::size_t> handle_path_failure(PathTable& table, std::string_view failed_label, double demand_bps);

/// Marks a candidate alive again without touching the current selection.
void restore_path(PathTable& table, std::string_view label);

}  // namespace vpnsim::policy
