// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "spacor/config.hpp"
#include "spacor/rng.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace spacor {

using ElementSet = std::vector<int>; // strictly increasing element indices

std::uint64_t binomial(int n, int k);

/// floor(log2 C(M, M_T_c)): spatial bits carried by the antenna selection.
int spatial_bits(int num_elements, int num_comm_tx);

/// Bijection between spatial words {0 .. 2^b - 1} and comm element sets.
///
/// The default table enumerates the M_T_c-subsets of {0..M-1} in
/// lexicographic order and keeps the first 2^b of them; combinations past
/// that point are never selected. A custom table may be supplied instead,
/// e.g. to reproduce a specific published mapping.
class CombinationMap {
public:
    CombinationMap(int num_elements, int num_comm_tx);

    /// Table entries must be distinct, strictly increasing M_T_c-subsets and
    /// the table size must equal 2^spatial_bits(M, M_T_c).
    static CombinationMap from_table(int num_elements, int num_comm_tx,
                                     std::vector<ElementSet> table);

    int num_elements() const noexcept { return num_elements_; }
    int num_comm_tx() const noexcept { return num_comm_tx_; }
    int bits() const noexcept { return bits_; }
    std::size_t size() const noexcept { return table_.size(); }

    const ElementSet& combination(std::size_t index) const;
    std::optional<std::size_t> index_of(std::span<const int> combination) const;

private:
    CombinationMap(int num_elements, int num_comm_tx, std::vector<ElementSet> table);

    int num_elements_;
    int num_comm_tx_;
    int bits_;
    std::vector<ElementSet> table_;
};

/// All k-subsets of {0..n-1} in lexicographic order.
std::vector<ElementSet> lexicographic_combinations(int n, int k);

/// Per-slot radar element sets for one pulse. The comm set of a slot is the
/// complement of its radar set.
class AllocationPattern {
public:
    AllocationPattern(int num_elements, std::vector<ElementSet> radar_sets);

    int num_elements() const noexcept { return num_elements_; }
    int num_slots() const noexcept { return static_cast<int>(radar_.size()); }
    const ElementSet& radar_set(int slot) const { return radar_.at(static_cast<std::size_t>(slot)); }
    ElementSet comm_set(int slot) const;
    bool is_radar(int slot, int element) const;

private:
    int num_elements_;
    std::vector<ElementSet> radar_;
};

/// Builds the allocation from spatial bits (one bit per byte, MSB first per
/// slot word). SpaCoR consumes map.bits() bits per slot and maps each word
/// to the comm set; Fix2 maps the first slot's word once and holds it for
/// the pulse; Full and Fix1 ignore the bits. Throws std::invalid_argument
/// when SpaCoR or Fix2 is short of bits.
AllocationPattern make_allocation(SchemeId scheme, const CheckedConfig& cfg,
                                  std::span<const std::uint8_t> spatial_bits,
                                  const CombinationMap& map);

/// Randomized allocation. SpaCoR draws every slot's comm set uniformly from
/// all C(M, M_T_c) combinations, Fix2 draws one set for the whole pulse.
AllocationPattern make_allocation(SchemeId scheme, const CheckedConfig& cfg, Rng& rng);

} // namespace spacor
