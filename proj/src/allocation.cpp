// SPDX-License-Identifier: Apache-2.0
#include "spacor/allocation.hpp"

#include <algorithm>
#include <bit>
#include <set>
#include <stdexcept>
#include <string>

namespace spacor {

std::uint64_t binomial(int n, int k)
{
    if (k < 0 || k > n) {
        return 0;
    }
    k = std::min(k, n - k);
    std::uint64_t r = 1;
    for (int i = 1; i <= k; ++i) {
        r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
    }
    return r;
}

int spatial_bits(int num_elements, int num_comm_tx)
{
    const auto c = binomial(num_elements, num_comm_tx);
    return c == 0 ? 0 : static_cast<int>(std::bit_width(c)) - 1;
}

std::vector<ElementSet> lexicographic_combinations(int n, int k)
{
    std::vector<ElementSet> out;
    if (k < 0 || k > n) {
        return out;
    }
    ElementSet cur(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        cur[static_cast<std::size_t>(i)] = i;
    }
    while (true) {
        out.push_back(cur);
        int i = k - 1;
        while (i >= 0 && cur[static_cast<std::size_t>(i)] == n - k + i) {
            --i;
        }
        if (i < 0) {
            break;
        }
        ++cur[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < k; ++j) {
            cur[static_cast<std::size_t>(j)] = cur[static_cast<std::size_t>(j - 1)] + 1;
        }
    }
    return out;
}

CombinationMap::CombinationMap(int num_elements, int num_comm_tx, std::vector<ElementSet> table)
    : num_elements_(num_elements),
      num_comm_tx_(num_comm_tx),
      bits_(spatial_bits(num_elements, num_comm_tx)),
      table_(std::move(table))
{
}

CombinationMap::CombinationMap(int num_elements, int num_comm_tx)
    : num_elements_(num_elements), num_comm_tx_(num_comm_tx), bits_(0)
{
    if (num_comm_tx < 1 || num_comm_tx >= num_elements) {
        throw std::invalid_argument("combination map needs 1 <= M_T_c < M");
    }
    bits_ = spatial_bits(num_elements, num_comm_tx);
    table_ = lexicographic_combinations(num_elements, num_comm_tx);
    table_.resize(std::size_t{1} << bits_);
}

CombinationMap CombinationMap::from_table(int num_elements, int num_comm_tx,
                                          std::vector<ElementSet> table)
{
    if (num_comm_tx < 1 || num_comm_tx >= num_elements) {
        throw std::invalid_argument("combination map needs 1 <= M_T_c < M");
    }
    const int bits = spatial_bits(num_elements, num_comm_tx);
    if (table.size() != (std::size_t{1} << bits)) {
        throw std::invalid_argument("combination table must have 2^" + std::to_string(bits) +
                                    " entries");
    }
    std::set<ElementSet> seen;
    for (const auto& c : table) {
        const bool sized = static_cast<int>(c.size()) == num_comm_tx;
        const bool increasing = std::adjacent_find(c.begin(), c.end(), std::greater_equal<>()) == c.end();
        const bool in_range = !c.empty() && c.front() >= 0 && c.back() < num_elements;
        if (!sized || !increasing || !in_range || !seen.insert(c).second) {
            throw std::invalid_argument("combination table entries must be distinct, strictly "
                                        "increasing M_T_c-subsets of {0..M-1}");
        }
    }
    return CombinationMap(num_elements, num_comm_tx, std::move(table));
}

const ElementSet& CombinationMap::combination(std::size_t index) const
{
    return table_.at(index);
}

std::optional<std::size_t> CombinationMap::index_of(std::span<const int> combination) const
{
    for (std::size_t i = 0; i < table_.size(); ++i) {
        if (std::equal(table_[i].begin(), table_[i].end(), combination.begin(), combination.end())) {
            return i;
        }
    }
    return std::nullopt;
}

AllocationPattern::AllocationPattern(int num_elements, std::vector<ElementSet> radar_sets)
    : num_elements_(num_elements), radar_(std::move(radar_sets))
{
    for (const auto& s : radar_) {
        const bool increasing = std::adjacent_find(s.begin(), s.end(), std::greater_equal<>()) == s.end();
        if (s.empty() || !increasing || s.front() < 0 || s.back() >= num_elements) {
            throw std::invalid_argument("radar set must be a nonempty strictly increasing subset of "
                                        "{0..M-1}");
        }
    }
}

ElementSet AllocationPattern::comm_set(int slot) const
{
    const auto& radar = radar_set(slot);
    ElementSet out;
    for (int m = 0, r = 0; m < num_elements_; ++m) {
        if (r < static_cast<int>(radar.size()) && radar[static_cast<std::size_t>(r)] == m) {
            ++r;
        } else {
            out.push_back(m);
        }
    }
    return out;
}

bool AllocationPattern::is_radar(int slot, int element) const
{
    const auto& radar = radar_set(slot);
    return std::binary_search(radar.begin(), radar.end(), element);
}

namespace {

ElementSet complement(int num_elements, const ElementSet& set)
{
    ElementSet out;
    for (int m = 0; m < num_elements; ++m) {
        if (!std::binary_search(set.begin(), set.end(), m)) {
            out.push_back(m);
        }
    }
    return out;
}

ElementSet contiguous(int count)
{
    ElementSet s(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        s[static_cast<std::size_t>(i)] = i;
    }
    return s;
}

std::size_t read_word(std::span<const std::uint8_t> bits, std::size_t offset, int width)
{
    std::size_t word = 0;
    for (int b = 0; b < width; ++b) {
        word = (word << 1) | (bits[offset + static_cast<std::size_t>(b)] & 1u);
    }
    return word;
}

} // namespace

AllocationPattern make_allocation(SchemeId scheme, const CheckedConfig& cfg,
                                  std::span<const std::uint8_t> spatial_bits,
                                  const CombinationMap& map)
{
    const int M = cfg.M();
    const int K = cfg.K();
    switch (scheme) {
    case SchemeId::Full:
        return AllocationPattern(M, std::vector<ElementSet>(static_cast<std::size_t>(K), contiguous(M)));
    case SchemeId::Fix1:
        return AllocationPattern(
            M, std::vector<ElementSet>(static_cast<std::size_t>(K), contiguous(cfg.radar_tx())));
    case SchemeId::Fix2:
    case SchemeId::SpaCoR:
        break;
    }

    if (map.num_elements() != M || map.num_comm_tx() != cfg.comm_tx()) {
        throw std::invalid_argument("combination map does not match the configuration");
    }
    const int width = map.bits();
    const std::size_t words = scheme == SchemeId::SpaCoR ? static_cast<std::size_t>(K) : 1;
    if (spatial_bits.size() < words * static_cast<std::size_t>(width)) {
        throw std::invalid_argument("insufficient spatial bits: need " +
                                    std::to_string(words * static_cast<std::size_t>(width)) +
                                    ", got " + std::to_string(spatial_bits.size()));
    }

    std::vector<ElementSet> radar;
    radar.reserve(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) {
        const std::size_t w = scheme == SchemeId::SpaCoR ? static_cast<std::size_t>(k) : 0;
        const auto word = read_word(spatial_bits, w * static_cast<std::size_t>(width), width);
        radar.push_back(complement(M, map.combination(word)));
    }
    return AllocationPattern(M, std::move(radar));
}

AllocationPattern make_allocation(SchemeId scheme, const CheckedConfig& cfg, Rng& rng)
{
    const int M = cfg.M();
    const int K = cfg.K();
    if (scheme == SchemeId::Full || scheme == SchemeId::Fix1) {
        const CombinationMap unused(2, 1);
        return make_allocation(scheme, cfg, {}, unused);
    }

    // Uniform draw over all radar subsets; rejection-free via index into the
    // lexicographic list.
    const auto all = lexicographic_combinations(M, cfg.radar_tx());
    std::vector<ElementSet> radar;
    radar.reserve(static_cast<std::size_t>(K));
    if (scheme == SchemeId::Fix2) {
        const auto& pick = all[uniform_index(rng, all.size())];
        radar.assign(static_cast<std::size_t>(K), pick);
    } else {
        for (int k = 0; k < K; ++k) {
            radar.push_back(all[uniform_index(rng, all.size())]);
        }
    }
    return AllocationPattern(M, std::move(radar));
}

} // namespace spacor
