// ADO index enumeration with raising/lowering neighbour tables.

#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace heomstark::heom {

inline constexpr std::int32_t kAbsent = -1;

// Number of occupation vectors of length k with sum <= l, i.e. C(k + l, k).
// Saturates at uint64 max.
inline std::uint64_t hierarchy_size(std::size_t k, std::size_t l) {
    unsigned __int128 c = 1;
    for (std::size_t i = 1; i <= l; ++i) {
        c = c * (k + i) / i;  // exact: C(k+i, i) is an integer at every step
        if (c > std::numeric_limits<std::uint64_t>::max()) return std::numeric_limits<std::uint64_t>::max();
    }
    return static_cast<std::uint64_t>(c);
}

struct ADOIndex {
    std::vector<std::uint8_t> occupations;
    int level() const { return std::accumulate(occupations.begin(), occupations.end(), 0); }
};

class Hierarchy {
public:
    static constexpr std::uint64_t kDefaultCap = 4'000'000;

    Hierarchy() = default;

    Hierarchy(std::size_t k_modes, int l_max, std::uint64_t cap = kDefaultCap) : k_(k_modes), l_max_(l_max) {
        if (k_modes < 1) throw std::invalid_argument("build_hierarchy: k_modes must be >= 1");
        if (l_max < 0) throw std::invalid_argument("build_hierarchy: l_max must be >= 0");
        if (l_max > 255) throw std::invalid_argument("build_hierarchy: l_max must be <= 255");
        const auto count = hierarchy_size(k_modes, static_cast<std::size_t>(l_max));
        if (count > cap) {
            throw std::length_error("build_hierarchy: " + std::to_string(count) + " indices for K = " +
                                    std::to_string(k_modes) + ", L = " + std::to_string(l_max) +
                                    " exceeds the cap of " + std::to_string(cap));
        }
        n_ = static_cast<std::size_t>(count);
        enumerate();
        link();
    }

    std::size_t k_modes() const noexcept { return k_; }
    int l_max() const noexcept { return l_max_; }
    std::size_t size() const noexcept { return n_; }

    std::span<const std::uint8_t> occupations(std::size_t i) const {
        return {occ_.data() + i * k_, k_};
    }
    ADOIndex index(std::size_t i) const {
        auto o = occupations(i);
        return {{o.begin(), o.end()}};
    }
    int level(std::size_t i) const { return levels_[i]; }

    // Position of n + e_k / n - e_k, or kAbsent.
    std::int32_t raise(std::size_t i, std::size_t k) const { return up_[i * k_ + k]; }
    std::int32_t lower(std::size_t i, std::size_t k) const { return down_[i * k_ + k]; }

    // Index of an occupation vector, or kAbsent.
    std::int32_t find(std::span<const std::uint8_t> occ) const {
        auto it = lookup_.find(key(occ));
        return it == lookup_.end() ? kAbsent : it->second;
    }

    // Order-sensitive fingerprint of the enumeration (FNV-1a over K, L and all
    // occupations).
    std::uint64_t order_hash() const {
        std::uint64_t h = 1469598103934665603ULL;
        auto mix = [&h](std::uint64_t byte) {
            h ^= byte;
            h *= 1099511628211ULL;
        };
        for (int s = 0; s < 8; ++s) mix((k_ >> (8 * s)) & 0xff);
        mix(static_cast<std::uint64_t>(l_max_));
        for (auto v : occ_) mix(v);
        return h;
    }

    std::vector<std::size_t> indices_at_level(int level) const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < n_; ++i) {
            if (levels_[i] == level) out.push_back(i);
        }
        return out;
    }

private:
    static std::string key(std::span<const std::uint8_t> occ) {
        return {reinterpret_cast<const char*>(occ.data()), occ.size()};
    }

    // Graded order; inside a level, the first mode's occupation descends
    // (K=2: 00, 10, 01, 20, 11, 02).
    void enumerate() {
        occ_.reserve(n_ * k_);
        levels_.reserve(n_);
        std::vector<std::uint8_t> cur(k_, 0);
        for (int level = 0; level <= l_max_; ++level) fill(cur, 0, level, level);
    }

    void fill(std::vector<std::uint8_t>& cur, std::size_t pos, int remaining, int level) {
        if (pos + 1 == k_) {
            cur[pos] = static_cast<std::uint8_t>(remaining);
            occ_.insert(occ_.end(), cur.begin(), cur.end());
            levels_.push_back(level);
            return;
        }
        for (int v = remaining; v >= 0; --v) {
            cur[pos] = static_cast<std::uint8_t>(v);
            fill(cur, pos + 1, remaining - v, level);
        }
        cur[pos] = 0;
    }

    void link() {
        lookup_.reserve(n_);
        for (std::size_t i = 0; i < n_; ++i) lookup_.emplace(key(occupations(i)), static_cast<std::int32_t>(i));
        up_.assign(n_ * k_, kAbsent);
        down_.assign(n_ * k_, kAbsent);
        std::vector<std::uint8_t> probe(k_);
        for (std::size_t i = 0; i < n_; ++i) {
            if (levels_[i] == l_max_) continue;
            auto o = occupations(i);
            std::copy(o.begin(), o.end(), probe.begin());
            for (std::size_t k = 0; k < k_; ++k) {
                ++probe[k];
                const auto j = find(probe);
                --probe[k];
                up_[i * k_ + k] = j;
                down_[static_cast<std::size_t>(j) * k_ + k] = static_cast<std::int32_t>(i);
            }
        }
    }

    std::size_t k_{0};
    int l_max_{0};
    std::size_t n_{0};
    std::vector<std::uint8_t> occ_;
    std::vector<int> levels_;
    std::vector<std::int32_t> up_;
    std::vector<std::int32_t> down_;
    std::unordered_map<std::string, std::int32_t> lookup_;
};

inline Hierarchy build_hierarchy(std::size_t k_modes, int l_max, std::uint64_t cap = Hierarchy::kDefaultCap) {
    return Hierarchy(k_modes, l_max, cap);
}

}  // namespace heomstark::heom
