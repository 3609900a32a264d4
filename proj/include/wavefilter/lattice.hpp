#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

#include "wavefilter/vec2.hpp"

namespace wavefilter {

// Wavenumber k = (k1, k2) on the integer lattice.
struct Mode {
    int k1 = 0;
    int k2 = 0;

    bool operator==(const Mode&) const = default;
};

inline Mode operator-(Mode k) { return {-k.k1, -k.k2}; }
inline double dot(Mode k, Vec2 v) { return k.k1 * v.x + k.k2 * v.y; }
inline int abs_sq(Mode k) { return k.k1 * k.k1 + k.k2 * k.k2; }

// Symmetric truncation {k : |k1|,|k2| <= max_mode} of the full wavenumber
// lattice, paired with the physical grid of grid_size^2 points the fields are
// observed on. grid_size >= 2*max_mode + 1 keeps the retained modes alias-free
// on that grid.
class WavenumberLattice {
public:
    WavenumberLattice(int max_mode, int grid_size)
        : max_mode_(max_mode), grid_size_(grid_size) {
        if (max_mode < 1)
            throw std::invalid_argument("WavenumberLattice: max_mode must be >= 1");
        if (grid_size < 2 * max_mode + 1)
            throw std::invalid_argument(
                "WavenumberLattice: grid_size " + std::to_string(grid_size) +
                " aliases modes; need >= " + std::to_string(2 * max_mode + 1));
    }

    int max_mode() const { return max_mode_; }
    int grid_size() const { return grid_size_; }

    // Modes per axis and total mode count of the truncation.
    int side() const { return 2 * max_mode_ + 1; }
    std::size_t size() const { return static_cast<std::size_t>(side()) * side(); }

    bool contains(Mode k) const {
        return k.k1 >= -max_mode_ && k.k1 <= max_mode_ && k.k2 >= -max_mode_ &&
               k.k2 <= max_mode_;
    }

    // Row-major storage index over (k1 + m, k2 + m).
    std::size_t index(Mode k) const {
        if (!contains(k)) throw std::out_of_range("WavenumberLattice: mode outside lattice");
        return static_cast<std::size_t>(k.k1 + max_mode_) * side() + (k.k2 + max_mode_);
    }

    Mode mode(std::size_t idx) const {
        const int s = side();
        return {static_cast<int>(idx) / s - max_mode_,
                static_cast<int>(idx) % s - max_mode_};
    }

    std::size_t conjugate_index(std::size_t idx) const { return size() - 1 - idx; }

    // One representative per conjugate pair {k, -k}; k = 0 is its own pair.
    static bool is_representative(Mode k) {
        return k.k1 > 0 || (k.k1 == 0 && k.k2 >= 0);
    }

    bool operator==(const WavenumberLattice&) const = default;

private:
    int max_mode_;
    int grid_size_;
};

}  // namespace wavefilter
