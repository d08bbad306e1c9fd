#pragma once

#include "hotv/geometry.hpp"
#include "hotv/types.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace hotv {

/// One group of concentric rings: alternating on/off annuli of equal
/// width, drawn from the outer radius inward.
struct ring_group {
    double center_x;     ///< column coordinate of the center, in pixels
    double center_y;     ///< row coordinate of the center, in pixels
    double outer_radius; ///< radius of the outermost ring edge, in pixels
    double thickness;    ///< ring width, equal to the gap width, in pixels
    int ring_count;      ///< number of bright rings
};

/// Binary test image of six concentric-ring groups, ordered from the
/// coarsest (group 1) to the finest (group 6), plus a label mask that
/// marks the filled bounding disk of each group with its group id.
struct ring_phantom {
    int n = 0;
    std::vector<ring_group> groups;
    hotv::image<double> image;        ///< values in {0, 1}
    hotv::image<std::uint8_t> labels; ///< 0 = background, 1..6 = group id
};

/// Builds the deterministic six-group rings phantom on an n-by-n grid.
/// Groups sit on a 3x2 layout; radii and ring widths scale with n/256,
/// with widths stepping down from 8 px to 2 px at n = 256 so the finest
/// group is under-resolved by sparse-angle scans. Requires n >= 128 so
/// the finest rings stay at least one pixel wide.
inline ring_phantom make_ring_phantom(int n) {
    if (n < 128)
        throw std::invalid_argument("make_ring_phantom: n must be >= 128 to host six ring groups");

    const double s = n / 256.0;
    const double row_y[2] = {0.27 * n, 0.73 * n};
    const double col_x[3] = {0.20 * n, 0.50 * n, 0.80 * n};
    const double base_radius[6] = {38, 34, 31, 28, 25, 22};
    const double base_thickness[6] = {8, 6, 5, 4, 3, 2};

    ring_phantom p;
    p.n = n;
    for (int g = 0; g < 6; ++g) {
        ring_group grp;
        grp.center_x = col_x[g % 3];
        grp.center_y = row_y[g / 3];
        grp.outer_radius = base_radius[g] * s;
        grp.thickness = base_thickness[g] * s;
        grp.ring_count = int(std::floor(grp.outer_radius / grp.thickness)) / 2 + 1;
        p.groups.push_back(grp);
    }

    p.image = image<double>(n);
    p.labels = image<std::uint8_t>(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            for (int g = 0; g < 6; ++g) {
                const ring_group& grp = p.groups[g];
                const double d = std::hypot(j - grp.center_x, i - grp.center_y);
                if (d > grp.outer_radius) continue;
                p.labels.data[std::size_t(i) * n + j] = std::uint8_t(g + 1);
                // Band 0 is the outermost ring; even bands are bright.
                const int band = int(std::floor((grp.outer_radius - d) / grp.thickness));
                if (band % 2 == 0) p.image.data[std::size_t(i) * n + j] = 1.0;
                break;
            }
        }
    }
    return p;
}

/// Named scan geometries. `missing_wedge` covers -65 to 65 degrees in
/// 2.5-degree steps (53 angles, a 50-degree blind wedge), `limited_data`
/// spans the half circle coarsely (18 angles, 10-degree steps), and
/// `bn_preset` covers 144 degrees in 2-degree steps (73 angles). The
/// detector count is the caller's image width.
inline acquisition_geometry acquisition_preset(const std::string& name, int detector_count) {
    std::vector<double> angles;
    if (name == "missing_wedge") {
        for (int i = 0; i < 53; ++i) angles.push_back(-65.0 + 2.5 * i);
    } else if (name == "limited_data") {
        for (int i = 0; i < 18; ++i) angles.push_back(-90.0 + 10.0 * i);
    } else if (name == "bn_preset") {
        for (int i = 0; i < 73; ++i) angles.push_back(-72.0 + 2.0 * i);
    } else {
        throw std::invalid_argument("acquisition_preset: unknown preset '" + name + "'");
    }
    return acquisition_geometry(detector_count, std::move(angles));
}

/// Shot-noise model: each projection value v becomes a scaled count
/// Poisson(dose * v) / dose, so dose is the expected count per unit
/// projection value and larger doses mean cleaner data.
struct noise_model {
    double dose = 25.0;
    std::uint64_t seed = 0;
};

/// Applies Poisson counting noise entrywise. Zero entries stay exactly
/// zero, an infinite dose returns the input unchanged, and negative
/// projection values are rejected. Output is reproducible per seed.
inline sinogram<double> add_poisson_noise(const sinogram<double>& b, const noise_model& model) {
    if (!(model.dose > 0.0))
        throw std::invalid_argument("add_poisson_noise: dose must be positive");
    for (double e : b.data)
        if (e < 0.0 || std::isnan(e))
            throw std::invalid_argument("add_poisson_noise: projection values must be >= 0");
    if (std::isinf(model.dose)) return b;

    std::mt19937_64 rng(model.seed);
    sinogram<double> out(b.detector_count, b.angle_count);
    for (std::size_t i = 0; i < b.data.size(); ++i) {
        const double e = b.data[i];
        if (e == 0.0) continue;
        std::poisson_distribution<long long> counts(model.dose * e);
        out.data[i] = double(counts(rng)) / model.dose;
    }
    return out;
}

} // namespace hotv
