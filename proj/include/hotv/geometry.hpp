#pragma once

#include <stdexcept>
#include <utility>
#include <vector>

namespace hotv {

/// Parallel-beam acquisition: one ray per detector bin at every angle.
///
/// Detector bins have unit spacing (one bin per pixel width) and are
/// centered like pixel columns, so bin t sits at offset t - (N-1)/2.
/// Angles are given in degrees and must be strictly increasing within
/// [-90, 90).
struct acquisition_geometry {
    int detector_count;
    std::vector<double> angles_deg;

    acquisition_geometry(int detectors, std::vector<double> angles)
        : detector_count(detectors), angles_deg(std::move(angles)) {
        if (detector_count < 1)
            throw std::invalid_argument("acquisition_geometry: detector_count must be >= 1");
        if (angles_deg.empty())
            throw std::invalid_argument("acquisition_geometry: angle list is empty");
        for (std::size_t l = 0; l < angles_deg.size(); ++l) {
            if (!(angles_deg[l] >= -90.0 && angles_deg[l] < 90.0))
                throw std::invalid_argument("acquisition_geometry: angles must lie in [-90, 90)");
            if (l > 0 && !(angles_deg[l] > angles_deg[l - 1]))
                throw std::invalid_argument("acquisition_geometry: angles must be strictly increasing");
        }
    }

    int angle_count() const { return int(angles_deg.size()); }
    std::size_t ray_count() const { return std::size_t(detector_count) * angles_deg.size(); }
    double detector_offset(int t) const { return t - (detector_count - 1) / 2.0; }
};

} // namespace hotv
