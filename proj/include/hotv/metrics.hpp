#pragma once

#include "hotv/phantom.hpp"
#include "hotv/solvers.hpp"
#include "hotv/types.hpp"

#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <utility>

namespace hotv {

/// Relative l2 errors of one reconstruction against a reference:
/// one global figure plus one per labeled region.
struct error_report {
    double global_error = 0.0;
    std::map<int, double> region_errors; ///< keyed by label id (1..6)
    bool segmented = false;
    int order = -1;      ///< regularizer order of the reconstruction
    double lambda = 0.0; ///< fidelity weight of the reconstruction
};

/// ||f - ref||_2 / ||ref||_2 over the whole image.
inline double relative_l2(const image<double>& f, const image<double>& ref) {
    if (f.n != ref.n) throw std::invalid_argument("relative_l2: image sizes differ");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < f.data.size(); ++i) {
        const double d = f.data[i] - ref.data[i];
        num += d * d;
        den += ref.data[i] * ref.data[i];
    }
    if (!(den > 0.0)) throw std::invalid_argument("relative_l2: reference has zero norm");
    return std::sqrt(num / den);
}

/// Same ratio restricted to the pixels whose label equals `region`.
inline double relative_l2(const image<double>& f, const image<double>& ref,
                          const image<std::uint8_t>& labels, int region) {
    if (f.n != ref.n || f.n != labels.n)
        throw std::invalid_argument("relative_l2: image sizes differ");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < f.data.size(); ++i) {
        if (labels.data[i] != region) continue;
        const double d = f.data[i] - ref.data[i];
        num += d * d;
        den += ref.data[i] * ref.data[i];
    }
    if (!(den > 0.0))
        throw std::invalid_argument("relative_l2: reference has zero norm on the region");
    return std::sqrt(num / den);
}

/// Binarizes an image: 1 where f >= threshold, else 0.
inline image<double> segment_threshold(const image<double>& f, double threshold) {
    if (!std::isfinite(threshold))
        throw std::invalid_argument("segment_threshold: threshold must be finite");
    image<double> out(f.n);
    for (std::size_t i = 0; i < f.data.size(); ++i)
        out.data[i] = f.data[i] >= threshold ? 1.0 : 0.0;
    return out;
}

/// Scores a reconstruction against the rings phantom, before and after
/// threshold segmentation. Each report carries the global error plus
/// the error over every labeled group disk.
inline std::pair<error_report, error_report>
evaluate(const recon_result& result, const ring_phantom& phantom, double threshold = 0.5) {
    if (result.image.n != phantom.n)
        throw std::invalid_argument("evaluate: reconstruction does not match the phantom grid");

    std::set<int> region_ids;
    for (std::uint8_t l : phantom.labels.data)
        if (l != 0) region_ids.insert(l);

    const auto score = [&](const image<double>& f, bool segmented) {
        error_report rep;
        rep.segmented = segmented;
        rep.order = result.order;
        rep.lambda = result.lambda;
        rep.global_error = relative_l2(f, phantom.image);
        for (int g : region_ids)
            rep.region_errors[g] = relative_l2(f, phantom.image, phantom.labels, g);
        return rep;
    };

    return {score(result.image, false),
            score(segment_threshold(result.image, threshold), true)};
}

} // namespace hotv
