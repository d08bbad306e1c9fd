#pragma once

#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace hotv {

/// Square n-by-n pixel grid with unit pixels centered on the origin.
///
/// Pixel (i, j) has its center at (j - (n-1)/2, (n-1)/2 - i), so row 0 is
/// the top of the image and the image domain is [-n/2, n/2]^2.
struct image_grid {
    int n;

    explicit image_grid(int n_) : n(n_) {
        if (n < 2) throw std::invalid_argument("image_grid: n must be >= 2");
    }

    double pixel_x(int j) const { return j - (n - 1) / 2.0; }
    double pixel_y(int i) const { return (n - 1) / 2.0 - i; }
    double half_extent() const { return n / 2.0; }
    std::size_t cells() const { return std::size_t(n) * std::size_t(n); }
};

/// Row-major n-by-n pixel array.
template <typename T>
struct image {
    int n = 0;
    std::vector<T> data;

    image() = default;
    explicit image(int n_, T fill = T(0))
        : n(n_), data(std::size_t(n_) * std::size_t(n_), fill) {}
    image(int n_, std::vector<T> values) : n(n_), data(std::move(values)) {
        if (data.size() != std::size_t(n) * std::size_t(n))
            throw std::invalid_argument("image: data size does not match n*n");
    }

    T& operator()(int i, int j) { return data[std::size_t(i) * n + j]; }
    const T& operator()(int i, int j) const { return data[std::size_t(i) * n + j]; }
    std::size_t size() const { return data.size(); }
};

/// Detector-by-angle array of projection values, stored detector-fastest:
/// entry (t, l) lives at data[l * detector_count + t].
template <typename T>
struct sinogram {
    int detector_count = 0;
    int angle_count = 0;
    std::vector<T> data;

    sinogram() = default;
    sinogram(int detectors, int angles, T fill = T(0))
        : detector_count(detectors), angle_count(angles),
          data(std::size_t(detectors) * std::size_t(angles), fill) {}
    sinogram(int detectors, int angles, std::vector<T> values)
        : detector_count(detectors), angle_count(angles), data(std::move(values)) {
        if (data.size() != std::size_t(detectors) * std::size_t(angles))
            throw std::invalid_argument("sinogram: data size does not match layout");
    }

    T& operator()(int t, int l) { return data[std::size_t(l) * detector_count + t]; }
    const T& operator()(int t, int l) const { return data[std::size_t(l) * detector_count + t]; }
    std::size_t size() const { return data.size(); }
};

template <typename T>
T dot(const std::vector<T>& a, const std::vector<T>& b) {
    T s = T(0);
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

template <typename T>
T norm2(const std::vector<T>& a) {
    return std::sqrt(dot(a, a));
}

/// Rectangular linear map together with its adjoint. Satisfied by
/// radon_operator and by the small test doubles in the unit tests.
template <typename Op>
concept linear_operator =
    requires(const Op& op, const std::vector<typename Op::value_type>& v) {
        typename Op::value_type;
        { op.rows() } -> std::convertible_to<std::size_t>;
        { op.cols() } -> std::convertible_to<std::size_t>;
        { op.apply(v) } -> std::same_as<std::vector<typename Op::value_type>>;
        { op.apply_adjoint(v) } -> std::same_as<std::vector<typename Op::value_type>>;
    };

} // namespace hotv
