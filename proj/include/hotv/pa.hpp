#pragma once

#include "hotv/types.hpp"

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace hotv {

/// Order-k polynomial annihilation transform: the k-th order finite
/// difference with periodic extension at every index.
///
/// The 1-D stencil is c_m = (-1)^{k+m} binom(k, m) for m = 0..k. Order 1
/// is the usual TV difference, order 0 the identity, and order k
/// annihilates samples of any polynomial of degree < k away from the
/// wraparound rows. In 2-D the transform stacks the 1-D stencil applied
/// along x (within each row) on top of the stencil applied along y
/// (within each column), giving 2n^2 outputs for an n-by-n image.
///
/// The periodic rule is used on all rows, which keeps the operator square
/// and makes the adjoint a circular correlation with the same stencil.
struct pa_transform {
    static constexpr int max_order = 6;

    int order;

    explicit pa_transform(int k) : order(k), coeffs_(stencil(k)) {
        if (k > max_order)
            throw std::invalid_argument("pa_transform: order exceeds max_order");
    }

    /// Stencil coefficients [(-1)^{k+m} binom(k, m)]_{m=0..k}.
    static std::vector<double> stencil(int k) {
        if (k < 0) throw std::invalid_argument("pa_transform: order must be >= 0");
        std::vector<double> c(std::size_t(k) + 1, 0.0);
        // Pascal recurrence keeps the coefficients exact.
        c[0] = 1.0;
        for (int row = 1; row <= k; ++row)
            for (int m = row; m >= 1; --m) c[std::size_t(m)] += c[std::size_t(m) - 1];
        for (int m = 0; m <= k; ++m)
            if ((k + m) % 2 != 0) c[std::size_t(m)] = -c[std::size_t(m)];
        return c;
    }

    /// l1 operator norm of the 1-D transform: sum_m |c_m| = 2^k.
    static double operator_l1_norm(int k) {
        if (k < 0) throw std::invalid_argument("pa_transform: order must be >= 0");
        return std::ldexp(1.0, k);
    }

    const std::vector<double>& coefficients() const { return coeffs_; }

    /// (T_k f)_j = sum_m c_m f_{(j+m) mod N}.
    template <typename T>
    std::vector<T> apply_1d(const std::vector<T>& f) const {
        const std::size_t n = f.size();
        if (n < std::size_t(order) + 1)
            throw std::invalid_argument("pa_transform: input shorter than stencil");
        std::vector<T> out(n);
        for (std::size_t j = 0; j < n; ++j) {
            T acc = T(0);
            for (int m = 0; m <= order; ++m) {
                std::size_t idx = j + std::size_t(m);
                if (idx >= n) idx -= n;
                acc += T(coeffs_[std::size_t(m)]) * f[idx];
            }
            out[j] = acc;
        }
        return out;
    }

    /// Adjoint of apply_1d: circular correlation with the same stencil.
    template <typename T>
    std::vector<T> apply_adjoint_1d(const std::vector<T>& g) const {
        const std::size_t n = g.size();
        if (n < std::size_t(order) + 1)
            throw std::invalid_argument("pa_transform: input shorter than stencil");
        std::vector<T> out(n);
        for (std::size_t j = 0; j < n; ++j) {
            T acc = T(0);
            for (int m = 0; m <= order; ++m) {
                std::size_t idx = j + n - std::size_t(m);
                if (idx >= n) idx -= n;
                acc += T(coeffs_[std::size_t(m)]) * g[idx];
            }
            out[j] = acc;
        }
        return out;
    }

    /// Stacked 2-D transform on a flat row-major n-by-n image. The first
    /// n^2 outputs are the differences along x, the second n^2 along y.
    template <typename T>
    std::vector<T> apply_2d(const std::vector<T>& f, int n) const {
        check_2d_size(f.size(), n);
        const std::size_t nn = std::size_t(n) * n;
        std::vector<T> out(2 * nn);
        for (int i = 0; i < n; ++i) {
            const std::size_t row = std::size_t(i) * n;
            for (int j = 0; j < n; ++j) {
                T ax = T(0), ay = T(0);
                for (int m = 0; m <= order; ++m) {
                    int jm = j + m;
                    if (jm >= n) jm -= n;
                    int im = i + m;
                    if (im >= n) im -= n;
                    const T c = T(coeffs_[std::size_t(m)]);
                    ax += c * f[row + std::size_t(jm)];
                    ay += c * f[std::size_t(im) * n + std::size_t(j)];
                }
                out[row + std::size_t(j)] = ax;
                out[nn + row + std::size_t(j)] = ay;
            }
        }
        return out;
    }

    template <typename T>
    std::vector<T> apply_2d(const image<T>& f) const {
        return apply_2d(f.data, f.n);
    }

    /// Adjoint of apply_2d on a flat stacked pair of length 2n^2.
    template <typename T>
    std::vector<T> apply_adjoint_2d_flat(const std::vector<T>& g, int n) const {
        check_2d_size(g.size() / 2, n);
        if (g.size() % 2 != 0)
            throw std::invalid_argument("pa_transform: stacked input must have 2*n*n entries");
        const std::size_t nn = std::size_t(n) * n;
        std::vector<T> out(nn);
        for (int i = 0; i < n; ++i) {
            const std::size_t row = std::size_t(i) * n;
            for (int j = 0; j < n; ++j) {
                T acc = T(0);
                for (int m = 0; m <= order; ++m) {
                    int jm = j - m;
                    if (jm < 0) jm += n;
                    int im = i - m;
                    if (im < 0) im += n;
                    const T c = T(coeffs_[std::size_t(m)]);
                    acc += c * g[row + std::size_t(jm)];
                    acc += c * g[nn + std::size_t(im) * n + std::size_t(j)];
                }
                out[row + std::size_t(j)] = acc;
            }
        }
        return out;
    }

    template <typename T>
    image<T> apply_adjoint_2d(const std::vector<T>& g) const {
        const int n = side_from_stacked(g.size());
        return image<T>(n, apply_adjoint_2d_flat(g, n));
    }

  private:
    std::vector<double> coeffs_;

    void check_2d_size(std::size_t cells, int n) const {
        if (n < order + 1)
            throw std::invalid_argument("pa_transform: image smaller than stencil");
        if (cells != std::size_t(n) * std::size_t(n))
            throw std::invalid_argument("pa_transform: image size does not match n*n");
    }

    static int side_from_stacked(std::size_t stacked_size) {
        const std::size_t nn = stacked_size / 2;
        const int n = int(std::llround(std::sqrt(double(nn))));
        if (stacked_size % 2 != 0 || std::size_t(n) * std::size_t(n) != nn)
            throw std::invalid_argument("pa_transform: stacked input must have 2*n*n entries");
        return n;
    }
};

} // namespace hotv
