#pragma once

#include "hotv/pa.hpp"
#include "hotv/radon.hpp"
#include "hotv/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace hotv {

/// Settings shared by the regularized solvers. The effective fidelity
/// weight is lambda = 2^{order-1} * lambda1 unless lambda_override is
/// set; lambda1 is calibrated for the order-1 (total variation) problem
/// on unit-spectral-norm data.
struct solver_config {
    int order = 1;                ///< finite-difference order of the regularizer
    double lambda1 = 70.0;        ///< base fidelity weight, ideal for order 1
    double lambda_override = 0.0; ///< if > 0, used verbatim instead of the rule
    double beta = 32.0;           ///< augmented-Lagrangian penalty
    int max_outer = 100;          ///< outer (splitting) iteration cap
    int max_inner = 10;           ///< gradient steps per f-subproblem
    double tol = 1e-4;            ///< relative-change stopping threshold
    bool nonneg = true;           ///< project iterates onto f >= 0
    unsigned seed = 0;            ///< experiment seed, recorded with outputs
};

/// Solver output: the reconstruction plus per-iteration traces. For the
/// splitting solver objective_trace holds lambda/2 ||Wf-b||^2 + ||Tf||_1
/// and primal_residual_trace holds ||Tf - u||_2, one entry per outer
/// iteration. For SIRT objective_trace holds ||b - Wf||_2 at the iterate
/// entering each update and primal_residual_trace is empty.
struct recon_result {
    hotv::image<double> image;
    std::vector<double> objective_trace;
    std::vector<double> primal_residual_trace;
    int iterations = 0;
    bool converged = false;
    int order = -1;      ///< regularizer order, -1 for the unregularized baseline
    double lambda = 0.0; ///< fidelity weight actually used (0 for SIRT)
};

/// Fidelity weight for order k: 2^{k-1} * lambda1. Doubling per order
/// offsets the regularizer's growing 1-norm, so one calibrated lambda1
/// serves every order.
inline double select_lambda(int k, double lambda1) {
    if (k < 0) throw std::invalid_argument("select_lambda: order must be >= 0");
    if (!(lambda1 > 0.0)) throw std::invalid_argument("select_lambda: lambda1 must be positive");
    return std::ldexp(lambda1, k - 1);
}

/// Soft threshold: the minimizer of tau*|u| + (u - v)^2 / 2.
inline double shrink(double v, double tau) {
    const double m = std::abs(v) - tau;
    return m > 0.0 ? (v < 0.0 ? -m : m) : 0.0;
}

inline std::vector<double> shrink(std::vector<double> v, double tau) {
    for (auto& e : v) e = shrink(e, tau);
    return v;
}

namespace detail {

/// Regularizer used inside the solver: identity for order 0, the
/// stacked two-directional difference transform for order >= 1.
struct regularizer {
    pa_transform t;
    int n;
    bool is_identity;

    regularizer(int order, int n_) : t(std::max(order, 1)), n(n_), is_identity(order == 0) {}

    std::size_t rows() const {
        return is_identity ? std::size_t(n) * n : 2 * std::size_t(n) * n;
    }
    std::vector<double> apply(const std::vector<double>& f) const {
        return is_identity ? f : t.apply_2d(f, n);
    }
    std::vector<double> apply_adjoint(const std::vector<double>& g) const {
        return is_identity ? g : t.apply_adjoint_2d_flat(g, n);
    }
};

inline int square_side(std::size_t cells, const char* who) {
    const int n = int(std::lround(std::sqrt(double(cells))));
    if (n < 1 || std::size_t(n) * n != cells)
        throw std::invalid_argument(std::string(who) + ": operator domain is not a square image");
    return n;
}

inline void check_finite(const std::vector<double>& b, const char* who) {
    for (double e : b)
        if (!std::isfinite(e)) throw std::invalid_argument(std::string(who) + ": data must be finite");
}

inline void check_config(const solver_config& cfg) {
    if (cfg.order < 0 || cfg.order > pa_transform::max_order)
        throw std::invalid_argument("solver_config: unsupported order");
    if (!(cfg.lambda1 > 0.0)) throw std::invalid_argument("solver_config: lambda1 must be positive");
    if (!(cfg.beta > 0.0)) throw std::invalid_argument("solver_config: beta must be positive");
    if (!(cfg.tol > 0.0)) throw std::invalid_argument("solver_config: tol must be positive");
    if (cfg.max_outer < 1 || cfg.max_inner < 1)
        throw std::invalid_argument("solver_config: iteration caps must be >= 1");
}

} // namespace detail

/// Reconstructs f from b by approximately minimizing
///
///   lambda/2 ||Wf - b||^2 + ||T f||_1     (optionally subject to f >= 0)
///
/// with an augmented-Lagrangian splitting u = T f. Each outer iteration
/// soft-thresholds u, runs a few projected Barzilai-Borwein gradient
/// steps on the smooth f-subproblem, and updates the multiplier. The
/// data should be rescaled so that ||W||_2 is about 1 before calling;
/// lambda1 is calibrated for that scaling. Runs until the relative
/// iterate change drops below cfg.tol or cfg.max_outer is reached, and
/// reports the latter as converged = false rather than an error.
template <linear_operator Op>
recon_result reconstruct_admm(const Op& op, const std::vector<double>& b,
                              const solver_config& cfg) {
    static_assert(std::is_same_v<typename Op::value_type, double>,
                  "reconstruct_admm expects a double-precision operator");
    detail::check_config(cfg);
    detail::check_finite(b, "reconstruct_admm");
    if (b.size() != op.rows())
        throw std::invalid_argument("reconstruct_admm: data size mismatch");

    const int n = detail::square_side(op.cols(), "reconstruct_admm");
    const detail::regularizer T(cfg.order, n);
    const double lambda =
        cfg.lambda_override > 0.0 ? cfg.lambda_override : select_lambda(cfg.order, cfg.lambda1);
    const double beta = cfg.beta;

    const auto project = [&](std::vector<double>& f) {
        if (cfg.nonneg)
            for (auto& e : f) e = std::max(e, 0.0);
    };

    // Backprojection start; keep wr = Wf - b and tf = T f current with f.
    std::vector<double> f = op.apply_adjoint(b);
    std::vector<double> tf = T.apply(f);
    std::vector<double> wr = op.apply(f);
    for (std::size_t i = 0; i < wr.size(); ++i) wr[i] -= b[i];

    std::vector<double> u = tf;
    std::vector<double> y(T.rows(), 0.0);

    recon_result out;
    out.order = cfg.order;
    out.lambda = lambda;

    std::vector<double> d(T.rows()), g, f_prev, g_prev;

    for (int outer = 1; outer <= cfg.max_outer; ++outer) {
        // u-step: soft-threshold the shifted transform values.
        for (std::size_t i = 0; i < u.size(); ++i) u[i] = shrink(tf[i] + y[i] / beta, 1.0 / beta);
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = u[i] - y[i] / beta;

        const std::vector<double> f_old = f;

        // f-step: projected gradient descent on the smooth quadratic
        // lambda/2 ||Wf - b||^2 + beta/2 ||T f - d||^2. The first step
        // length is the exact minimizer along the gradient; later steps
        // use the Barzilai-Borwein ratio <s,s>/<s,dg>.
        auto gradient = [&] {
            std::vector<double> grad = op.apply_adjoint(wr);
            std::vector<double> td = tf;
            for (std::size_t i = 0; i < td.size(); ++i) td[i] -= d[i];
            const std::vector<double> tt = T.apply_adjoint(td);
            for (std::size_t i = 0; i < grad.size(); ++i) grad[i] = lambda * grad[i] + beta * tt[i];
            return grad;
        };
        g = gradient();
        double alpha = 0.0;
        for (int inner = 1; inner <= cfg.max_inner; ++inner) {
            const double gg = dot(g, g);
            if (!(gg > 0.0)) break;
            if (inner == 1) {
                const std::vector<double> wg = op.apply(g);
                const std::vector<double> tg = T.apply(g);
                const double curv = lambda * dot(wg, wg) + beta * dot(tg, tg);
                if (!(curv > 0.0)) break;
                alpha = gg / curv;
            } else {
                std::vector<double> s = f, dg = g;
                for (std::size_t i = 0; i < s.size(); ++i) s[i] -= f_prev[i];
                for (std::size_t i = 0; i < dg.size(); ++i) dg[i] -= g_prev[i];
                const double ss = dot(s, s);
                if (!(ss > 0.0)) break; // projection pinned the iterate
                const double sd = dot(s, dg);
                if (sd > 0.0) alpha = ss / sd;
                // otherwise keep the previous step length
            }
            f_prev = f;
            g_prev = g;
            for (std::size_t i = 0; i < f.size(); ++i) f[i] -= alpha * g[i];
            project(f);
            wr = op.apply(f);
            for (std::size_t i = 0; i < wr.size(); ++i) wr[i] -= b[i];
            tf = T.apply(f);
            if (inner < cfg.max_inner) g = gradient();
        }

        // Multiplier step and traces at the updated iterate.
        double pres2 = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            const double r = tf[i] - u[i];
            y[i] += beta * r;
            pres2 += r * r;
        }
        double l1 = 0.0;
        for (double e : tf) l1 += std::abs(e);
        out.objective_trace.push_back(0.5 * lambda * dot(wr, wr) + l1);
        out.primal_residual_trace.push_back(std::sqrt(pres2));
        out.iterations = outer;

        double diff2 = 0.0, base2 = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) {
            const double e = f[i] - f_old[i];
            diff2 += e * e;
            base2 += f_old[i] * f_old[i];
        }
        const bool stalled =
            base2 > 0.0 ? std::sqrt(diff2) < cfg.tol * std::sqrt(base2) : diff2 == 0.0;
        if (stalled) {
            out.converged = true;
            break;
        }
    }

    out.image = image<double>(n, std::move(f));
    return out;
}

inline recon_result reconstruct_admm(const radon_operator<double>& op, const sinogram<double>& b,
                                     const solver_config& cfg) {
    if (b.detector_count != op.geometry.detector_count || b.angle_count != op.geometry.angle_count())
        throw std::invalid_argument("reconstruct_admm: sinogram does not match the geometry");
    return reconstruct_admm<radon_operator<double>>(op, b.data, cfg);
}

/// Simultaneous iterative reconstruction (SIRT): the classic
/// row/column-normalized Landweber scheme
///
///   f <- f + C W^T R (b - Wf)
///
/// with R and C the inverse row and column sums of the weights (zero
/// sums get weight zero, so rays that miss the grid are ignored).
/// Optionally clamps to f >= 0 after each update. `init` seeds the
/// iteration; a null init starts from zero.
template <linear_operator Op>
recon_result reconstruct_sirt(const Op& op, const std::vector<double>& b, int iters, bool nonneg,
                              const std::vector<double>* init = nullptr) {
    static_assert(std::is_same_v<typename Op::value_type, double>,
                  "reconstruct_sirt expects a double-precision operator");
    if (iters < 1) throw std::invalid_argument("reconstruct_sirt: iters must be >= 1");
    detail::check_finite(b, "reconstruct_sirt");
    if (b.size() != op.rows())
        throw std::invalid_argument("reconstruct_sirt: data size mismatch");
    if (init && init->size() != op.cols())
        throw std::invalid_argument("reconstruct_sirt: init size mismatch");

    const int n = detail::square_side(op.cols(), "reconstruct_sirt");

    std::vector<double> row_weight = op.apply(std::vector<double>(op.cols(), 1.0));
    std::vector<double> col_weight = op.apply_adjoint(std::vector<double>(op.rows(), 1.0));
    for (auto& e : row_weight) e = e > 0.0 ? 1.0 / e : 0.0;
    for (auto& e : col_weight) e = e > 0.0 ? 1.0 / e : 0.0;

    std::vector<double> f = init ? *init : std::vector<double>(op.cols(), 0.0);

    recon_result out;
    for (int it = 1; it <= iters; ++it) {
        std::vector<double> r = op.apply(f);
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
        out.objective_trace.push_back(norm2(r));
        for (std::size_t i = 0; i < r.size(); ++i) r[i] *= row_weight[i];
        const std::vector<double> step = op.apply_adjoint(r);
        for (std::size_t i = 0; i < f.size(); ++i) {
            f[i] += col_weight[i] * step[i];
            if (nonneg && f[i] < 0.0) f[i] = 0.0;
        }
    }
    out.iterations = iters;
    out.converged = true;
    out.image = image<double>(n, std::move(f));
    return out;
}

inline recon_result reconstruct_sirt(const radon_operator<double>& op, const sinogram<double>& b,
                                     int iters, bool nonneg, const image<double>* init = nullptr) {
    if (b.detector_count != op.geometry.detector_count || b.angle_count != op.geometry.angle_count())
        throw std::invalid_argument("reconstruct_sirt: sinogram does not match the geometry");
    return reconstruct_sirt<radon_operator<double>>(op, b.data, iters, nonneg,
                                                    init ? &init->data : nullptr);
}

} // namespace hotv
