#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "tln/tensor.hpp"

namespace tln {

/// Position-major flattening: (i, j) -> i*F + j.
inline std::vector<real> flatten_window(const SequenceTensor& x) {
    return std::vector<real>(x.data().begin(), x.data().end());
}

inline SequenceTensor unflatten_window(std::span<const real> flat, std::size_t rows,
                                       std::size_t cols) {
    return SequenceTensor(rows, cols, std::vector<real>(flat.begin(), flat.end()));
}

enum class PenaltyKind { none, ridge, lasso, elasticnet };

struct Regularization {
    PenaltyKind kind = PenaltyKind::none;
    real alpha = 0;
    real l1_ratio = 1;
};

/// Flattened windows as a dense regression problem. Columns are always
/// centered inside the fitters; column_scales are 1 unless standardization
/// was requested, in which case coefficients are mapped back to the raw
/// columns on output.
struct FlatRegressionProblem {
    SequenceTensor design;  // N x P
    SequenceTensor targets; // N x K
    std::vector<real> column_means;
    std::vector<real> column_scales;
};

inline FlatRegressionProblem make_problem(SequenceTensor design, SequenceTensor targets,
                                          bool standardize = false) {
    if (design.rows() != targets.rows()) {
        throw shape_error("make_problem: design has " + std::to_string(design.rows()) +
                          " rows, targets " + std::to_string(targets.rows()));
    }
    const std::size_t n = design.rows(), p = design.cols();
    std::vector<real> means(p, 0), scales(p, 1);
    for (std::size_t j = 0; j < p; ++j) {
        real m = 0;
        for (std::size_t i = 0; i < n; ++i) m += design(i, j);
        means[j] = m / real(n);
    }
    if (standardize) {
        for (std::size_t j = 0; j < p; ++j) {
            real ss = 0;
            for (std::size_t i = 0; i < n; ++i) {
                const real d = design(i, j) - means[j];
                ss += d * d;
            }
            const real sd = std::sqrt(ss / real(n));
            scales[j] = sd > real(0) ? sd : real(1);
        }
    }
    return FlatRegressionProblem{std::move(design), std::move(targets), std::move(means),
                                 std::move(scales)};
}

struct FlatLinearModel {
    SequenceTensor weights;      // P x K
    std::vector<real> intercept; // K
    Regularization regularization;
    bool converged = true;   // coordinate-descent metadata; closed forms always true
    std::size_t sweeps = 0;
};

inline std::size_t param_count(const FlatLinearModel& m) {
    return m.weights.size() + m.intercept.size();
}

inline std::vector<real> predict_flat(const FlatLinearModel& m, std::span<const real> x_flat) {
    if (x_flat.size() != m.weights.rows()) {
        throw shape_error("predict_flat: input length " + std::to_string(x_flat.size()) +
                          " does not match " + std::to_string(m.weights.rows()) + " weights");
    }
    std::vector<real> y(m.intercept);
    for (std::size_t j = 0; j < x_flat.size(); ++j) {
        const real v = x_flat[j];
        for (std::size_t k = 0; k < y.size(); ++k) y[k] += m.weights(j, k) * v;
    }
    return y;
}

namespace detail {

// Dense column-major workspace for the least-squares solver.
struct LstsqResult {
    std::vector<real> solution; // column-major P x K
    std::size_t rank = 0;
};

// Minimum-norm least squares min ||A w - y|| via Householder QR with column
// pivoting; rank-deficient systems fall back to a complete orthogonal
// decomposition, so the returned w has minimal Euclidean norm among the
// minimizers. a and y are column-major (a[j*n + i]) and consumed in place.
inline LstsqResult lstsq_min_norm(std::size_t n, std::size_t p, std::vector<real> a,
                                  std::size_t nk, std::vector<real> y) {
    std::vector<std::size_t> jpvt(p);
    std::iota(jpvt.begin(), jpvt.end(), std::size_t{0});
    const std::size_t steps = std::min(n, p);
    std::vector<real> v(n);

    auto apply_reflector = [&](std::size_t s, real tau, real* col) {
        real dot = 0;
        for (std::size_t i = s; i < n; ++i) dot += v[i] * col[i];
        dot *= tau;
        for (std::size_t i = s; i < n; ++i) col[i] -= dot * v[i];
    };

    std::size_t rank = 0;
    real r00 = 0;
    for (std::size_t s = 0; s < steps; ++s) {
        // pivot: remaining column with the largest trailing norm
        std::size_t best = s;
        real best_ss = -1;
        for (std::size_t j = s; j < p; ++j) {
            real ss = 0;
            for (std::size_t i = s; i < n; ++i) ss += a[j * n + i] * a[j * n + i];
            if (ss > best_ss) {
                best_ss = ss;
                best = j;
            }
        }
        if (best != s) {
            for (std::size_t i = 0; i < n; ++i) std::swap(a[s * n + i], a[best * n + i]);
            std::swap(jpvt[s], jpvt[best]);
        }
        const real norm_x = std::sqrt(best_ss);
        if (s == 0) r00 = norm_x;
        const real tol = real(std::max(n, p)) * std::numeric_limits<real>::epsilon() * r00;
        if (norm_x <= tol) break;
        rank = s + 1;

        // Householder reflector zeroing column s below the diagonal
        const real pivot = a[s * n + s];
        const real alpha = pivot > 0 ? -norm_x : norm_x;
        const real v0 = pivot - alpha;
        for (std::size_t i = 0; i < s; ++i) v[i] = 0;
        v[s] = v0;
        for (std::size_t i = s + 1; i < n; ++i) v[i] = a[s * n + i];
        real vv = 0;
        for (std::size_t i = s; i < n; ++i) vv += v[i] * v[i];
        const real tau = vv > 0 ? real(2) / vv : real(0);

        a[s * n + s] = alpha;
        for (std::size_t i = s + 1; i < n; ++i) a[s * n + i] = 0;
        for (std::size_t j = s + 1; j < p; ++j) apply_reflector(s, tau, &a[j * n]);
        for (std::size_t k = 0; k < nk; ++k) apply_reflector(s, tau, &y[k * n]);
    }

    std::vector<real> w(p * nk, 0); // w[k*p + j], permuted space for now
    if (rank == p) {
        for (std::size_t k = 0; k < nk; ++k) {
            real* wk = &w[k * p];
            const real* yk = &y[k * n];
            for (std::size_t s = p; s-- > 0;) {
                real acc = yk[s];
                for (std::size_t j = s + 1; j < p; ++j) acc -= a[j * n + s] * wk[j];
                wk[s] = acc / a[s * n + s];
            }
        }
    } else if (rank > 0) {
        // complete orthogonal decomposition: QR of the transposed leading
        // rank rows R(0:r, 0:p), then w = Q2 * solve(R2', c)
        const std::size_t r = rank;
        std::vector<real> m(p * r); // column-major p x r copy of R(0:r, 0:p) transposed
        for (std::size_t c = 0; c < r; ++c) {
            for (std::size_t i = 0; i < p; ++i) {
                m[c * p + i] = i >= c ? a[i * n + c] : 0;
            }
        }
        std::vector<real> v2(p);
        std::vector<real> tau2(r, 0);
        std::vector<real> hv(r * p, 0); // stored reflectors
        for (std::size_t s = 0; s < r; ++s) {
            real ss = 0;
            for (std::size_t i = s; i < p; ++i) ss += m[s * p + i] * m[s * p + i];
            const real norm_x = std::sqrt(ss);
            if (norm_x == 0) continue;
            const real pivot = m[s * p + s];
            const real alpha = pivot > 0 ? -norm_x : norm_x;
            for (std::size_t i = 0; i < s; ++i) v2[i] = 0;
            v2[s] = pivot - alpha;
            for (std::size_t i = s + 1; i < p; ++i) v2[i] = m[s * p + i];
            real vv = 0;
            for (std::size_t i = s; i < p; ++i) vv += v2[i] * v2[i];
            const real tau = vv > 0 ? real(2) / vv : real(0);
            m[s * p + s] = alpha;
            for (std::size_t i = s + 1; i < p; ++i) m[s * p + i] = 0;
            for (std::size_t c = s + 1; c < r; ++c) {
                real dot = 0;
                for (std::size_t i = s; i < p; ++i) dot += v2[i] * m[c * p + i];
                dot *= tau;
                for (std::size_t i = s; i < p; ++i) m[c * p + i] -= dot * v2[i];
            }
            tau2[s] = tau;
            for (std::size_t i = s; i < p; ++i) hv[s * p + i] = v2[i];
        }
        for (std::size_t k = 0; k < nk; ++k) {
            // forward substitution on R2' z = c
            std::vector<real> z(r);
            const real* yk = &y[k * n];
            for (std::size_t s = 0; s < r; ++s) {
                real acc = yk[s];
                for (std::size_t j = 0; j < s; ++j) acc -= m[s * p + j] * z[j];
                z[s] = acc / m[s * p + s];
            }
            // w = Q2 [z; 0]: apply reflectors in reverse order
            real* wk = &w[k * p];
            for (std::size_t j = 0; j < r; ++j) wk[j] = z[j];
            for (std::size_t s = r; s-- > 0;) {
                if (tau2[s] == 0) continue;
                real dot = 0;
                for (std::size_t i = s; i < p; ++i) dot += hv[s * p + i] * wk[i];
                dot *= tau2[s];
                for (std::size_t i = s; i < p; ++i) wk[i] -= dot * hv[s * p + i];
            }
        }
    }

    LstsqResult res;
    res.rank = rank;
    res.solution.assign(p * nk, 0);
    for (std::size_t k = 0; k < nk; ++k)
        for (std::size_t j = 0; j < p; ++j) res.solution[k * p + jpvt[j]] = w[k * p + j];
    return res;
}

// Centered (and optionally scaled) design copy plus per-target centered
// columns, shared by every fitter.
struct CenteredProblem {
    std::vector<real> z;       // column-major N x P
    std::vector<real> yc;      // column-major N x K
    std::vector<real> y_means; // K
    std::size_t n = 0, p = 0, k = 0;
};

inline CenteredProblem center_problem(const FlatRegressionProblem& prob) {
    CenteredProblem c;
    c.n = prob.design.rows();
    c.p = prob.design.cols();
    c.k = prob.targets.cols();
    if (prob.column_means.size() != c.p || prob.column_scales.size() != c.p) {
        throw shape_error("FlatRegressionProblem: column stats do not match design width");
    }
    c.z.resize(c.n * c.p);
    for (std::size_t j = 0; j < c.p; ++j)
        for (std::size_t i = 0; i < c.n; ++i)
            c.z[j * c.n + i] = (prob.design(i, j) - prob.column_means[j]) / prob.column_scales[j];
    c.yc.resize(c.n * c.k);
    c.y_means.resize(c.k);
    for (std::size_t t = 0; t < c.k; ++t) {
        real m = 0;
        for (std::size_t i = 0; i < c.n; ++i) m += prob.targets(i, t);
        m /= real(c.n);
        c.y_means[t] = m;
        for (std::size_t i = 0; i < c.n; ++i) c.yc[t * c.n + i] = prob.targets(i, t) - m;
    }
    return c;
}

// Maps standardized-space coefficients back to raw columns and rebuilds the
// unpenalized intercept.
inline FlatLinearModel destandardize(const FlatRegressionProblem& prob,
                                     const CenteredProblem& c,
                                     std::span<const real> w_std, // column-major P x K
                                     Regularization reg) {
    std::vector<real> weights(c.p * c.k);
    std::vector<real> intercept(c.k);
    for (std::size_t t = 0; t < c.k; ++t) {
        real dot = 0;
        for (std::size_t j = 0; j < c.p; ++j) {
            const real wj = w_std[t * c.p + j] / prob.column_scales[j];
            weights[j * c.k + t] = wj;
            dot += prob.column_means[j] * wj;
        }
        intercept[t] = c.y_means[t] - dot;
    }
    return FlatLinearModel{SequenceTensor(c.p, c.k, std::move(weights)), std::move(intercept),
                           reg};
}

} // namespace detail

/// Ordinary least squares on centered columns, solved by orthogonal
/// decomposition. Rank-deficient problems return the minimum-norm solution
/// unless strict is set, in which case they raise with the effective rank.
inline FlatLinearModel fit_ols(const FlatRegressionProblem& prob, bool strict = false) {
    const auto c = detail::center_problem(prob);
    const auto res = detail::lstsq_min_norm(c.n, c.p, c.z, c.k, c.yc);
    if (strict && res.rank < c.p) {
        throw singular_error("fit_ols: rank-deficient design, effective rank " +
                             std::to_string(res.rank) + " of " + std::to_string(c.p));
    }
    return detail::destandardize(prob, c, res.solution, Regularization{PenaltyKind::none, 0, 1});
}

/// Ridge: ||y - Xw - b||^2 + alpha*||w||^2 with an unpenalized intercept,
/// solved through the augmented system [X; sqrt(alpha) I].
inline FlatLinearModel fit_ridge(const FlatRegressionProblem& prob, real alpha) {
    if (alpha < 0) throw config_error("fit_ridge: alpha must be >= 0");
    if (alpha == 0) {
        auto m = fit_ols(prob);
        m.regularization = Regularization{PenaltyKind::ridge, 0, 1};
        return m;
    }
    const auto c = detail::center_problem(prob);
    const real root = std::sqrt(alpha);
    const std::size_t rows = c.n + c.p;
    std::vector<real> aug(rows * c.p, 0); // column-major
    for (std::size_t j = 0; j < c.p; ++j) {
        for (std::size_t i = 0; i < c.n; ++i) aug[j * rows + i] = c.z[j * c.n + i];
        aug[j * rows + c.n + j] = root;
    }
    std::vector<real> yaug(rows * c.k, 0);
    for (std::size_t t = 0; t < c.k; ++t)
        for (std::size_t i = 0; i < c.n; ++i) yaug[t * rows + i] = c.yc[t * c.n + i];
    const auto res = detail::lstsq_min_norm(rows, c.p, std::move(aug), c.k, std::move(yaug));
    return detail::destandardize(prob, c, res.solution,
                                 Regularization{PenaltyKind::ridge, alpha, 1});
}

inline constexpr real coordinate_descent_tol = 1e-6;
inline constexpr std::size_t coordinate_descent_max_sweeps = 10000;

namespace detail {

// Cyclic coordinate descent on
//   (1/2N)||yc - Z w||^2 + l1*||w||_1 + (l2/2)*||w||^2
// over the centered problem. Returns per-column solutions plus convergence
// metadata.
inline std::tuple<std::vector<real>, bool, std::size_t> coordinate_descent(
    const CenteredProblem& c, real l1, real l2) {
    std::vector<real> nu(c.p);
    for (std::size_t j = 0; j < c.p; ++j) {
        real ss = 0;
        for (std::size_t i = 0; i < c.n; ++i) ss += c.z[j * c.n + i] * c.z[j * c.n + i];
        nu[j] = ss / real(c.n);
    }
    std::vector<real> w(c.p * c.k, 0);
    bool all_converged = true;
    std::size_t max_sweeps_used = 0;
    for (std::size_t t = 0; t < c.k; ++t) {
        std::vector<real> r(c.yc.begin() + t * c.n, c.yc.begin() + (t + 1) * c.n);
        real* wt = &w[t * c.p];
        bool converged = false;
        std::size_t sweep = 0;
        while (sweep < coordinate_descent_max_sweeps) {
            ++sweep;
            real max_delta = 0;
            for (std::size_t j = 0; j < c.p; ++j) {
                if (nu[j] == 0) continue; // constant column stays at zero
                const real* zj = &c.z[j * c.n];
                real rho = 0;
                for (std::size_t i = 0; i < c.n; ++i) rho += zj[i] * r[i];
                rho = rho / real(c.n) + nu[j] * wt[j];
                const real shrunk = std::abs(rho) > l1 ? (rho > 0 ? rho - l1 : rho + l1) : 0;
                const real w_new = shrunk / (nu[j] + l2);
                const real delta = wt[j] - w_new;
                if (delta != 0) {
                    for (std::size_t i = 0; i < c.n; ++i) r[i] += zj[i] * delta;
                    max_delta = std::max(max_delta, std::abs(delta));
                    wt[j] = w_new;
                }
            }
            if (max_delta < coordinate_descent_tol) {
                converged = true;
                break;
            }
        }
        all_converged = all_converged && converged;
        max_sweeps_used = std::max(max_sweeps_used, sweep);
    }
    return {std::move(w), all_converged, max_sweeps_used};
}

} // namespace detail

inline FlatLinearModel fit_elasticnet(const FlatRegressionProblem& prob, real alpha,
                                      real l1_ratio) {
    if (alpha <= 0) throw config_error("fit_elasticnet: alpha must be > 0");
    if (l1_ratio < 0 || l1_ratio > 1) {
        throw config_error("fit_elasticnet: l1_ratio must be in [0, 1]");
    }
    const auto c = detail::center_problem(prob);
    auto [w, converged, sweeps] =
        detail::coordinate_descent(c, alpha * l1_ratio, alpha * (1 - l1_ratio));
    auto m = detail::destandardize(prob, c, w,
                                   Regularization{PenaltyKind::elasticnet, alpha, l1_ratio});
    m.converged = converged;
    m.sweeps = sweeps;
    return m;
}

inline FlatLinearModel fit_lasso(const FlatRegressionProblem& prob, real alpha) {
    if (alpha <= 0) throw config_error("fit_lasso: alpha must be > 0");
    auto m = fit_elasticnet(prob, alpha, 1);
    m.regularization = Regularization{PenaltyKind::lasso, alpha, 1};
    return m;
}

} // namespace tln
