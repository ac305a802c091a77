#ifndef EFFUMAP_KERNEL_HPP
#define EFFUMAP_KERNEL_HPP

#include "common.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

/**
 * @file kernel.hpp
 *
 * @brief Low-dimensional similarity phi(d) = 1 / (1 + a d^(2b)) and the per-pair
 * gradients of the attractive (-log phi) and repulsive (-log(1 - phi)) terms.
 */

namespace effumap {

/**
 * Shape and numerical guards of the embedding similarity.
 *
 * `eps_rep` is added to the squared distance in the repulsive gradient denominator
 * and `grad_clip` bounds every gradient coordinate applied by the optimizer.
 * Setting `eps_rep = 0` and `grad_clip = inf` gives the exact gradients,
 * which is what the finite-difference and expectation checks use.
 */
struct Kernel {
    double a = 1.0;
    double b = 1.0;
    double eps_rep = 1e-3;
    double grad_clip = 4.0;

    /// Same shape with both numerical guards removed.
    Kernel exact() const {
        return Kernel{ a, b, 0.0, std::numeric_limits<double>::infinity() };
    }
};

inline void validate(const Kernel& k) {
    if (!(k.a > 0) || !(k.b > 0)) {
        throw std::invalid_argument("kernel needs a > 0 and b > 0");
    }
    if (!(k.eps_rep >= 0)) {
        throw std::invalid_argument("kernel eps_rep must be non-negative");
    }
    if (!(k.grad_clip > 0)) {
        throw std::invalid_argument("kernel grad_clip must be positive");
    }
}

/// Similarity from a squared distance.
inline double phi_sq(const Kernel& k, double dist2) {
    return 1.0 / (1.0 + k.a * std::pow(dist2, k.b));
}

inline double phi(const Kernel& k, double dist) {
    return phi_sq(k, dist * dist);
}

/**
 * Scalar c such that d(-log phi)/de_i = c * (e_i - e_j).
 * Zero at coincidence; b = 1 avoids the 0^0 term entirely.
 */
inline double attr_coefficient(const Kernel& k, double dist2) {
    if (dist2 <= 0) {
        return 0;
    }
    if (k.b == 1.0) {
        return 2.0 * k.a / (1.0 + k.a * dist2);
    }
    const double pw = std::pow(dist2, k.b);
    return 2.0 * k.a * k.b * (pw / dist2) / (1.0 + k.a * pw);
}

/**
 * Scalar c such that d(-log(1 - phi))/de_i = c * (e_i - e_s), with `eps_rep` guarding
 * the 1/d^2 singularity. Zero at exact coincidence.
 */
inline double rep_coefficient(const Kernel& k, double dist2) {
    if (dist2 <= 0) {
        return 0;
    }
    return -2.0 * k.b / ((k.eps_rep + dist2) * (1.0 + k.a * std::pow(dist2, k.b)));
}

inline double clip(double g, double limit) {
    return std::clamp(g, -limit, limit);
}

/**
 * Writes the clipped gradient of -log phi(e_i, e_j) with respect to e_i into `out`.
 */
inline void grad_attr(const Kernel& k, std::span<const double> ei, std::span<const double> ej, std::span<double> out) {
    const double c = attr_coefficient(k, squared_distance(ei, ej));
    for (std::size_t d = 0; d < out.size(); ++d) {
        out[d] = clip(c * (ei[d] - ej[d]), k.grad_clip);
    }
}

inline std::vector<double> grad_attr(const Kernel& k, std::span<const double> ei, std::span<const double> ej) {
    std::vector<double> out(ei.size());
    grad_attr(k, ei, ej, out);
    return out;
}

/**
 * Writes the clipped gradient of -log(1 - phi(e_i, e_s)) with respect to e_i into `out`.
 * Points are pushed apart when stepping against it.
 */
inline void grad_rep(const Kernel& k, std::span<const double> ei, std::span<const double> es, std::span<double> out) {
    const double c = rep_coefficient(k, squared_distance(ei, es));
    for (std::size_t d = 0; d < out.size(); ++d) {
        out[d] = clip(c * (ei[d] - es[d]), k.grad_clip);
    }
}

inline std::vector<double> grad_rep(const Kernel& k, std::span<const double> ei, std::span<const double> es) {
    std::vector<double> out(ei.size());
    grad_rep(k, ei, es, out);
    return out;
}

/**
 * Result of fitting (a, b) to the piecewise target curve.
 */
struct AbFit {
    double a = 1.0;
    double b = 1.0;
    /// Root-mean-square residual on the fitting grid.
    double rmse = 0;
    bool converged = false;
};

/**
 * Least-squares fit of phi(d; a, b) to the curve that is 1 for d < min_dist and
 * exp(-(d - min_dist) / spread) beyond, on 300 equally spaced points of [0, 3 * spread].
 *
 * Uses Levenberg-Marquardt from (a, b) = (1, 1) with analytic Jacobian.
 * If the iteration does not converge, (1, 1) is returned with `converged = false`.
 */
inline AbFit fit_ab(double min_dist = 0.1, double spread = 1.0) {
    if (!(min_dist >= 0) || !(spread > 0) || !(min_dist < 3 * spread)) {
        throw std::invalid_argument("fit_ab: need 0 <= min_dist < 3 * spread and spread > 0");
    }

    constexpr int npoints = 300;
    std::vector<double> xs(npoints), ys(npoints);
    for (int p = 0; p < npoints; ++p) {
        xs[p] = 3.0 * spread * static_cast<double>(p) / (npoints - 1);
        ys[p] = xs[p] < min_dist ? 1.0 : std::exp(-(xs[p] - min_dist) / spread);
    }

    auto sse = [&](double a, double b) {
        double out = 0;
        for (int p = 0; p < npoints; ++p) {
            const double r = 1.0 / (1.0 + a * std::pow(xs[p], 2 * b)) - ys[p];
            out += r * r;
        }
        return out;
    };

    double a = 1.0, b = 1.0, lambda = 1e-3;
    double current = sse(a, b);
    bool converged = false;

    for (int iter = 0; iter < 500; ++iter) {
        // Normal equations J^T J and J^T r for the two parameters.
        double jaa = 0, jab = 0, jbb = 0, ga = 0, gb = 0;
        for (int p = 0; p < npoints; ++p) {
            const double x = xs[p];
            const double pw = std::pow(x, 2 * b);
            const double denom = 1.0 + a * pw;
            const double f = 1.0 / denom;
            const double r = f - ys[p];
            const double da = -pw * f * f;
            const double db = x > 0 ? -a * pw * 2.0 * std::log(x) * f * f : 0.0;
            jaa += da * da;
            jab += da * db;
            jbb += db * db;
            ga += da * r;
            gb += db * r;
        }

        bool accepted = false;
        for (int attempt = 0; attempt < 50 && !accepted; ++attempt) {
            const double maa = jaa * (1 + lambda), mbb = jbb * (1 + lambda);
            const double det = maa * mbb - jab * jab;
            if (det == 0) {
                lambda *= 10;
                continue;
            }
            const double step_a = -(mbb * ga - jab * gb) / det;
            const double step_b = -(maa * gb - jab * ga) / det;
            const double na = a + step_a, nb = b + step_b;
            if (na > 0 && nb > 0) {
                const double candidate = sse(na, nb);
                if (candidate <= current) {
                    const double improvement = current - candidate;
                    a = na;
                    b = nb;
                    current = candidate;
                    lambda = std::max(lambda / 10, 1e-12);
                    accepted = true;
                    if (improvement <= 1e-15 * std::max(1.0, current) &&
                        std::abs(step_a) <= 1e-10 * a && std::abs(step_b) <= 1e-10 * b) {
                        converged = true;
                    }
                    break;
                }
            }
            lambda *= 10;
        }

        if (!accepted) {
            // No descent direction left: we are at a (local) minimum.
            converged = std::isfinite(current);
            break;
        }
        if (converged) {
            break;
        }
    }

    AbFit out;
    if (!converged || !std::isfinite(a) || !std::isfinite(b)) {
        out.a = 1.0;
        out.b = 1.0;
        out.rmse = std::sqrt(sse(1.0, 1.0) / npoints);
        out.converged = false;
        return out;
    }
    out.a = a;
    out.b = b;
    out.rmse = std::sqrt(current / npoints);
    out.converged = true;
    return out;
}

/**
 * Kernel with (a, b) fitted from `(min_dist, spread)` and the default guards.
 */
inline Kernel default_kernel(double min_dist = 0.1, double spread = 1.0) {
    auto fit = fit_ab(min_dist, spread);
    Kernel k;
    k.a = fit.a;
    k.b = fit.b;
    return k;
}

}

#endif
