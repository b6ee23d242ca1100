#include "biomark/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "biomark/error.hpp"

namespace biomark {

std::vector<double> linear_gram(const double* x, std::size_t n, std::size_t d) {
    std::vector<double> gram(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        const double* xi = x + i * d;
        for (std::size_t j = i; j < n; ++j) {
            const double* xj = x + j * d;
            double dot = 0.0;
            for (std::size_t f = 0; f < d; ++f) dot += xi[f] * xj[f];
            gram[i * n + j] = dot;
            gram[j * n + i] = dot;
        }
    }
    return gram;
}

BinarySvm smo_train(const std::vector<double>& gram, const std::vector<double>& y, double c,
                    double tol, const std::vector<double>* warm_alpha, std::size_t max_steps) {
    const std::size_t n = y.size();
    if (gram.size() != n * n)
        throw AlgorithmError("bad_gram", "gram matrix size does not match label count");
    if (!(c > 0.0)) throw AlgorithmError("bad_c", "C must be positive");

    BinarySvm svm;
    svm.c = c;
    svm.alpha.assign(n, 0.0);
    if (warm_alpha) {
        if (warm_alpha->size() != n)
            throw AlgorithmError("bad_warm_start", "warm-start alpha length mismatch");
        svm.alpha = *warm_alpha;
    }
    if (max_steps == 0) max_steps = 1000 * std::max<std::size_t>(n, 100);

    // grad[k] = dW/dalpha_k = 1 - y_k * sum_i alpha_i y_i K_ik for the dual
    // W(alpha) = sum alpha - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij
    std::vector<double> grad(n, 1.0);
    double dual = 0.0;
    if (warm_alpha) {
        for (std::size_t k = 0; k < n; ++k) {
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) acc += svm.alpha[i] * y[i] * gram[i * n + k];
            grad[k] = 1.0 - y[k] * acc;
            dual += svm.alpha[k] * (1.0 + grad[k]) * 0.5;  // alpha.(1) - 1/2 alpha'Q alpha
        }
    }
    svm.dual_trace.push_back(dual);

    // bounds on y_k * alpha_k
    auto upper = [&](double yk) { return yk > 0.0 ? c : 0.0; };
    auto lower = [&](double yk) { return yk > 0.0 ? 0.0 : -c; };

    double m_score = 0.0, big_m_score = 0.0;
    for (std::size_t step = 0; step < max_steps; ++step) {
        std::size_t i = n, j = n;
        m_score = -std::numeric_limits<double>::infinity();
        big_m_score = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < n; ++k) {
            const double ya = y[k] * svm.alpha[k];
            const double score = y[k] * grad[k];
            if (ya < upper(y[k]) && score > m_score) {
                m_score = score;
                i = k;
            }
            if (ya > lower(y[k]) && score < big_m_score) {
                big_m_score = score;
                j = k;
            }
        }
        if (i == n || j == n || m_score - big_m_score <= tol) {
            svm.converged = (i == n || j == n) || (m_score - big_m_score <= tol);
            break;
        }

        double eta = gram[i * n + i] + gram[j * n + j] - 2.0 * gram[i * n + j];
        if (eta <= 1e-12) eta = 1e-12;
        double lambda = std::min(upper(y[i]) - y[i] * svm.alpha[i],
                                 y[j] * svm.alpha[j] - lower(y[j]));
        lambda = std::min(lambda, (m_score - big_m_score) / eta);

        dual += lambda * (m_score - big_m_score) - 0.5 * lambda * lambda * eta;
        svm.dual_trace.push_back(dual);

        for (std::size_t k = 0; k < n; ++k)
            grad[k] += lambda * y[k] * (gram[j * n + k] - gram[i * n + k]);
        svm.alpha[i] += y[i] * lambda;
        svm.alpha[j] -= y[j] * lambda;
        svm.steps++;
    }

    // midpoint bias from the final violating-pair scores; when every sample
    // sits at a bound on one side, fall back to the attainable score
    double hi = -std::numeric_limits<double>::infinity();
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) {
        const double ya = y[k] * svm.alpha[k];
        const double score = y[k] * grad[k];
        if (ya < upper(y[k])) hi = std::max(hi, score);
        if (ya > lower(y[k])) lo = std::min(lo, score);
    }
    if (std::isinf(hi)) hi = lo;
    if (std::isinf(lo)) lo = hi;
    svm.bias = 0.5 * (hi + lo);
    return svm;
}

std::vector<double> svm_primal_weights(const double* x, std::size_t n, std::size_t d,
                                       const std::vector<double>& y,
                                       const std::vector<double>& alpha,
                                       const std::vector<std::size_t>* features) {
    std::vector<double> coef(n);
    for (std::size_t i = 0; i < n; ++i) coef[i] = alpha[i] * y[i];
    if (features) {
        std::vector<double> w(features->size(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            if (coef[i] == 0.0) continue;
            const double* xi = x + i * d;
            for (std::size_t f = 0; f < features->size(); ++f) w[f] += coef[i] * xi[(*features)[f]];
        }
        return w;
    }
    std::vector<double> w(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (coef[i] == 0.0) continue;
        const double* xi = x + i * d;
        for (std::size_t f = 0; f < d; ++f) w[f] += coef[i] * xi[f];
    }
    return w;
}

double kkt_violation(const std::vector<double>& decision, const std::vector<double>& y,
                     const std::vector<double>& alpha, double c) {
    double worst = 0.0;
    const double bound_eps = 1e-9 * c;
    for (std::size_t k = 0; k < y.size(); ++k) {
        const double margin = y[k] * decision[k];
        double v;
        if (alpha[k] <= bound_eps)
            v = std::max(0.0, 1.0 - margin);
        else if (alpha[k] >= c - bound_eps)
            v = std::max(0.0, margin - 1.0);
        else
            v = std::abs(margin - 1.0);
        worst = std::max(worst, v);
    }
    return worst;
}

}  // namespace biomark
