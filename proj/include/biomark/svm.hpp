#pragma once

#include <cstddef>
#include <vector>

namespace biomark {

// Soft-margin linear SVM dual solved by sequential minimal optimization with
// maximal-violating-pair working-set selection. Stops when the KKT gap
// m(alpha) - M(alpha) drops to tol, which bounds the per-instance KKT
// violation by tol/2 with the midpoint bias.
struct BinarySvm {
    std::vector<double> alpha;
    double bias = 0.0;
    double c = 1.0;
    std::vector<double> dual_trace;  // dual objective after each update step
    std::size_t steps = 0;
    bool converged = false;
};

// y in {+1,-1}; gram is the n x n linear kernel matrix (row-major). When
// warm_alpha is given it must be feasible (box bounds and sum y*alpha = 0);
// the solver resumes from it.
BinarySvm smo_train(const std::vector<double>& gram, const std::vector<double>& y, double c,
                    double tol = 1e-3, const std::vector<double>* warm_alpha = nullptr,
                    std::size_t max_steps = 0);

// n x n linear Gram of the selected rows/columns of x (rows = samples,
// row-major, d features).
std::vector<double> linear_gram(const double* x, std::size_t n, std::size_t d);

// w_f = sum_i alpha_i y_i x_i[f] over the requested features.
std::vector<double> svm_primal_weights(const double* x, std::size_t n, std::size_t d,
                                       const std::vector<double>& y,
                                       const std::vector<double>& alpha,
                                       const std::vector<std::size_t>* features = nullptr);

// Max per-instance KKT violation of a trained machine given decision values
// f_i = w.x_i + b: free vectors need |y f - 1| small, alpha=0 needs
// y f >= 1, alpha=C needs y f <= 1.
double kkt_violation(const std::vector<double>& decision, const std::vector<double>& y,
                     const std::vector<double>& alpha, double c);

}  // namespace biomark
