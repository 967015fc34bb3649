#pragma once

#include <string>
#include <vector>

namespace trace {

// Cohen's kappa over two equal-length label sequences. Expected agreement
// comes from the marginal products. Throws ShapeError on length mismatch or
// empty input, DegenerateMarginals when chance agreement is 1 but observed
// agreement is not.
double cohen_kappa(const std::vector<std::string>& labels_a,
                   const std::vector<std::string>& labels_b);

// Fractional (average) ranks, 1-based; ties share the mean of their ranks.
std::vector<double> average_ranks(const std::vector<double>& values);

enum class PValueMethod {
    TApprox,           // t = rho * sqrt((n-2)/(1-rho^2)) against Student-t(n-2)
    ExactPermutation,  // full enumeration; only for n <= 10
};

struct SpearmanResult {
    double rho = 0.0;
    double p_two_sided = 1.0;
};

// Spearman rank correlation with average ranks for ties; |rho| = 1 pins the
// p-value to 0. Requires n >= 3 (ShapeError) and non-constant rank vectors
// (DegenerateInput).
SpearmanResult spearman_rho(const std::vector<double>& x, const std::vector<double>& y,
                            PValueMethod method = PValueMethod::TApprox);

// Regularized incomplete beta I_x(a, b); exposed for verification.
double regularized_incomplete_beta(double a, double b, double x);

// P(|T| >= |t|) for Student-t with `dof` degrees of freedom.
double student_t_two_sided_p(double t, double dof);

}  // namespace trace
