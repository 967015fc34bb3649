#include "trace/stats.hpp"

#include "trace/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace trace {

double cohen_kappa(const std::vector<std::string>& labels_a,
                   const std::vector<std::string>& labels_b) {
    if (labels_a.size() != labels_b.size())
        throw ShapeError("label sequences differ in length: " + std::to_string(labels_a.size()) +
                         " vs " + std::to_string(labels_b.size()));
    if (labels_a.empty()) throw ShapeError("label sequences are empty");

    double n = static_cast<double>(labels_a.size());
    std::size_t agree = 0;
    std::map<std::string, std::size_t> count_a, count_b;
    for (std::size_t i = 0; i < labels_a.size(); ++i) {
        if (labels_a[i] == labels_b[i]) ++agree;
        ++count_a[labels_a[i]];
        ++count_b[labels_b[i]];
    }
    double p_o = static_cast<double>(agree) / n;
    double p_e = 0.0;
    for (const auto& [label, ca] : count_a) {
        auto it = count_b.find(label);
        if (it != count_b.end())
            p_e += (static_cast<double>(ca) / n) * (static_cast<double>(it->second) / n);
    }
    if (p_e >= 1.0) {
        if (p_o >= 1.0) return 1.0;
        throw DegenerateMarginals("chance agreement is 1 but observed agreement is " +
                                  std::to_string(p_o));
    }
    return (p_o - p_e) / (1.0 - p_e);
}

std::vector<double> average_ranks(const std::vector<double>& values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(values.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
        // positions i..j share the mean of ranks i+1..j+1
        double mean_rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mean_rank;
        i = j + 1;
    }
    return ranks;
}

namespace {

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    double n = static_cast<double>(a.size());
    double mean_a = std::accumulate(a.begin(), a.end(), 0.0) / n;
    double mean_b = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double cov = 0.0, var_a = 0.0, var_b = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double da = a[i] - mean_a;
        double db = b[i] - mean_b;
        cov += da * db;
        var_a += da * da;
        var_b += db * db;
    }
    if (var_a == 0.0 || var_b == 0.0)
        throw DegenerateInput("rank vector has zero variance");
    return cov / std::sqrt(var_a * var_b);
}

// Continued-fraction evaluation of the incomplete beta integral (Lentz).
double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-14;
    constexpr double kFpMin = 1e-300;

    double qab = a + b;
    double qap = a + 1.0;
    double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                      a * std::log(x) + b * std::log(1.0 - x);
    double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double dof) {
    // P(|T| >= t) = I_{dof/(dof+t^2)}(dof/2, 1/2)
    double x = dof / (dof + t * t);
    return regularized_incomplete_beta(dof / 2.0, 0.5, x);
}

SpearmanResult spearman_rho(const std::vector<double>& x, const std::vector<double>& y,
                            PValueMethod method) {
    if (x.size() != y.size())
        throw ShapeError("input vectors differ in length: " + std::to_string(x.size()) + " vs " +
                         std::to_string(y.size()));
    if (x.size() < 3) throw ShapeError("need at least 3 observations");

    std::vector<double> rx = average_ranks(x);
    std::vector<double> ry = average_ranks(y);

    SpearmanResult result;
    result.rho = std::clamp(pearson(rx, ry), -1.0, 1.0);

    double n = static_cast<double>(x.size());
    if (method == PValueMethod::ExactPermutation) {
        if (x.size() > 10)
            throw ShapeError("exact permutation p-value is limited to n <= 10");
        std::vector<std::size_t> perm(x.size());
        std::iota(perm.begin(), perm.end(), 0);
        std::size_t total = 0, extreme = 0;
        double threshold = std::fabs(result.rho) - 1e-12;
        std::vector<double> permuted(y.size());
        do {
            for (std::size_t i = 0; i < perm.size(); ++i) permuted[i] = ry[perm[i]];
            double rho = std::clamp(pearson(rx, permuted), -1.0, 1.0);
            if (std::fabs(rho) >= threshold) ++extreme;
            ++total;
        } while (std::next_permutation(perm.begin(), perm.end()));
        result.p_two_sided = static_cast<double>(extreme) / static_cast<double>(total);
        return result;
    }

    if (std::fabs(result.rho) >= 1.0 - 1e-15) {
        result.p_two_sided = 0.0;
        return result;
    }
    double t = result.rho * std::sqrt((n - 2.0) / (1.0 - result.rho * result.rho));
    result.p_two_sided = student_t_two_sided_p(std::fabs(t), n - 2.0);
    return result;
}

}  // namespace trace
