#include "rankest/ustat.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rankest {

namespace {

class Fenwick {
public:
    explicit Fenwick(std::size_t size) : tree_(size + 1, 0) {}

    void add(std::size_t rank, std::int64_t delta) {
        for (std::size_t i = rank; i < tree_.size(); i += i & (~i + 1)) tree_[i] += delta;
    }

    // Sum over ranks 1..rank.
    std::int64_t prefix(std::size_t rank) const {
        std::int64_t s = 0;
        for (std::size_t i = rank; i > 0; i -= i & (~i + 1)) s += tree_[i];
        return s;
    }

private:
    std::vector<std::int64_t> tree_;
};

// 1-based dense ranks; equal values share a rank.
std::vector<std::size_t> dense_ranks(std::span<const double> values, std::size_t& distinct) {
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    distinct = sorted.size();
    std::vector<std::size_t> ranks(values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
        ranks[i] = static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), values[i]) -
                                            sorted.begin()) + 1;
    return ranks;
}

std::vector<std::size_t> order_by(std::span<const double> u) {
    std::vector<std::size_t> order(u.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return u[a] < u[b]; });
    return order;
}

// #{j : u_j < u_i} for every i.
std::vector<std::int64_t> strictly_below(std::span<const double> u) {
    const auto order = order_by(u);
    std::vector<std::int64_t> below(u.size());
    std::size_t start = 0;
    while (start < order.size()) {
        std::size_t end = start;
        while (end < order.size() && u[order[end]] == u[order[start]]) ++end;
        for (std::size_t g = start; g < end; ++g) below[order[g]] = static_cast<std::int64_t>(start);
        start = end;
    }
    return below;
}

std::int64_t pair_count(std::size_t n) {
    return static_cast<std::int64_t>(n) * static_cast<std::int64_t>(n - 1);
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

PairKernel::PairKernel(const Sample& sample, const EstimatorSpec& spec)
    : kind_(spec.kind), n_(sample.n()) {
    validate_sample(sample, spec);
    switch (kind_) {
        case EstimatorKind::MRC:
            response_ = to_std(sample.y);
            break;
        case EstimatorKind::CS:
            response_ = to_std(sample.y);
            trimmed_.resize(n_);
            for (std::size_t i = 0; i < n_; ++i) trimmed_[i] = trim(response_[i], spec.trim_lo, spec.trim_hi);
            break;
        case EstimatorKind::KT:
            response_ = to_std(*sample.v);
            uncensored_.resize(n_);
            for (std::size_t i = 0; i < n_; ++i)
                uncensored_[i] = (*sample.r)[static_cast<Eigen::Index>(i)] == 1.0 ? 1 : 0;
            break;
        case EstimatorKind::AS:
            response_ = to_std(sample.y);
            w_ = to_std(*sample.w);
            bandwidth_ = spec.bandwidth(n_);
            kernel_ = spec.kernel;
            break;
    }
}

double PairKernel::weight(std::size_t i, std::size_t j) const {
    switch (kind_) {
        case EstimatorKind::MRC: return response_[i] > response_[j] ? 1.0 : 0.0;
        case EstimatorKind::CS: return trimmed_[i];
        case EstimatorKind::KT: return (uncensored_[j] != 0 && response_[j] < response_[i]) ? 1.0 : 0.0;
        case EstimatorKind::AS:
            if (!(response_[i] > response_[j])) return 0.0;
            return kernel_((w_[i] - w_[j]) / bandwidth_) / bandwidth_;
    }
    return 0.0;
}

Eigen::VectorXd linear_index(const Sample& sample, const Beta& beta) {
    if (static_cast<std::size_t>(sample.x.cols()) != beta.p() + 1)
        throw Error(ErrorCode::DimensionMismatch, "beta length differs from x columns");
    return sample.x * beta.full();
}

double pairwise_sum(std::span<const double> values) noexcept {
    constexpr std::size_t kBlock = 8;
    if (values.size() <= kBlock) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

DominanceCounts dominance_counts(std::span<const double> u, std::span<const double> y,
                                 std::span<const std::int64_t> weight) {
    if (u.size() != y.size() || (!weight.empty() && weight.size() != u.size()))
        throw Error(ErrorCode::LengthMismatch, "dominance_counts inputs differ in length");
    const std::size_t n = u.size();
    DominanceCounts out{std::vector<std::int64_t>(n, 0), std::vector<std::int64_t>(n, 0)};
    if (n == 0) return out;

    std::size_t distinct = 0;
    const auto rank = dense_ranks(y, distinct);
    const auto order = order_by(u);
    auto wt = [&](std::size_t i) { return weight.empty() ? std::int64_t{1} : weight[i]; };

    // Ascending u: everything already inserted has strictly smaller u.
    Fenwick lower(distinct);
    for (std::size_t start = 0; start < n;) {
        std::size_t end = start;
        while (end < n && u[order[end]] == u[order[start]]) ++end;
        for (std::size_t g = start; g < end; ++g) out.below[order[g]] = lower.prefix(rank[order[g]] - 1);
        for (std::size_t g = start; g < end; ++g) lower.add(rank[order[g]], wt(order[g]));
        start = end;
    }

    // Descending u for the unweighted upper counts.
    Fenwick upper(distinct);
    std::int64_t inserted = 0;
    for (std::size_t stop = n; stop > 0;) {
        std::size_t begin = stop;
        while (begin > 0 && u[order[begin - 1]] == u[order[stop - 1]]) --begin;
        for (std::size_t g = begin; g < stop; ++g)
            out.above[order[g]] = inserted - upper.prefix(rank[order[g]]);
        for (std::size_t g = begin; g < stop; ++g) upper.add(rank[order[g]], 1);
        inserted += static_cast<std::int64_t>(stop - begin);
        stop = begin;
    }
    return out;
}

std::int64_t fast_concordance(std::span<const double> u, std::span<const double> y) {
    if (u.size() != y.size()) throw Error(ErrorCode::LengthMismatch, "u and y differ in length");
    const auto counts = dominance_counts(u, y);
    return std::accumulate(counts.below.begin(), counts.below.end(), std::int64_t{0});
}

namespace {

// Sorting first makes the total a function of the multiset of terms, so
// reordering the observations cannot change a single bit.
double ordered_sum(std::vector<double>& terms) {
    std::sort(terms.begin(), terms.end());
    return pairwise_sum(terms);
}

}  // namespace

ObjectiveValue objective(const PairKernel& kernel, std::span<const double> u) {
    const std::size_t n = kernel.n();
    if (u.size() != n) throw Error(ErrorCode::LengthMismatch, "index length differs from sample size");
    ObjectiveValue out;
    out.num_pairs = pair_count(n);
    const double denom = static_cast<double>(out.num_pairs);

    switch (kernel.kind()) {
        case EstimatorKind::MRC: {
            out.raw_count = fast_concordance(u, kernel.response());
            out.value = static_cast<double>(*out.raw_count) / denom;
            break;
        }
        case EstimatorKind::KT: {
            const auto counts = dominance_counts(u, kernel.response(), kernel.uncensored());
            out.raw_count = std::accumulate(counts.below.begin(), counts.below.end(), std::int64_t{0});
            out.value = static_cast<double>(*out.raw_count) / denom;
            break;
        }
        case EstimatorKind::CS: {
            const auto below = strictly_below(u);
            const auto m = kernel.trimmed();
            std::vector<double> rows(n);
            for (std::size_t i = 0; i < n; ++i) rows[i] = m[i] * static_cast<double>(below[i]);
            out.value = ordered_sum(rows) / denom;
            break;
        }
        case EstimatorKind::AS: {
            std::vector<double> rows(n), terms(n);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j) terms[j] = u[i] > u[j] ? kernel.weight(i, j) : 0.0;
                rows[i] = ordered_sum(terms);
            }
            out.value = ordered_sum(rows) / denom;
            break;
        }
    }
    return out;
}

ObjectiveValue objective(const Sample& sample, const EstimatorSpec& spec, const Beta& beta) {
    const PairKernel kernel(sample, spec);
    const Eigen::VectorXd u = linear_index(sample, beta);
    return objective(kernel, {u.data(), static_cast<std::size_t>(u.size())});
}

std::vector<double> tau_all(const PairKernel& kernel, std::span<const double> u) {
    const std::size_t n = kernel.n();
    if (u.size() != n) throw Error(ErrorCode::LengthMismatch, "index length differs from sample size");
    const double inv_n = 1.0 / static_cast<double>(n);
    std::vector<double> tau(n, 0.0);

    switch (kernel.kind()) {
        case EstimatorKind::MRC: {
            const auto c = dominance_counts(u, kernel.response());
            for (std::size_t i = 0; i < n; ++i) tau[i] = static_cast<double>(c.below[i] + c.above[i]) * inv_n;
            break;
        }
        case EstimatorKind::KT: {
            const auto r = kernel.uncensored();
            const auto c = dominance_counts(u, kernel.response(), r);
            for (std::size_t i = 0; i < n; ++i)
                tau[i] = static_cast<double>(c.below[i] + r[i] * c.above[i]) * inv_n;
            break;
        }
        case EstimatorKind::CS: {
            // Row part M(Y_z) #{u_j < u_z}; column part sum of M(Y_j) over u_j > u_z.
            const auto m = kernel.trimmed();
            const auto below = strictly_below(u);
            const auto order = order_by(u);
            std::vector<double> above_sum(n, 0.0);
            double running = 0.0;
            for (std::size_t stop = n; stop > 0;) {
                std::size_t begin = stop;
                while (begin > 0 && u[order[begin - 1]] == u[order[stop - 1]]) --begin;
                for (std::size_t g = begin; g < stop; ++g) above_sum[order[g]] = running;
                for (std::size_t g = begin; g < stop; ++g) running += m[order[g]];
                stop = begin;
            }
            for (std::size_t i = 0; i < n; ++i)
                tau[i] = (m[i] * static_cast<double>(below[i]) + above_sum[i]) * inv_n;
            break;
        }
        case EstimatorKind::AS: {
            std::vector<double> row(n, 0.0), col(n, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j) {
                    if (!(u[i] > u[j])) continue;
                    const double k = kernel.weight(i, j);
                    row[i] += k;
                    col[j] += k;
                }
            }
            for (std::size_t i = 0; i < n; ++i) tau[i] = (row[i] + col[i]) * inv_n;
            break;
        }
    }
    return tau;
}

double tau_n(const Sample& sample, const EstimatorSpec& spec, std::size_t z_index, const Beta& beta,
             const Beta& reference) {
    const PairKernel kernel(sample, spec);
    const std::size_t n = kernel.n();
    if (z_index >= n) throw Error(ErrorCode::IndexOutOfRange, "z_index outside the sample");
    const Eigen::VectorXd u = linear_index(sample, beta);
    const Eigen::VectorXd u0 = linear_index(sample, reference);
    const std::size_t z = z_index;

    std::vector<double> terms(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double row = (u[z] > u[j] ? kernel.weight(z, j) : 0.0) - (u0[z] > u0[j] ? kernel.weight(z, j) : 0.0);
        const double col = (u[j] > u[z] ? kernel.weight(j, z) : 0.0) - (u0[j] > u0[z] ? kernel.weight(j, z) : 0.0);
        terms[j] = row + col;
    }
    return pairwise_sum(terms) / static_cast<double>(n);
}

double hoeffding_check(const Sample& sample, const EstimatorSpec& spec, const Beta& beta,
                       const Beta& reference) {
    const PairKernel kernel(sample, spec);
    const std::size_t n = kernel.n();
    const Eigen::VectorXd u = linear_index(sample, beta);
    const Eigen::VectorXd u0 = linear_index(sample, reference);
    const double dn = static_cast<double>(n);
    const double pairs = static_cast<double>(pair_count(n));

    // f(i, j) = k(Z_i, Z_j; beta) - k(Z_i, Z_j; reference), row-major.
    std::vector<double> f(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const double kb = u[i] > u[j] ? kernel.weight(i, j) : 0.0;
            const double kr = u0[i] > u0[j] ? kernel.weight(i, j) : 0.0;
            f[i * n + j] = kb - kr;
        }

    std::vector<double> buf(n);
    std::vector<double> row_mean(n), col_mean(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) buf[j] = f[i * n + j];
        row_mean[i] = pairwise_sum(buf) / dn;
        for (std::size_t j = 0; j < n; ++j) buf[j] = f[j * n + i];
        col_mean[i] = pairwise_sum(buf) / dn;
    }
    const double gamma_hat = pairwise_sum(f) / (dn * dn);
    const double gamma_n = pairwise_sum(f) / pairs;  // diagonal is zero

    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = row_mean[i] + col_mean[i] - 2.0 * gamma_hat;
    const double pn_g = pairwise_sum(g) / dn;

    std::vector<double> h(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) h[i * n + j] = f[i * n + j] - row_mean[i] - col_mean[j] + gamma_hat;
    std::vector<double> off_diag;
    off_diag.reserve(n * (n - 1));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j) off_diag.push_back(h[i * n + j]);
    const double un_h = pairwise_sum(off_diag) / pairs;

    double residual = std::abs(gamma_n - (gamma_hat + pn_g + un_h));
    // h_hat is degenerate: its full row and column averages vanish.
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) buf[j] = h[i * n + j];
        residual = std::max(residual, std::abs(pairwise_sum(buf) / dn));
        for (std::size_t j = 0; j < n; ++j) buf[j] = h[j * n + i];
        residual = std::max(residual, std::abs(pairwise_sum(buf) / dn));
    }
    return residual;
}

}  // namespace rankest
