#include "rankest/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace rankest {

namespace {

struct Event {
    double t;
    double delta;
};

struct Segment {
    double left;
    double right;
    double value;  // raw pair sum on (left, right)

    double midpoint() const noexcept { return 0.5 * (left + right); }
};

void check_coordinate(const Sample& sample, const Beta& beta, std::size_t k) {
    if (beta.p() != sample.p()) throw Error(ErrorCode::DimensionMismatch, "beta length differs from sample p");
    if (k >= beta.p()) throw Error(ErrorCode::IndexOutOfRange, "coordinate index outside theta");
}

bool coordinate_degenerate(const Sample& sample, std::size_t k) {
    const auto col = sample.x.col(static_cast<Eigen::Index>(k) + 1);
    return (col.array() == col[0]).all();
}

// Index with coordinate k's contribution removed.
Eigen::VectorXd partial_index(const Sample& sample, const Beta& beta, std::size_t k) {
    const auto col = sample.x.col(static_cast<Eigen::Index>(k) + 1);
    return linear_index(sample, beta) - col * beta.theta()[static_cast<Eigen::Index>(k)];
}

// Piecewise-constant section of the raw objective along coordinate k,
// restricted to [lo, hi].
std::vector<Segment> section(const Sample& sample, const PairKernel& kernel, const Beta& beta, std::size_t k,
                             double lo, double hi, bool merge_flat = true) {
    const std::size_t n = kernel.n();
    const Eigen::VectorXd c = partial_index(sample, beta, k);
    const auto xk = sample.x.col(static_cast<Eigen::Index>(k) + 1);

    std::vector<Event> events;
    events.reserve(n * (n - 1) / 2);
    double base = 0.0;  // value as t -> -infinity
    for (std::size_t a = 0; a < n; ++a) {
        const auto ia = static_cast<Eigen::Index>(a);
        for (std::size_t b = a + 1; b < n; ++b) {
            const auto ib = static_cast<Eigen::Index>(b);
            if (xk[ia] == xk[ib]) {
                if (c[ia] > c[ib]) base += kernel.weight(a, b);
                else if (c[ib] > c[ia]) base += kernel.weight(b, a);
                continue;
            }
            // `up` overtakes `down` as t increases.
            const std::size_t up = xk[ia] > xk[ib] ? a : b;
            const std::size_t down = up == a ? b : a;
            const auto iu = static_cast<Eigen::Index>(up);
            const auto id = static_cast<Eigen::Index>(down);
            const double t = (c[id] - c[iu]) / (xk[iu] - xk[id]);
            const double w_up = kernel.weight(up, down);
            const double w_down = kernel.weight(down, up);
            base += w_down;
            events.push_back({t, w_up - w_down});
        }
    }
    std::sort(events.begin(), events.end(), [](const Event& l, const Event& r) { return l.t < r.t; });

    // With merge_flat, breakpoints where the objective does not jump (every
    // crossing there has equal weight both ways) are merged away, so segments
    // are the maximal constant pieces.
    std::vector<Segment> segments;
    std::size_t idx = 0;
    double value = base;
    while (idx < events.size() && events[idx].t <= lo) value += events[idx++].delta;
    double left = lo;
    for (;;) {
        const double right = (idx < events.size() && events[idx].t < hi) ? events[idx].t : hi;
        if (right == hi) {
            segments.push_back({left, hi, value});
            break;
        }
        double net = 0.0;
        bool any_nonzero = false;
        while (idx < events.size() && events[idx].t == right) {
            net += events[idx].delta;
            any_nonzero = any_nonzero || events[idx].delta != 0.0;
            ++idx;
        }
        const bool jump = !merge_flat || (kernel.integer_valued() ? net != 0.0 : any_nonzero);
        if (jump) {
            segments.push_back({left, right, value});
            left = right;
        }
        value += net;
    }
    return segments;
}

ObjectiveValue evaluate_at(const Sample& sample, const PairKernel& kernel, const Beta& beta) {
    const Eigen::VectorXd u = linear_index(sample, beta);
    return objective(kernel, {u.data(), static_cast<std::size_t>(u.size())});
}

// Strict improvement over `current` in the exact comparison for the kernel.
bool better(const ObjectiveValue& candidate, const ObjectiveValue& current) {
    if (candidate.raw_count && current.raw_count) return *candidate.raw_count > *current.raw_count;
    return candidate.value > current.value;
}

CoordinateMax maximize_with(const Sample& sample, const PairKernel& kernel, const Beta& beta, std::size_t k,
                            const SearchDomain& domain, const ObjectiveValue& current) {
    const double theta_k = beta.theta()[static_cast<Eigen::Index>(k)];
    const CoordinateMax stay{theta_k, current.value};
    if (coordinate_degenerate(sample, k)) return stay;

    const auto segments = section(sample, kernel, beta, k, domain.lo[static_cast<Eigen::Index>(k)],
                                  domain.hi[static_cast<Eigen::Index>(k)]);

    double best = segments.front().value;
    double scale = 0.0;
    for (const auto& s : segments) {
        best = std::max(best, s.value);
        scale = std::max(scale, std::abs(s.value));
    }
    // Integer kernels are swept exactly; real-valued sweeps only shortlist.
    const double tol = kernel.integer_valued() ? 0.0 : 1e-9 * std::max(1.0, scale);

    std::optional<CoordinateMax> chosen;
    ObjectiveValue chosen_value = current;
    bool mismatch = false;
    for (const auto& s : segments) {
        if (s.value < best - tol) continue;
        const double mid = s.midpoint();
        const ObjectiveValue direct = evaluate_at(sample, kernel, beta.with_coordinate(k, mid));
        if (kernel.integer_valued() && static_cast<double>(*direct.raw_count) != s.value) {
            mismatch = true;
            break;
        }
        if (better(direct, chosen_value)) {
            chosen_value = direct;
            chosen = CoordinateMax{mid, direct.value};
        }
        if (kernel.integer_valued()) break;  // leftmost exact maximizer found
    }

    if (mismatch) {
        // Breakpoints closer than rounding can resolve: fall back to direct
        // evaluation at every elementary interval.
        chosen.reset();
        chosen_value = current;
        const auto elementary = section(sample, kernel, beta, k, domain.lo[static_cast<Eigen::Index>(k)],
                                        domain.hi[static_cast<Eigen::Index>(k)], false);
        for (const auto& s : elementary) {
            const double mid = s.midpoint();
            const ObjectiveValue direct = evaluate_at(sample, kernel, beta.with_coordinate(k, mid));
            if (better(direct, chosen_value)) {
                chosen_value = direct;
                chosen = CoordinateMax{mid, direct.value};
            }
        }
    }
    return chosen.value_or(stay);
}

}  // namespace

std::vector<double> coordinate_breakpoints(const Sample& sample, const Beta& beta, std::size_t k,
                                           const SearchDomain& domain) {
    check_coordinate(sample, beta, k);
    domain.validate();
    const Eigen::VectorXd c = partial_index(sample, beta, k);
    const auto xk = sample.x.col(static_cast<Eigen::Index>(k) + 1);
    const double lo = domain.lo[static_cast<Eigen::Index>(k)];
    const double hi = domain.hi[static_cast<Eigen::Index>(k)];

    std::vector<double> out;
    const auto n = sample.x.rows();
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = a + 1; b < n; ++b) {
            if (xk[a] == xk[b]) continue;
            const Eigen::Index up = xk[a] > xk[b] ? a : b;
            const Eigen::Index down = up == a ? b : a;
            const double t = (c[down] - c[up]) / (xk[up] - xk[down]);
            if (t >= lo && t <= hi) out.push_back(t);
        }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

CoordinateMax maximize_coordinate(const Sample& sample, const EstimatorSpec& spec, const Beta& beta,
                                  std::size_t k, const SearchDomain& domain) {
    check_coordinate(sample, beta, k);
    domain.validate();
    if (static_cast<std::size_t>(domain.lo.size()) != beta.p())
        throw Error(ErrorCode::DimensionMismatch, "domain length differs from theta");
    const PairKernel kernel(sample, spec);
    return maximize_with(sample, kernel, beta, k, domain, evaluate_at(sample, kernel, beta));
}

FitResult fit(const Sample& sample, const EstimatorSpec& spec, const FitOptions& opts) {
    const PairKernel kernel(sample, spec);
    const std::size_t p = sample.p();
    const Eigen::VectorXd init = opts.init.size() == 0 ? Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p))
                                                       : opts.init;
    if (static_cast<std::size_t>(init.size()) != p)
        throw Error(ErrorCode::DimensionMismatch, "init length differs from sample p");
    if (opts.max_sweeps < 1) throw Error(ErrorCode::InvalidArgument, "max_sweeps must be at least 1");
    const SearchDomain domain = opts.domain.value_or(SearchDomain::around(init));
    domain.validate();
    if (!domain.contains(init)) throw Error(ErrorCode::InvalidArgument, "init lies outside the search domain");

    Beta beta(init);
    ObjectiveValue current = evaluate_at(sample, kernel, beta);
    FitResult result;
    for (int sweep = 1; sweep <= opts.max_sweeps; ++sweep) {
        bool changed = false;
        for (std::size_t k = 0; k < p; ++k) {
            const CoordinateMax step = maximize_with(sample, kernel, beta, k, domain, current);
            if (step.theta_k != beta.theta()[static_cast<Eigen::Index>(k)]) {
                beta = beta.with_coordinate(k, step.theta_k);
                current = evaluate_at(sample, kernel, beta);
                changed = true;
            }
        }
        result.trace.push_back(current.value);
        result.sweeps_used = sweep;
        if (!changed) {
            result.converged = true;
            break;
        }
    }
    result.theta_hat = beta.theta();
    result.objective = current;
    return result;
}

}  // namespace rankest
