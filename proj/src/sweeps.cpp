#include <algorithm>
#include <cstdint>
#include <random>
#include <string>

#include "rankone/error.hpp"
#include "rankone/solvers.hpp"

namespace rankone {

namespace {

// Contractions whose norm falls below this mean f has collapsed to an
// exactly degenerate configuration.
constexpr double breakdown_norm = 1e-300;

Vector normalized_contraction(const Tensor& t, const UnitTuple& u, std::size_t mode, double& norm)
{
    Vector c = contract_all_but(t, u.vectors(), mode);
    norm = c.norm();
    if (!(norm >= breakdown_norm))
        throw BreakdownError("contraction for mode " + std::to_string(mode + 1) +
                             " vanished; f reached an exactly degenerate configuration");
    return c / norm;
}

SingularTriple pair_triple(const Tensor& t, const UnitTuple& u, std::size_t i, std::size_t j,
                           const SvdOptions& svd)
{
    const Matrix a = contract_all_but_pair(t, u.vectors(), i, j);
    // Warm start on the Gram side; only the iterative route uses it.
    const Vector& start = a.rows() <= a.cols() ? u[i] : u[j];
    try {
        return top_singular_triple(a, svd, start);
    } catch (const DegenerateInputError&) {
        throw BreakdownError("contracted matrix for modes (" + std::to_string(i + 1) + "," +
                             std::to_string(j + 1) + ") vanished");
    }
}

void require_fits(const Tensor& t, const UnitTuple& u)
{
    if (u.dims() != t.dims())
        throw DimensionError("tuple does not match the tensor shape");
}

// Replaces a vector and reports whether it actually changed.
bool replace(UnitTuple& u, std::size_t mode, Vector v)
{
    if (u[mode] == v)
        return false;
    u.set_unit(mode, std::move(v));
    return true;
}

} // namespace

UnitTuple init_random(const Shape& dims, std::uint64_t seed)
{
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    VectorTuple vectors;
    for (std::size_t m : dims) {
        if (m == 0)
            throw DimensionError("zero dimension");
        Vector v(static_cast<Eigen::Index>(m));
        do {
            for (Eigen::Index k = 0; k < v.size(); ++k)
                v[k] = normal(gen);
        } while (v.squaredNorm() == 0.0);
        vectors.push_back(std::move(v));
    }
    return UnitTuple(std::move(vectors));
}

UnitTuple init_random(const Tensor& t, std::uint64_t seed)
{
    // Successive attempts draw from a seed sequence so the result stays a
    // pure function of (tensor, seed).
    std::mt19937_64 seeds(seed);
    std::uint64_t s = seed;
    for (int attempt = 0; attempt < 100; ++attempt) {
        UnitTuple u = init_random(t.dims(), s);
        if (f_value(t, u) != 0.0)
            return u;
        s = seeds();
    }
    throw DegenerateInputError("100 consecutive random starts gave f = 0");
}

UnitTuple init_hosvd(const Tensor& t)
{
    if (!(t.norm() > 0.0))
        throw DegenerateInputError("HOSVD initialization of a zero tensor");
    VectorTuple vectors;
    for (std::size_t mode = 0; mode < t.order(); ++mode)
        vectors.push_back(top_singular_triple(unfold(t, mode), SvdOptions::dense()).u);
    return UnitTuple(std::move(vectors));
}

std::vector<ModePair> default_pair_schedule(std::size_t d)
{
    if (d < 3)
        throw UnsupportedConfiguration("pair schedules need d >= 3, got d = " + std::to_string(d));
    if (d == 3)
        return {{1, 2}, {0, 2}, {0, 1}};
    if (d == 4)
        return {{0, 1}, {2, 3}, {0, 2}, {1, 3}, {0, 3}, {1, 2}};

    std::vector<ModePair> all;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i + 1; j < d; ++j)
            all.emplace_back(i, j);
    std::vector<bool> used(all.size(), false);
    std::vector<ModePair> order;
    order.reserve(all.size());
    while (order.size() < all.size()) {
        std::size_t pick = all.size();
        if (!order.empty()) {
            const auto [pi, pj] = order.back();
            for (std::size_t k = 0; k < all.size(); ++k) {
                const auto [i, j] = all[k];
                if (!used[k] && i != pi && i != pj && j != pi && j != pj) {
                    pick = k;
                    break;
                }
            }
        }
        if (pick == all.size())
            pick = static_cast<std::size_t>(std::find(used.begin(), used.end(), false) - used.begin());
        used[pick] = true;
        order.push_back(all[pick]);
    }
    return order;
}

UnitTuple als_step(const Tensor& t, const UnitTuple& u, std::size_t mode)
{
    require_fits(t, u);
    double norm = 0.0;
    UnitTuple next = u;
    next.set_unit(mode, normalized_contraction(t, u, mode, norm));
    return next;
}

UnitTuple asvd_step(const Tensor& t, const UnitTuple& u, std::size_t i, std::size_t j,
                    const SvdOptions& svd)
{
    require_fits(t, u);
    if (!(i < j && j < t.order()))
        throw DimensionError("pair modes must satisfy i < j < d");
    const SingularTriple st = pair_triple(t, u, i, j, svd);
    UnitTuple next = u;
    next.set_unit(i, st.u);
    next.set_unit(j, st.v);
    return next;
}

SweepResult als_sweep(const Tensor& t, const UnitTuple& u)
{
    require_fits(t, u);
    SweepResult r{u, {}, 0};
    double f = f_value(t, u);
    for (std::size_t mode = 0; mode < t.order(); ++mode) {
        SubStep step;
        step.modes = {mode};
        step.chosen = mode;
        step.f_before = f;
        double norm = 0.0;
        r.tuple.set_unit(mode, normalized_contraction(t, r.tuple, mode, norm));
        f = norm;
        step.f_after = f;
        step.optimization_calls = 1;
        ++r.optimization_calls;
        r.steps.push_back(std::move(step));
    }
    return r;
}

SweepResult asvd_sweep(const Tensor& t, const UnitTuple& u, const std::vector<ModePair>& schedule,
                       const SvdOptions& svd)
{
    require_fits(t, u);
    if (t.order() < 3)
        throw UnsupportedConfiguration("ASVD needs d >= 3; for matrices the SVD is already exact");
    SweepResult r{u, {}, 0};
    double f = f_value(t, u);
    for (const auto& [i, j] : schedule) {
        if (!(i < j && j < t.order()))
            throw DimensionError("schedule pair (" + std::to_string(i + 1) + "," +
                                 std::to_string(j + 1) + ") is not valid for d = " +
                                 std::to_string(t.order()));
        SubStep step;
        step.modes = {i, j};
        step.chosen = i;
        step.f_before = f;
        const SingularTriple st = pair_triple(t, r.tuple, i, j, svd);
        r.tuple.set_unit(i, st.u);
        r.tuple.set_unit(j, st.v);
        f = st.sigma;
        step.f_after = f;
        step.optimization_calls = 1;
        ++r.optimization_calls;
        r.steps.push_back(std::move(step));
    }
    return r;
}

SweepResult mals_sweep(const Tensor& t, const UnitTuple& u)
{
    require_fits(t, u);
    const std::size_t d = t.order();

    struct Candidate {
        bool valid = false;
        std::vector<std::uint64_t> seen;
        double value = 0.0;
        Vector x;
    };

    SweepResult r{u, {}, 0};
    std::vector<std::uint64_t> version(d, 0);
    std::vector<Candidate> cache(d);
    std::vector<std::size_t> remaining(d);
    for (std::size_t k = 0; k < d; ++k)
        remaining[k] = k;

    double f = f_value(t, u);
    while (!remaining.empty()) {
        SubStep step;
        step.f_before = f;
        std::size_t best = remaining.front();
        double best_value = 0.0;
        bool have_best = false;
        for (std::size_t mode : remaining) {
            // The candidate for `mode` reads every other vector; reuse it only
            // when none of them has changed since it was computed.
            Candidate& c = cache[mode];
            if (!(c.valid && c.seen == version)) {
                double norm = 0.0;
                c.x = normalized_contraction(t, r.tuple, mode, norm);
                c.value = norm;
                c.seen = version;
                c.valid = true;
                ++step.optimization_calls;
            }
            step.candidates.emplace_back(mode, c.value);
            if (!have_best || c.value > best_value) {
                best = mode;
                best_value = c.value;
                have_best = true;
            }
        }
        if (replace(r.tuple, best, cache[best].x))
            ++version[best];
        f = best_value;
        step.modes = {best};
        step.chosen = best;
        step.f_after = f;
        r.optimization_calls += step.optimization_calls;
        r.steps.push_back(std::move(step));
        remaining.erase(std::find(remaining.begin(), remaining.end(), best));
    }
    return r;
}

SweepResult masvd_sweep(const Tensor& t, const UnitTuple& u, const SvdOptions& svd)
{
    require_fits(t, u);
    if (t.order() != 3)
        throw UnsupportedConfiguration("MASVD is defined for 3-mode tensors only, got d = " +
                                       std::to_string(t.order()));

    struct Candidate {
        bool valid = false;
        std::vector<std::uint64_t> seen;
        SingularTriple triple;
    };
    const bool warm_started = svd.kind != SvdOptions::Kind::dense;

    SweepResult r{u, {}, 0};
    std::vector<std::uint64_t> version(3, 0);
    std::vector<Candidate> cache(3);
    std::vector<std::size_t> remaining{0, 1, 2};

    auto others = [](std::size_t k) -> ModePair {
        return k == 0 ? ModePair{1, 2} : k == 1 ? ModePair{0, 2} : ModePair{0, 1};
    };
    // With the dense SVD, g_k depends on x_k alone; the iterative route also
    // reads the current pair through its warm start.
    auto fresh = [&](std::size_t k, const Candidate& c) {
        if (!c.valid)
            return false;
        return warm_started ? c.seen == version : c.seen[k] == version[k];
    };

    double f = f_value(t, u);
    while (!remaining.empty()) {
        SubStep step;
        step.f_before = f;
        std::size_t best = remaining.front();
        double best_value = 0.0;
        bool have_best = false;
        for (std::size_t k : remaining) {
            Candidate& c = cache[k];
            if (!fresh(k, c)) {
                const auto [p, q] = others(k);
                c.triple = pair_triple(t, r.tuple, p, q, svd);
                c.seen = version;
                c.valid = true;
                ++step.optimization_calls;
            }
            step.candidates.emplace_back(k, c.triple.sigma);
            if (!have_best || c.triple.sigma > best_value) {
                best = k;
                best_value = c.triple.sigma;
                have_best = true;
            }
        }
        const auto [p, q] = others(best);
        if (replace(r.tuple, p, cache[best].triple.u))
            ++version[p];
        if (replace(r.tuple, q, cache[best].triple.v))
            ++version[q];
        f = best_value;
        step.modes = {p, q};
        step.chosen = best;
        step.f_after = f;
        r.optimization_calls += step.optimization_calls;
        r.steps.push_back(std::move(step));
        remaining.erase(std::find(remaining.begin(), remaining.end(), best));
    }
    return r;
}

} // namespace rankone
