#include "rankone/solvers.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>

#include "rankone/error.hpp"

namespace rankone {

std::string to_string(Method m)
{
    switch (m) {
    case Method::als: return "als";
    case Method::asvd: return "asvd";
    case Method::mals: return "mals";
    case Method::masvd: return "masvd";
    }
    return "?";
}

Method parse_method(const std::string& name)
{
    std::string s = name;
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "als")
        return Method::als;
    if (s == "asvd")
        return Method::asvd;
    if (s == "mals")
        return Method::mals;
    if (s == "masvd")
        return Method::masvd;
    throw UnsupportedConfiguration("unknown method '" + name + "'");
}

std::string to_string(StopReason r)
{
    return r == StopReason::fitchange ? "fitchange" : "max_iterations";
}

void SolverConfig::validate() const
{
    if (max_iterations < 1)
        throw ContractViolation("max_iterations must be at least 1");
    if (!(fitchange_tol > 0.0))
        throw ContractViolation("fitchange_tol must be positive");
}

namespace {

SweepResult run_sweep(const Tensor& t, const UnitTuple& u, const SolverConfig& cfg,
                      const std::vector<ModePair>& schedule)
{
    switch (cfg.method) {
    case Method::als: return als_sweep(t, u);
    case Method::asvd: return asvd_sweep(t, u, schedule, cfg.svd);
    case Method::mals: return mals_sweep(t, u);
    case Method::masvd: return masvd_sweep(t, u, cfg.svd);
    }
    throw UnsupportedConfiguration("unknown method");
}

std::vector<ModePair> resolve_schedule(const Tensor& t, const SolverConfig& cfg)
{
    const std::size_t d = t.order();
    if (cfg.method == Method::masvd && d != 3)
        throw UnsupportedConfiguration("MASVD is defined for 3-mode tensors only, got d = " +
                                       std::to_string(d));
    if (cfg.method != Method::asvd)
        return {};
    if (d < 3)
        throw UnsupportedConfiguration("ASVD needs d >= 3; for matrices the SVD is already exact");
    if (cfg.pair_schedule.empty())
        return default_pair_schedule(d);
    for (const auto& [i, j] : cfg.pair_schedule)
        if (!(i < j && j < d))
            throw ContractViolation("schedule pair (" + std::to_string(i + 1) + "," +
                                    std::to_string(j + 1) + ") is not valid for d = " +
                                    std::to_string(d));
    return cfg.pair_schedule;
}

} // namespace

Rank1Result solve(const Tensor& t, const SolverConfig& cfg)
{
    if (!(t.norm() > 0.0))
        throw DegenerateInputError("cannot approximate the zero tensor");
    const UnitTuple start =
        cfg.init.kind == InitStrategy::Kind::hosvd ? init_hosvd(t) : init_random(t, cfg.init.seed);
    return solve(t, cfg, start);
}

Rank1Result solve(const Tensor& t, const SolverConfig& cfg, const UnitTuple& start)
{
    using clock = std::chrono::steady_clock;

    cfg.validate();
    const double norm = t.norm();
    if (!(norm > 0.0))
        throw DegenerateInputError("cannot approximate the zero tensor");
    if (start.dims() != t.dims())
        throw DimensionError("starting tuple does not match the tensor shape");
    const auto schedule = resolve_schedule(t, cfg);

    Rank1Result result;
    result.trace.tensor_norm = norm;

    UnitTuple u = start;
    double f = f_value(t, u);
    if (f == 0.0)
        throw DegenerateInputError("starting point has f = 0");
    result.trace.initial_f = f;

    // |f| so that the first fit change does not depend on the signs of the
    // starting vectors; every later f is nonnegative anyway.
    double fit_prev = std::abs(f) / norm;
    std::size_t calls = 0;
    for (std::size_t k = 1;; ++k) {
        const auto t0 = clock::now();
        SweepResult sweep = run_sweep(t, u, cfg, schedule);
        const double seconds = std::chrono::duration<double>(clock::now() - t0).count();

        IterationRecord rec;
        rec.f_before = f;
        rec.f_after = sweep.steps.empty() ? f : sweep.steps.back().f_after;
        rec.fit = rec.f_after / norm;
        rec.fitchange = std::abs(rec.fit - fit_prev);
        calls += sweep.optimization_calls;
        rec.cumulative_calls = calls;
        rec.seconds = seconds;
        rec.steps = std::move(sweep.steps);
        result.trace.iterations.push_back(std::move(rec));

        u = std::move(sweep.tuple);
        f = result.trace.iterations.back().f_after;
        const double change = result.trace.iterations.back().fitchange;
        fit_prev = result.trace.iterations.back().fit;

        if (change < cfg.fitchange_tol) {
            result.converged_by = StopReason::fitchange;
            break;
        }
        if (k >= cfg.max_iterations) {
            result.converged_by = StopReason::max_iterations;
            break;
        }
    }

    double lambda = f_value(t, u);
    if (lambda < 0.0) {
        u = u.negated(0);
        lambda = -lambda;
    }
    result.lambda = lambda;
    result.fit = std::clamp(lambda / norm, 0.0, 1.0);
    result.residual = residual_norm(t, u);
    result.axes = std::move(u);
    result.iterations = result.trace.iterations.size();
    result.optimization_calls = calls;
    return result;
}

} // namespace rankone
