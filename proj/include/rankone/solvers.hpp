#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rankone/linalg.hpp"
#include "rankone/tensor.hpp"

namespace rankone {

enum class Method { als, asvd, mals, masvd };

std::string to_string(Method m);
// Accepts "als", "asvd", "mals", "masvd" (case-insensitive).
Method parse_method(const std::string& name);

using ModePair = std::pair<std::size_t, std::size_t>;

struct InitStrategy {
    enum class Kind { random, hosvd };

    Kind kind = Kind::random;
    std::uint64_t seed = 0;

    static InitStrategy random(std::uint64_t seed) { return {Kind::random, seed}; }
    static InitStrategy hosvd() { return {Kind::hosvd, 0}; }
};

struct SolverConfig {
    Method method = Method::als;
    // Outer iterations (full sweeps) allowed before giving up.
    std::size_t max_iterations = 10;
    // Stop once |fit_k - fit_{k-1}| drops below this, fit = f / ||T||.
    double fitchange_tol = 1e-4;
    InitStrategy init{};
    // Inner SVD for ASVD/MASVD. Defaults to the exact dense route.
    SvdOptions svd = SvdOptions::dense();
    // Pair order for ASVD; empty means default_pair_schedule(d).
    std::vector<ModePair> pair_schedule;

    void validate() const;
};

// One update inside a sweep: an ALS mode update, an ASVD pair substitution or
// a MALS/MASVD selection round.
struct SubStep {
    // Modes whose vectors were replaced.
    std::vector<std::size_t> modes;
    // Candidate f values in the order they were ranked (MALS: per mode in the
    // remaining set, MASVD: per fixed mode); empty for ALS/ASVD.
    std::vector<std::pair<std::size_t, double>> candidates;
    // The mode (MALS) or fixed mode (MASVD) that won; for ALS/ASVD the first
    // updated mode.
    std::size_t chosen = 0;
    double f_before = 0.0;
    double f_after = 0.0;
    // Optimization calls spent by this step.
    std::size_t optimization_calls = 0;
};

struct IterationRecord {
    double f_before = 0.0;
    double f_after = 0.0;
    double fit = 0.0;
    double fitchange = 0.0;
    std::size_t cumulative_calls = 0;
    double seconds = 0.0;
    std::vector<SubStep> steps;
};

struct SolverTrace {
    double tensor_norm = 0.0;
    double initial_f = 0.0;
    std::vector<IterationRecord> iterations;

    std::size_t optimization_calls() const
    {
        return iterations.empty() ? 0 : iterations.back().cumulative_calls;
    }
};

enum class StopReason { max_iterations, fitchange };
std::string to_string(StopReason r);

struct Rank1Result {
    double lambda = 0.0;
    UnitTuple axes;
    double fit = 0.0;
    double residual = 0.0;
    StopReason converged_by = StopReason::max_iterations;
    std::size_t iterations = 0;
    std::size_t optimization_calls = 0;
    SolverTrace trace;

    Rank1Tensor approximation() const { return {lambda, axes}; }
};

struct SweepResult {
    UnitTuple tuple;
    std::vector<SubStep> steps;
    std::size_t optimization_calls = 0;
};

// Random point on S(m): normalized i.i.d. standard normals, deterministic per
// seed. With a tensor, resamples while f vanishes (at most 100 attempts).
UnitTuple init_random(const Shape& dims, std::uint64_t seed);
UnitTuple init_random(const Tensor& t, std::uint64_t seed);

// x_i = top left singular vector of the mode-i unfolding.
UnitTuple init_hosvd(const Tensor& t);

// Pair order for ASVD: the published orders for d = 3 and d = 4, and for
// larger d all pairs with consecutive picks disjoint where possible.
std::vector<ModePair> default_pair_schedule(std::size_t d);

SweepResult als_sweep(const Tensor& t, const UnitTuple& u);
SweepResult asvd_sweep(const Tensor& t, const UnitTuple& u, const std::vector<ModePair>& schedule,
                       const SvdOptions& svd = SvdOptions::dense());
SweepResult mals_sweep(const Tensor& t, const UnitTuple& u);
SweepResult masvd_sweep(const Tensor& t, const UnitTuple& u,
                        const SvdOptions& svd = SvdOptions::dense());

// Single ALS update of one mode, returning the new tuple (f after = ||T x others||).
UnitTuple als_step(const Tensor& t, const UnitTuple& u, std::size_t mode);
// Single ASVD substitution of the pair (i, j), i < j.
UnitTuple asvd_step(const Tensor& t, const UnitTuple& u, std::size_t i, std::size_t j,
                    const SvdOptions& svd = SvdOptions::dense());

Rank1Result solve(const Tensor& t, const SolverConfig& cfg);
// Same, from an explicit starting tuple (cfg.init is ignored).
Rank1Result solve(const Tensor& t, const SolverConfig& cfg, const UnitTuple& start);

} // namespace rankone
