#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "rankone/tensor.hpp"

namespace rankone {

// How far a tuple is from satisfying T x (others) = lambda x_i in every mode.
struct CriticalityReport {
    std::vector<double> lambda_per_mode;   // x_i^T (T x others)
    std::vector<double> residual_per_mode; // ||T x others - lambda x_i||, lambda = f
    double f = 0.0;
    double max_residual = 0.0;
    double lambda_spread = 0.0;
};

CriticalityReport criticality(const Tensor& t, const UnitTuple& u);

enum class SemiMaxLevel { one_semi, two_semi };

struct SemiMaxReport {
    SemiMaxLevel level = SemiMaxLevel::one_semi;
    double f = 0.0;
    double tolerance = 0.0; // absolute, tol * ||T||
    // one_semi: per mode i, f - ||T x (others)||.
    // two_semi: per fixed mode k, f - sigma_1(T x x_k).
    // Both are <= 0 up to round-off; a check passes when margin >= -tolerance.
    std::vector<double> margins;
    std::vector<bool> passed;

    bool all_passed() const;
};

// Semi-maximality through the closed-form maxima: a linear functional on a
// sphere (one_semi, any d) or the top singular value of a matrix (two_semi,
// d = 3 only). `tol` is relative to ||T||.
SemiMaxReport check_semi_max(const Tensor& t, const UnitTuple& u, SemiMaxLevel level, double tol);

// (u_1, ..., u_d) = lambda^{-1/(d-2)} (x_1, ..., x_d); needs lambda > 0, d >= 3.
VectorTuple fixed_point_from_tuple(const UnitTuple& u, double lambda);

// Inverse direction: a nonzero fixed point v gives x = v / ||v_1|| with
// lambda = ||v_1||^{-(d-2)}.
struct TupleFromFixedPoint {
    UnitTuple tuple;
    double lambda = 0.0;
};
TupleFromFixedPoint tuple_from_fixed_point(const VectorTuple& v);

// F_i(v) = T x (v_j, j != i), i = 1..d.
VectorTuple apply_F(const Tensor& t, const VectorTuple& v);

// Index of the candidate fixed point closest to the origin (the largest
// singular value among the candidates). Candidates are compared by sum ||v_i||^2.
std::size_t closest_fixed_point(const std::vector<VectorTuple>& candidates);

// Central finite-difference Jacobian of u - F(u) at the origin; returns the
// largest entry of |J - I|.
double jacobian_check_origin(const Tensor& t, double h);

void write_report(std::ostream& out, const CriticalityReport& r);
void write_report(std::ostream& out, const SemiMaxReport& r);

} // namespace rankone
